"""Finite sorted sets and maps between them.

Everything downstream (functor evaluation, coalgebras, paths) works over
finite sets indexed by a fixed list of sorts.  The single default sort is
``"*"``; multisorted carriers only show up in the category-encoding
instance.  Element order inside a sort is the canonical tie-break order
used by all enumeration and canonicalization code, and is simply the
string order of the element names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

DEFAULT_SORT = "*"


class CoalgError(Exception):
    """Base class for errors raised by this package."""


class SortError(CoalgError):
    pass


@dataclass(frozen=True)
class SortedSet:
    """A finite set per sort, with elements kept in canonical order."""

    sorts: tuple[str, ...]
    data: tuple[tuple[str, ...], ...]  # aligned with sorts

    def __post_init__(self) -> None:
        if not self.sorts:
            raise SortError("sort list must be non-empty")
        if len(set(self.sorts)) != len(self.sorts):
            raise SortError(f"duplicate sort names in {self.sorts}")
        if len(self.data) != len(self.sorts):
            raise SortError("per-sort data does not match sort list")
        for sort, elems in zip(self.sorts, self.data):
            if len(set(elems)) != len(elems):
                raise SortError(f"duplicate elements in sort {sort!r}: {elems}")
            if tuple(sorted(elems)) != elems:
                raise SortError(f"elements of sort {sort!r} not in canonical order")

    @staticmethod
    def make(per_sort: Mapping[str, Iterable[str]], sorts: Iterable[str] | None = None) -> "SortedSet":
        sort_list = tuple(sorts) if sorts is not None else tuple(per_sort.keys())
        return SortedSet(sort_list, tuple(tuple(sorted(per_sort.get(s, ()))) for s in sort_list))

    @staticmethod
    def single(elems: Iterable[str]) -> "SortedSet":
        """A set over the default sort ``*``."""
        return SortedSet((DEFAULT_SORT,), (tuple(sorted(elems)),))

    def elems(self, sort: str) -> tuple[str, ...]:
        try:
            return self.data[self.sorts.index(sort)]
        except ValueError:
            raise SortError(f"unknown sort {sort!r}") from None

    def pairs(self) -> Iterator[tuple[str, str]]:
        """All (sort, element) pairs in canonical order."""
        for sort, elems in zip(self.sorts, self.data):
            for e in elems:
                yield (sort, e)

    def size(self) -> int:
        return sum(len(elems) for elems in self.data)

    def has(self, sort: str, elem: str) -> bool:
        return sort in self.sorts and elem in self.elems(sort)

    def is_empty(self) -> bool:
        return self.size() == 0

    def restrict(self, keep: Iterable[tuple[str, str]]) -> "SortedSet":
        keep_set = set(keep)
        return SortedSet(
            self.sorts,
            tuple(tuple(e for e in elems if (s, e) in keep_set) for s, elems in zip(self.sorts, self.data)),
        )

    def union_names(self, other: "SortedSet") -> "SortedSet":
        if self.sorts != other.sorts:
            raise SortError("cannot union sorted sets over different sort lists")
        return SortedSet(
            self.sorts,
            tuple(tuple(sorted(set(a) | set(b))) for a, b in zip(self.data, other.data)),
        )


def singleton_pointing(sorts: tuple[str, ...] = (DEFAULT_SORT,), at: str | None = None, name: str = "*") -> SortedSet:
    """The pointing object with one element at one sort and nothing elsewhere."""
    target = at if at is not None else sorts[0]
    return SortedSet.make({s: ([name] if s == target else []) for s in sorts}, sorts)


class SortedFun:
    """A total map between sorted sets (or into a term space).

    ``table`` is keyed by (sort, element) over the domain.  The codomain
    may be another SortedSet or, for maps into ``F(Y)``, ``None`` (the
    caller tracks the term space).
    """

    __slots__ = ("dom", "cod", "table")

    def __init__(self, dom: SortedSet, cod: SortedSet | None, table: Mapping[tuple[str, str], object]):
        self.dom = dom
        self.cod = cod
        self.table = dict(table)
        for key in dom.pairs():
            if key not in self.table:
                raise SortError(f"map not total: missing {key}")
        if len(self.table) != dom.size():
            extra = set(self.table) - set(dom.pairs())
            raise SortError(f"map defined outside its domain: {sorted(extra)}")
        if cod is not None:
            for (s, x), y in self.table.items():
                if not cod.has(s, y):  # type: ignore[arg-type]
                    raise SortError(f"image of {(s, x)} is {y!r}, not in codomain sort {s!r}")

    def __call__(self, sort: str, elem: str):
        return self.table[(sort, elem)]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SortedFun)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.table == other.table
        )

    def __repr__(self) -> str:
        items = ", ".join(f"{s}.{x}->{v}" for (s, x), v in sorted(self.table.items()))
        return f"SortedFun({items})"

    @staticmethod
    def identity(carrier: SortedSet) -> "SortedFun":
        return SortedFun(carrier, carrier, {(s, e): e for s, e in carrier.pairs()})

    def compose(self, first: "SortedFun") -> "SortedFun":
        """self after first (both carrier-to-carrier)."""
        if self.cod is None or first.cod is None:
            raise SortError("can only compose carrier-to-carrier maps")
        table = {(s, x): self.table[(s, y)] for (s, x), y in first.table.items()}
        return SortedFun(first.dom, self.cod, table)

    def is_injective(self) -> bool:
        per_sort: dict[str, set] = {}
        for (s, _x), y in self.table.items():
            seen = per_sort.setdefault(s, set())
            if y in seen:
                return False
            seen.add(y)
        return True

    def is_surjective(self) -> bool:
        if self.cod is None:
            raise SortError("no codomain recorded")
        image = {(s, y) for (s, _x), y in self.table.items()}
        return image == set(self.cod.pairs())

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()


def all_functions(dom: SortedSet, cod: SortedSet) -> Iterator[SortedFun]:
    """Enumerate every total map dom -> cod in a fixed order."""
    import itertools

    keys = list(dom.pairs())
    choice_lists = [cod.elems(s) for s, _ in keys]
    if any(not choices for choices in choice_lists):
        return
    for combo in itertools.product(*choice_lists):
        yield SortedFun(dom, cod, dict(zip(keys, combo)))
