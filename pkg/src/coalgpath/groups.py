"""Permutation groups acting on argument tuples.

Groups are given by generators (0-based images) and enumerated fully by
closure under composition.  Enumeration is capped at arity 6 and order
720: the canonicalization below takes a lexicographic minimum over the
whole group, which is only sensible at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sets import CoalgError

MAX_ARITY = 6
MAX_ORDER = 720


class GroupBoundError(CoalgError):
    pass


class ArityError(CoalgError):
    pass


@dataclass(frozen=True)
class PermGroup:
    """A subgroup of the symmetric group on ``arity`` slots."""

    arity: int
    generators: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise ArityError("arity must be non-negative")
        if self.arity > MAX_ARITY:
            raise GroupBoundError(f"arity {self.arity} exceeds cap {MAX_ARITY}")
        for g in self.generators:
            if sorted(g) != list(range(self.arity)):
                raise ArityError(f"generator {g} is not a permutation of 0..{self.arity - 1}")


_ELEMENTS_CACHE: dict[PermGroup, tuple[tuple[int, ...], ...]] = {}


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # (p*q)[i] = q[p[i]]: apply p first when acting on tuples by indexing.
    return tuple(q[i] for i in p)


def group_elements(g: PermGroup) -> tuple[tuple[int, ...], ...]:
    """All elements of the generated group, in a deterministic order."""
    cached = _ELEMENTS_CACHE.get(g)
    if cached is not None:
        return cached
    identity = tuple(range(g.arity))
    elements = {identity}
    frontier = [identity]
    while frontier:
        new_frontier = []
        for p in frontier:
            for gen in g.generators:
                q = _compose(p, gen)
                if q not in elements:
                    elements.add(q)
                    new_frontier.append(q)
                    if len(elements) > MAX_ORDER:
                        raise GroupBoundError(
                            f"group order exceeds cap {MAX_ORDER} (arity {g.arity})"
                        )
        frontier = new_frontier
    result = tuple(sorted(elements))
    _ELEMENTS_CACHE[g] = result
    return result


def trivial_group(arity: int) -> PermGroup:
    return PermGroup(arity, ())


def symmetric_group(arity: int) -> PermGroup:
    if arity <= 1:
        return trivial_group(arity)
    swap = (1, 0) + tuple(range(2, arity))
    cycle = tuple(range(1, arity)) + (0,)
    return PermGroup(arity, (swap, cycle))


def cyclic_group(arity: int) -> PermGroup:
    if arity <= 1:
        return trivial_group(arity)
    return PermGroup(arity, (tuple(range(1, arity)) + (0,),))


def apply_perm_tuple(p: tuple[int, ...], t: tuple) -> tuple:
    return tuple(t[i] for i in p)


def canonical_tuple(g: PermGroup, t: tuple) -> tuple:
    """The least element of the orbit of ``t`` under ``g``.

    "Least" is w.r.t. the natural order of the entries, so entries must be
    mutually comparable (strings, or term keys).  Idempotent and constant
    on orbits by construction.
    """
    if len(t) != g.arity:
        raise ArityError(f"tuple of length {len(t)} under group of arity {g.arity}")
    best = t
    for p in group_elements(g):
        candidate = apply_perm_tuple(p, t)
        if candidate < best:
            best = candidate
    return best
