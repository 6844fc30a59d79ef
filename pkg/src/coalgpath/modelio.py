"""Line-oriented text formats for systems, paths, categories and automata.

Files are split into ``[section]`` blocks; ``#`` starts a comment.  The
functor grammar is

    const(e1 e2 ...) | id | sort(S) | prod(f, ...) | coprod(f, ...)
    | compose(f, g) | analytic{ sym/arity [(1 2)(3 4)] ; ... } | plus1(f) | pf(f)

and terms are written ``name``, ``(t, ..., t)``, ``in<k>(t)``,
``sym(t, ..., t)``; the glyphs for the unit, the added point and the
final marker have ASCII aliases ``unit``, ``bot`` and ``ok``.  Parsing a
term is guided by the expected expression node, so constant names and
state names never clash; coproduct injections may be left implicit when
exactly one branch parses.  ``parse . print`` is the identity on
canonical files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from .coalgebra import PointedCoalgebra
from .functors import (
    BOT, CHECK, UNIT,
    Analytic,
    ComposeNode,
    Const,
    ConstElem,
    Coprod,
    Functor,
    Inj,
    Node,
    Pf,
    Prod,
    SortRef,
    Symbol,
    Term,
    TupleTerm,
    UnitLeaf,
    Var,
    ansym,
    functor,
    multisorted,
    plus1,
)
from .groups import PermGroup
from .lasota import FiniteCategory
from .nominal import RnnaPresentation, RnnaRule
from .paths import PathObj, make_path, validate_path
from .precise import TermMap, TermSpace
from .sets import DEFAULT_SORT, CoalgError, SortedSet

NAME_RE = re.compile(r"[A-Za-z0-9_*.:+'⊥•✓-]+")
ALIASES = {"unit": UNIT, "bot": BOT, "ok": CHECK}
GLYPH_ASCII = {UNIT: "unit", BOT: "bot", CHECK: "ok"}


class ModelParseError(CoalgError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# ---------------------------------------------------------------------------
# Tokenizer

PUNCT = set("(){}[],;=/")


def tokenize(text: str, line: int | None = None) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"':  # quoted name, used for generated identifiers
            end = text.find('"', i + 1)
            if end < 0:
                raise ModelParseError("unterminated quoted name", line)
            tokens.append(text[i + 1 : end])
            i = end + 1
            continue
        if ch in PUNCT:
            tokens.append(ch)
            i += 1
            continue
        m = NAME_RE.match(text, i)
        if not m:
            raise ModelParseError(f"unexpected character {ch!r}", line)
        tokens.append(m.group(0))
        i = m.end()
    return tokens


def format_name(name: str) -> str:
    """Quote identifiers that the bare-name grammar cannot carry."""
    return name if NAME_RE.fullmatch(name) else f'"{name}"'


def unquote_name(raw: str) -> str:
    if len(raw) >= 2 and raw.startswith('"') and raw.endswith('"'):
        return raw[1:-1]
    return raw


class TokenStream:
    def __init__(self, tokens: list[str], line: int | None = None):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ModelParseError("unexpected end of input", self.line)
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ModelParseError(f"expected {tok!r}, got {got!r}", self.line)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


# ---------------------------------------------------------------------------
# Functor expressions

def parse_functor_text(text: str, line: int | None = None) -> Node:
    stream = TokenStream(tokenize(text, line), line)
    node = _parse_node(stream)
    if not stream.done():
        raise ModelParseError(f"trailing input after functor expression: {stream.peek()!r}", line)
    return node


def _parse_node(s: TokenStream) -> Node:
    head = s.next()
    if head == "id":
        return SortRef(DEFAULT_SORT)
    if head == "sort":
        s.expect("(")
        name = s.next()
        s.expect(")")
        return SortRef(name)
    if head == "const":
        s.expect("(")
        elems = []
        while s.peek() != ")":
            elems.append(_alias(s.next()))
        s.expect(")")
        return Const(tuple(sorted(elems)))
    if head in ("prod", "coprod"):
        s.expect("(")
        parts = [_parse_node(s)]
        while s.peek() == ",":
            s.next()
            parts.append(_parse_node(s))
        s.expect(")")
        return Prod(tuple(parts)) if head == "prod" else Coprod(tuple(parts))
    if head == "plus1":
        s.expect("(")
        inner = _parse_node(s)
        s.expect(")")
        return Coprod((inner, Const((BOT,))))
    if head == "pf":
        s.expect("(")
        inner = _parse_node(s)
        s.expect(")")
        return Pf(inner)
    if head == "compose":
        s.expect("(")
        outer = _parse_node(s)
        s.expect(",")
        inner = _parse_node(s)
        s.expect(")")
        return ComposeNode(outer, functor(inner))
    if head == "analytic":
        s.expect("{")
        symbols = []
        while True:
            name = s.next()
            s.expect("/")
            arity = int(s.next())
            gens: list[tuple[int, ...]] = []
            if s.peek() == "[":
                s.next()
                while s.peek() == "(":
                    gens.append(_parse_cycles(s, arity))
                s.expect("]")
            group = PermGroup(arity, tuple(gens))
            symbols.append(Symbol(name, (DEFAULT_SORT,) * arity, group))
            if s.peek() == ";":
                s.next()
                continue
            break
        s.expect("}")
        return Analytic(tuple(symbols))
    raise ModelParseError(f"unknown functor constructor {head!r}", s.line)


def _parse_cycles(s: TokenStream, arity: int) -> tuple[int, ...]:
    perm = list(range(arity))
    while s.peek() == "(":
        s.next()
        cycle = []
        while s.peek() != ")":
            cycle.append(int(s.next()) - 1)
        s.expect(")")
        for i, slot in enumerate(cycle):
            if not 0 <= slot < arity:
                raise ModelParseError(f"cycle entry {slot + 1} out of range", s.line)
            perm[slot] = cycle[(i + 1) % len(cycle)]
    return tuple(perm)


def _alias(token: str) -> str:
    return ALIASES.get(token, token)


def print_functor_node(node: Node, ascii_glyphs: bool = False) -> str:
    def name(e: str) -> str:
        return GLYPH_ASCII.get(e, e) if ascii_glyphs else e

    if isinstance(node, SortRef):
        return "id" if node.sort == DEFAULT_SORT else f"sort({node.sort})"
    if isinstance(node, Const):
        return "const(" + " ".join(name(e) for e in node.elems) + ")"
    if isinstance(node, Prod):
        return "prod(" + ", ".join(print_functor_node(p, ascii_glyphs) for p in node.parts) + ")"
    if isinstance(node, Coprod):
        if len(node.parts) == 2 and node.parts[1] == Const((BOT,)):
            return f"plus1({print_functor_node(node.parts[0], ascii_glyphs)})"
        return "coprod(" + ", ".join(print_functor_node(p, ascii_glyphs) for p in node.parts) + ")"
    if isinstance(node, Pf):
        return f"pf({print_functor_node(node.inner, ascii_glyphs)})"
    if isinstance(node, ComposeNode):
        inner = node.inner.node(DEFAULT_SORT)
        return f"compose({print_functor_node(node.outer, ascii_glyphs)}, {print_functor_node(inner, ascii_glyphs)})"
    if isinstance(node, Analytic):
        chunks = []
        for sym in node.symbols:
            gens = ""
            if sym.group.generators:
                gens = " [" + "".join(_print_cycles(g) for g in sym.group.generators) + "]"
            chunks.append(f"{sym.name}/{sym.group.arity}{gens}")
        return "analytic{ " + " ; ".join(chunks) + " }"
    raise CoalgError(f"unknown node {node!r}")


def _print_cycles(perm: tuple[int, ...]) -> str:
    seen: set[int] = set()
    out = ""
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen.add(cur)
            cur = perm[cur]
        out += "(" + " ".join(str(i + 1) for i in cycle) + ")"
    return out


# ---------------------------------------------------------------------------
# Terms (parsed against an expected node)

def parse_term_text(text: str, node: Node, carrier: SortedSet, line: int | None = None) -> Term:
    stream = TokenStream(tokenize(text, line), line)
    term = _parse_term(stream, node, carrier)
    if not stream.done():
        raise ModelParseError(f"trailing input after term: {stream.peek()!r}", line)
    return term


def _parse_term(s: TokenStream, node: Node, carrier: SortedSet, inner: Functor | None = None) -> Term:
    # ``inner`` is set while walking the outer layer of a composition:
    # sort references then denote inner components rather than variables.
    if isinstance(node, Coprod):
        tok = s.peek()
        if tok is not None and re.fullmatch(r"in\d+", tok):
            s.next()
            index = int(tok[2:])
            if not 0 <= index < len(node.parts):
                raise ModelParseError(f"injection {tok} out of range", s.line)
            s.expect("(")
            arg = _parse_term(s, node.parts[index], carrier, inner)
            s.expect(")")
            return Inj(index, arg)
        # implicit injection: exactly one branch must accept the term
        start = s.pos
        matches = []
        for i, part in enumerate(node.parts):
            s.pos = start
            try:
                arg = _parse_term(s, part, carrier, inner)
                matches.append((i, arg, s.pos))
            except ModelParseError:
                continue
        if len(matches) == 1:
            i, arg, end = matches[0]
            s.pos = end
            return Inj(i, arg)
        if not matches:
            raise ModelParseError("term fits no coproduct branch", s.line)
        raise ModelParseError("ambiguous coproduct term; use an explicit in<k>(...)", s.line)
    if isinstance(node, Const):
        tok = _alias(s.next())
        if tok not in node.elems:
            raise ModelParseError(f"{tok!r} is not one of the constants {node.elems}", s.line)
        return ConstElem(tok)
    if isinstance(node, SortRef):
        if inner is not None:
            return _parse_term(s, inner.node(node.sort), carrier, None)
        tok = _alias(s.next())
        if not carrier.has(node.sort, tok):
            raise ModelParseError(f"{tok!r} is not an element of sort {node.sort!r}", s.line)
        return Var(node.sort, tok)
    if isinstance(node, Prod):
        s.expect("(")
        args = []
        for i, part in enumerate(node.parts):
            if i:
                s.expect(",")
            args.append(_parse_term(s, part, carrier, inner))
        s.expect(")")
        return TupleTerm(tuple(args))
    if isinstance(node, Analytic):
        sym_name = s.next()
        sym = node.symbol(sym_name)
        args = []
        if sym.group.arity:
            s.expect("(")
            for i, slot in enumerate(sym.slot_sorts):
                if i:
                    s.expect(",")
                args.append(_parse_term(s, SortRef(slot), carrier, inner))
            s.expect(")")
        return ansym(sym.group, sym.name, tuple(args))
    if isinstance(node, Pf):
        s.expect("{")
        from .functors import SetOf

        args = []
        while s.peek() != "}":
            if args:
                s.expect(",")
            args.append(_parse_term(s, node.inner, carrier, inner))
        s.expect("}")
        return SetOf(args)
    if isinstance(node, ComposeNode):
        if inner is not None:
            raise ModelParseError("nested composition in the outer layer", s.line)
        return _parse_term(s, node.outer, carrier, node.inner)
    raise ModelParseError(f"cannot parse a term of {node!r}", s.line)


def print_term_for(node: Node, term: Term, ascii_glyphs: bool = False, inner: Functor | None = None) -> str:
    def name(e: str) -> str:
        return GLYPH_ASCII.get(e, e) if ascii_glyphs else e

    if isinstance(term, UnitLeaf):
        return name(UNIT)
    if isinstance(node, Coprod):
        assert isinstance(term, Inj)
        branch = node.parts[term.index]
        if branch == Const((BOT,)):
            return name(BOT)
        return f"in{term.index}({print_term_for(branch, term.arg, ascii_glyphs, inner)})"
    if isinstance(node, Const):
        assert isinstance(term, ConstElem)
        return name(term.name)
    if isinstance(node, SortRef):
        if inner is not None:
            return print_term_for(inner.node(node.sort), term, ascii_glyphs, None)
        if isinstance(term, Var):
            return format_name(name(term.name))
        return _print_nested(term, ascii_glyphs)
    if isinstance(node, Prod):
        assert isinstance(term, TupleTerm)
        return "(" + ", ".join(
            print_term_for(p, a, ascii_glyphs, inner) for p, a in zip(node.parts, term.args)
        ) + ")"
    if isinstance(node, Analytic):
        from .functors import AnSym

        assert isinstance(term, AnSym)
        sym = node.symbol(term.sym)
        if not term.args:
            return term.sym
        return term.sym + "(" + ", ".join(
            print_term_for(SortRef(s), a, ascii_glyphs, inner) for s, a in zip(sym.slot_sorts, term.args)
        ) + ")"
    if isinstance(node, Pf):
        from .functors import SetOf

        assert isinstance(term, SetOf)
        return "{" + ", ".join(print_term_for(node.inner, a, ascii_glyphs, inner) for a in term.args) + "}"
    if isinstance(node, ComposeNode):
        return print_term_for(node.outer, term, ascii_glyphs, node.inner)
    raise CoalgError(f"cannot print {term!r} against {node!r}")


def _print_nested(term: Term, ascii_glyphs: bool) -> str:
    from .functors import print_term

    text = print_term(term)
    if ascii_glyphs:
        for glyph, alias in GLYPH_ASCII.items():
            text = text.replace(glyph, alias)
    return text


# ---------------------------------------------------------------------------
# Section splitting

@dataclass
class Section:
    name: str
    lines: list[tuple[int, str]]


def split_sections(text: str) -> dict[str, Section]:
    sections: dict[str, Section] = {}
    current: Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.strip().startswith("[") and line.strip().endswith("]"):
            name = line.strip()[1:-1].strip()
            if name in sections:
                raise ModelParseError(f"duplicate section [{name}]", lineno)
            current = Section(name, [])
            sections[name] = current
            continue
        if current is None:
            raise ModelParseError("content before the first section header", lineno)
        current.lines.append((lineno, line.strip()))
    return sections


def _parse_sorted_elems(section: Section, sorts: tuple[str, ...]) -> SortedSet:
    per_sort: dict[str, list[str]] = {s: [] for s in sorts}
    for lineno, line in section.lines:
        first, colon, rest = line.partition(":")
        if colon and first.strip() in sorts:
            sort = first.strip()
            names = rest.split()
        else:
            sort = sorts[0]
            names = line.split()
        for n in names:
            name = _alias(unquote_name(n))
            if name in per_sort[sort]:
                raise ModelParseError(f"duplicate element {name!r}", lineno)
            per_sort[sort].append(name)
    return SortedSet.make(per_sort, sorts)


def _sorted_key(name: str, carrier: SortedSet, lineno: int) -> tuple[str, str]:
    name = unquote_name(name)
    if "." in name:
        sort, elem = name.split(".", 1)
        if sort in carrier.sorts:
            if not carrier.has(sort, elem):
                raise ModelParseError(f"unknown element {elem!r} of sort {sort!r}", lineno)
            return (sort, elem)
    hits = [(s, name) for s in carrier.sorts if carrier.has(s, name)]
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise ModelParseError(f"unknown element {name!r}", lineno)
    raise ModelParseError(f"ambiguous element {name!r}; qualify as sort.elem", lineno)


# ---------------------------------------------------------------------------
# Coalgebra files

def _parse_functor_section(sections: dict[str, Section], sorts: tuple[str, ...]) -> Functor:
    section = sections.get("functor")
    if section is None:
        raise ModelParseError("missing [functor] section")
    if len(sorts) == 1 and all("=" not in line for _n, line in section.lines):
        text = " ".join(line for _n, line in section.lines)
        return functor(parse_functor_text(text, section.lines[0][0]))
    nodes: dict[str, Node] = {}
    for lineno, line in section.lines:
        if "=" not in line:
            raise ModelParseError("expected '<sort> = <functor>'", lineno)
        sort, expr = line.split("=", 1)
        sort = sort.strip()
        if sort not in sorts:
            raise ModelParseError(f"unknown sort {sort!r}", lineno)
        nodes[sort] = parse_functor_text(expr, lineno)
    missing = [s for s in sorts if s not in nodes]
    if missing:
        raise ModelParseError(f"no functor expression for sorts {missing}")
    return multisorted(sorts, nodes)


def parse_coalgebra(text: str) -> PointedCoalgebra:
    sections = split_sections(text)
    sorts = tuple(
        " ".join(line for _n, line in sections["sorts"].lines).split()
    ) if "sorts" in sections else (DEFAULT_SORT,)
    f = _parse_functor_section(sections, sorts)
    if "states" not in sections:
        raise ModelParseError("missing [states] section")
    carrier = _parse_sorted_elems(sections["states"], sorts)
    pointing = (
        _parse_sorted_elems(sections["pointing"], sorts)
        if "pointing" in sections
        else SortedSet.make({s: (["*"] if s == sorts[0] else []) for s in sorts}, sorts)
    )
    if "init" not in sections:
        raise ModelParseError("missing [init] section")
    point: dict[tuple[str, str], str] = {}
    for lineno, line in sections["init"].lines:
        if "->" in line:
            left, right = (x.strip() for x in line.split("->", 1))
        else:
            left, right = "*", line.strip()
        key = _sorted_key(left, pointing, lineno)
        target = _sorted_key(right, carrier, lineno)
        if key[0] != target[0]:
            raise ModelParseError("pointing must stay within its sort", lineno)
        if key in point:
            raise ModelParseError(f"duplicate pointing for {left!r}", lineno)
        point[key] = target[1]
    xi: dict[tuple[str, str], list[Term]] = {key: [] for key in carrier.pairs()}
    if "trans" in sections:
        for lineno, line in sections["trans"].lines:
            if "->" not in line:
                raise ModelParseError("expected 'state -> term'", lineno)
            left, right = line.split("->", 1)
            key = _sorted_key(left.strip(), carrier, lineno)
            term = parse_term_text(right.strip(), f.node(key[0]), carrier, lineno)
            xi[key].append(term)
    return PointedCoalgebra(
        f, pointing, carrier, point, {k: tuple(sorted(set(v))) for k, v in xi.items()}
    )


def print_coalgebra(c: PointedCoalgebra, ascii_glyphs: bool = False) -> str:
    lines = []
    multi = len(c.carrier.sorts) > 1
    if multi:
        lines.append("[sorts]")
        lines.append(" ".join(c.carrier.sorts))
        lines.append("")
    lines.append("[functor]")
    if multi:
        for s in c.functor.sorts:
            lines.append(f"{s} = {print_functor_node(c.functor.node(s), ascii_glyphs)}")
    else:
        lines.append(print_functor_node(c.functor.node(DEFAULT_SORT), ascii_glyphs))
    lines.append("")
    lines.append("[pointing]")
    for s in c.pointing.sorts:
        elems = c.pointing.elems(s)
        if elems:
            lines.append(f"{s} : {' '.join(elems)}" if multi else " ".join(elems))
    lines.append("")
    lines.append("[states]")
    for s in c.carrier.sorts:
        elems = [format_name(e) for e in c.carrier.elems(s)]
        if elems or not multi:
            lines.append(f"{s} : {' '.join(elems)}" if multi else " ".join(elems))
    lines.append("")
    lines.append("[init]")
    for (s, i) in c.pointing.pairs():
        left = f"{s}.{i}" if multi else format_name(i)
        right = f"{s}.{c.point[(s, i)]}" if multi else format_name(c.point[(s, i)])
        lines.append(f"{left} -> {right}")
    lines.append("")
    lines.append("[trans]")
    for (s, x) in c.carrier.pairs():
        for t in c.xi[(s, x)]:
            left = f"{s}.{x}" if multi else format_name(x)
            lines.append(f"{left} -> {print_term_for(c.functor.node(s), t, ascii_glyphs)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Path files

def parse_path(text: str) -> PathObj:
    sections = split_sections(text)
    sorts = tuple(
        " ".join(line for _n, line in sections["sorts"].lines).split()
    ) if "sorts" in sections else (DEFAULT_SORT,)
    f = _parse_functor_section(sections, sorts)
    pointing = (
        _parse_sorted_elems(sections["pointing"], sorts)
        if "pointing" in sections
        else SortedSet.make({s: (["*"] if s == sorts[0] else []) for s in sorts}, sorts)
    )
    if "levels" not in sections:
        raise ModelParseError("missing [levels] section")
    level_map: dict[int, SortedSet] = {}
    for lineno, line in sections["levels"].lines:
        if ":" not in line:
            raise ModelParseError("expected '<k> : elements'", lineno)
        idx_text, rest = line.split(":", 1)
        idx = int(idx_text.strip())
        pseudo = Section("level", [(lineno, rest.strip())] if rest.strip() else [])
        level_map[idx] = _parse_sorted_elems(pseudo, sorts)
    n = max(level_map.keys(), default=0)
    levels = []
    for k in range(n + 1):
        if k not in level_map:
            raise ModelParseError(f"missing level {k}")
        levels.append(level_map[k])
    fp1 = plus1(f)
    tables: list[dict[tuple[str, str], Term]] = [dict() for _ in range(n)]
    for lineno, line in sections.get("steps", Section("steps", [])).lines:
        if ":" not in line or "->" not in line:
            raise ModelParseError("expected '<k> : elem -> term'", lineno)
        idx_text, rest = line.split(":", 1)
        k = int(idx_text.strip())
        if not 0 <= k < n:
            raise ModelParseError(f"step index {k} out of range", lineno)
        left, right = rest.split("->", 1)
        key = _sorted_key(left.strip(), levels[k], lineno)
        term = parse_term_text(right.strip(), fp1.node(key[0]), levels[k + 1], lineno)
        tables[k][key] = term
    path = make_path(f, pointing, levels, tables)
    problems = validate_path(path)
    if problems:
        raise ModelParseError("invalid path: " + "; ".join(problems))
    return path


def print_path(p: PathObj, ascii_glyphs: bool = False) -> str:
    lines = ["[functor]", print_functor_node(p.functor.node(DEFAULT_SORT), ascii_glyphs), ""]
    lines.append("[pointing]")
    lines.append(" ".join(p.pointing.elems(DEFAULT_SORT)))
    lines.append("")
    lines.append("[levels]")
    for k, level in enumerate(p.levels):
        names = " ".join(format_name(e) for e in level.elems(DEFAULT_SORT))
        lines.append(f"{k} : {names}".rstrip())
    lines.append("")
    lines.append("[steps]")
    fp1 = p.plus1()
    for k, step in enumerate(p.steps):
        for (s, e) in p.levels[k].pairs():
            lines.append(f"{k} : {format_name(e)} -> {print_term_for(fp1.node(s), step(s, e), ascii_glyphs)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Carrier map files

def parse_map(text: str, dom: SortedSet, cod: SortedSet):
    from .sets import SortedFun

    sections = split_sections(text)
    if "map" not in sections:
        raise ModelParseError("missing [map] section")
    table: dict[tuple[str, str], str] = {}
    for lineno, line in sections["map"].lines:
        if "->" not in line:
            raise ModelParseError("expected 'x -> y'", lineno)
        left, right = (x.strip() for x in line.split("->", 1))
        key = _sorted_key(left, dom, lineno)
        target = _sorted_key(right, cod, lineno)
        if key[0] != target[0]:
            raise ModelParseError("map must preserve sorts", lineno)
        table[key] = target[1]
    return SortedFun(dom, cod, table)


# ---------------------------------------------------------------------------
# Precise-factorization problem files

@dataclass
class FactorProblem:
    functor: Functor
    domain: SortedSet
    codomain: SortedSet
    term_map: TermMap


def print_factor_problem(problem: FactorProblem, ascii_glyphs: bool = False) -> str:
    multi = len(problem.domain.sorts) > 1
    lines = []
    if multi:
        lines.extend(["[sorts]", " ".join(problem.domain.sorts), ""])
    lines.append("[functor]")
    if multi:
        for s in problem.functor.sorts:
            lines.append(f"{s} = {print_functor_node(problem.functor.node(s), ascii_glyphs)}")
    else:
        lines.append(print_functor_node(problem.functor.node(DEFAULT_SORT), ascii_glyphs))
    lines.append("")
    lines.append("[domain]")
    for s in problem.domain.sorts:
        elems = [format_name(e) for e in problem.domain.elems(s)]
        if elems or not multi:
            lines.append(f"{s} : {' '.join(elems)}" if multi else " ".join(elems))
    lines.append("")
    lines.append("[codomain]")
    for s in problem.codomain.sorts:
        elems = [format_name(e) for e in problem.codomain.elems(s)]
        if elems or not multi:
            lines.append(f"{s} : {' '.join(elems)}" if multi else " ".join(elems))
    lines.append("")
    lines.append("[map]")
    for (s, x) in problem.domain.pairs():
        left = f"{s}.{x}" if multi else format_name(x)
        lines.append(f"{left} -> {print_term_for(problem.functor.node(s), problem.term_map(s, x), ascii_glyphs)}")
    return "\n".join(lines) + "\n"


def parse_factor_problem(text: str) -> FactorProblem:
    sections = split_sections(text)
    sorts = tuple(
        " ".join(line for _n, line in sections["sorts"].lines).split()
    ) if "sorts" in sections else (DEFAULT_SORT,)
    f = _parse_functor_section(sections, sorts)
    if "domain" not in sections or "codomain" not in sections:
        raise ModelParseError("need [domain] and [codomain] sections")
    dom = _parse_sorted_elems(sections["domain"], sorts)
    cod = _parse_sorted_elems(sections["codomain"], sorts)
    table: dict[tuple[str, str], Term] = {}
    for lineno, line in sections.get("map", Section("map", [])).lines:
        if "->" not in line:
            raise ModelParseError("expected 'x -> term'", lineno)
        left, right = line.split("->", 1)
        key = _sorted_key(left.strip(), dom, lineno)
        table[key] = parse_term_text(right.strip(), f.node(key[0]), cod, lineno)
    return FactorProblem(f, dom, cod, TermMap(dom, TermSpace(f, cod), table))


# ---------------------------------------------------------------------------
# Category files

def parse_category(text: str) -> FiniteCategory:
    sections = split_sections(text)
    if "objects" not in sections:
        raise ModelParseError("missing [objects] section")
    objects = tuple(" ".join(line for _n, line in sections["objects"].lines).split())
    initial = objects[0]
    if "initial" in sections:
        initial = " ".join(line for _n, line in sections["initial"].lines).strip()
    morphisms: list[tuple[str, str, str]] = []
    for lineno, line in sections.get("morphisms", Section("m", [])).lines:
        m = re.fullmatch(r"(\S+)\s*:\s*(\S+)\s*->\s*(\S+)", line)
        if not m:
            raise ModelParseError("expected 'name : dom -> cod'", lineno)
        morphisms.append((m.group(1), m.group(2), m.group(3)))
    identities: dict[str, str] = {}
    for lineno, line in sections.get("identities", Section("i", [])).lines:
        m = re.fullmatch(r"(\S+)\s*:\s*(\S+)", line)
        if not m:
            raise ModelParseError("expected 'object : identity-name'", lineno)
        identities[m.group(1)] = m.group(2)
    comp: dict[tuple[str, str], str] = {}
    for lineno, line in sections.get("composition", Section("c", [])).lines:
        m = re.fullmatch(r"(\S+)\s+o\s+(\S+)\s*=\s*(\S+)", line)
        if not m:
            raise ModelParseError("expected 'g o f = h'", lineno)
        comp[(m.group(1), m.group(2))] = m.group(3)
    return FiniteCategory(objects, tuple(morphisms), identities, comp, initial)


def print_category(cat: FiniteCategory) -> str:
    lines = ["[objects]", " ".join(cat.objects), "", "[initial]", cat.initial, "", "[morphisms]"]
    for (name, d, c) in sorted(cat.morphisms):
        lines.append(f"{name} : {d} -> {c}")
    lines.append("")
    lines.append("[identities]")
    for obj in cat.objects:
        lines.append(f"{obj} : {cat.identities[obj]}")
    lines.append("")
    lines.append("[composition]")
    for (g, f), h in sorted(cat.comp.items()):
        lines.append(f"{g} o {f} = {h}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Register-automaton files

def parse_rnna(text: str) -> RnnaPresentation:
    sections = split_sections(text)
    if "states" not in sections:
        raise ModelParseError("missing [states] section")
    states: dict[str, int] = {}
    for lineno, line in sections["states"].lines:
        for chunk in line.split():
            m = re.fullmatch(r"(\S+)/(\d+)", chunk)
            if not m:
                raise ModelParseError("expected 'name/registers'", lineno)
            states[m.group(1)] = int(m.group(2))
    if "init" not in sections:
        raise ModelParseError("missing [init] section")
    init = " ".join(line for _n, line in sections["init"].lines).strip()
    rules: list[RnnaRule] = []
    for lineno, line in sections.get("rules", Section("r", [])).lines:
        m = re.fullmatch(r"(\S+)\s*->\s*ok", line)
        if m:
            rules.append(RnnaRule("ok", m.group(1)))
            continue
        m = re.fullmatch(r"(\S+)\s*->\s*bar\s+(\S+)\s*\[([^\]]*)\]", line)
        if m:
            sigma = tuple(int(x) for x in m.group(3).split())
            rules.append(RnnaRule("bind", m.group(1), m.group(2), sigma=sigma))
            continue
        m = re.fullmatch(r"(\S+)\s*->\s*reg\((\d+)\)\s+(\S+)\s*\[([^\]]*)\]", line)
        if m:
            sigma = tuple(int(x) for x in m.group(4).split())
            rules.append(RnnaRule("read", m.group(1), m.group(3), register=int(m.group(2)), sigma=sigma))
            continue
        raise ModelParseError("unrecognized rule", lineno)
    return RnnaPresentation(states, init, tuple(rules))


def print_rnna(r: RnnaPresentation) -> str:
    lines = ["[states]", " ".join(f"{q}/{n}" for q, n in sorted(r.states.items())), "", "[init]", r.init, "", "[rules]"]
    for rule in r.rules:
        if rule.kind == "ok":
            lines.append(f"{rule.src} -> ok")
        elif rule.kind == "bind":
            lines.append(f"{rule.src} -> bar {rule.target} [{' '.join(str(j) for j in rule.sigma)}]")
        else:
            lines.append(
                f"{rule.src} -> reg({rule.register}) {rule.target} [{' '.join(str(j) for j in rule.sigma)}]"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Kind dispatch

def parse_model(text: str):
    """Parse any model file, dispatching on the sections present."""
    sections = split_sections(text)
    if "levels" in sections:
        return parse_path(text)
    if "objects" in sections:
        return parse_category(text)
    if "rules" in sections or ("states" in sections and "trans" not in sections and "init" in sections
                               and any("/" in line for _n, line in sections["states"].lines)):
        return parse_rnna(text)
    if "domain" in sections:
        return parse_factor_problem(text)
    return parse_coalgebra(text)


def print_model(obj, ascii_glyphs: bool = False) -> str:
    """Canonical serialization; ``parse_model . print_model`` is the identity."""
    if isinstance(obj, PointedCoalgebra):
        return print_coalgebra(obj, ascii_glyphs)
    if isinstance(obj, PathObj):
        return print_path(obj, ascii_glyphs)
    if isinstance(obj, FiniteCategory):
        return print_category(obj)
    if isinstance(obj, RnnaPresentation):
        return print_rnna(obj)
    raise CoalgError(f"cannot serialize {type(obj).__name__}")
