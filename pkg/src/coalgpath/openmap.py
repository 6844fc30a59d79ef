"""Open-map checking, reachability, and the randomized theorem harness.

Openness is checked through one-step path extensions.  A square with a
length-difference of one is determined by the state reached at the last
level, the precise shape chosen for the extension and the target-side
instantiation of the fresh variables, so the check runs over
(reachable state, shape, instantiation) triples; squares between
equal-length paths need no check because all path-morphism components
are bijections, and longer differences compose from single steps.  Each
failure is materialized back into an explicit square witness that can be
replayed against an exhaustive diagonal search.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .coalgebra import (
    CoalgMorphism,
    GenSpec,
    PointedCoalgebra,
    is_strict_hom,
    random_coalgebra,
)
from .functors import Functor, Term, Var, bot_of_plus1, fmap, occurrences, step_of_plus1
from .paths import PathObj, Run, is_run, make_path, validate_path
from .precise import element_shapes
from .sets import CoalgError, SortedFun, SortedSet


# ---------------------------------------------------------------------------
# Reachability

def reachable_bfs(c: PointedCoalgebra) -> tuple[list[set[tuple[str, str]]], set[tuple[str, str]]]:
    """Breadth-first levels from the pointing and their union.

    Level k+1 collects every carrier element occurring in a transition
    term of a level-k state.  Iteration stops at the first empty or
    previously seen level; the union is the least subcoalgebra carrier.
    """
    level = set(c.point_image())
    levels = [level]
    union = set(level)
    while True:
        nxt: set[tuple[str, str]] = set()
        for (s, x) in level:
            for t in c.xi[(s, x)]:
                for var, _path in occurrences(c.functor.node(s), t):
                    nxt.add((var.sort, var.name))
        if not nxt or nxt in levels:
            break
        levels.append(nxt)
        union |= nxt
        level = nxt
        if len(levels) > c.carrier.size() + 1:
            break
    return levels, union


def is_reachable_no_proper_sub(c: PointedCoalgebra) -> bool:
    """No proper subcoalgebra: the BFS union is the whole carrier."""
    _levels, union = reachable_bfs(c)
    return union == set(c.carrier.pairs())


def _viable_sets(c: PointedCoalgebra, depth: int) -> list[set[tuple[str, str]]]:
    """viable[j]: states admitting a bottom-free run continuation of j steps."""
    all_states = set(c.carrier.pairs())
    viable = [all_states]
    for _ in range(depth):
        prev = viable[-1]
        nxt = set()
        for (s, x) in all_states:
            for t in c.xi[(s, x)]:
                occ = {(v.sort, v.name) for v, _p in occurrences(c.functor.node(s), t)}
                if occ <= prev:
                    nxt.add((s, x))
                    break
        viable.append(nxt)
    return viable


def run_reachable_states(c: PointedCoalgebra, depth: int, allow_bot: bool = True) -> set[tuple[str, str]]:
    """States in the image of some run of length at most ``depth``.

    With the added point allowed, siblings of a branch can always stop,
    so this is exactly the BFS union.  Without it every level element
    must keep stepping, so a state counts as reached at level k only if
    the whole level can be extended: the chain to it must branch through
    transition terms all of whose occurrences stay viable long enough.
    """
    point_img = set(c.point_image())
    if allow_bot:
        levels, union = reachable_bfs(c)
        covered = set()
        for k, level in enumerate(levels):
            if k <= depth:
                covered |= level
        return covered
    viable = _viable_sets(c, depth)
    covered: set[tuple[str, str]] = set()
    for k in range(depth + 1):
        # every pointing image is a level-0 element and must survive k steps
        if not point_img <= viable[k]:
            continue
        layer = set(point_img)
        for j in range(k):
            budget = k - j - 1
            nxt: set[tuple[str, str]] = set()
            for (s, x) in layer:
                for t in c.xi[(s, x)]:
                    occ = {(v.sort, v.name) for v, _p in occurrences(c.functor.node(s), t)}
                    if occ <= viable[budget]:
                        nxt |= occ
            layer = nxt
        covered |= layer
    return covered


def is_path_reachable(c: PointedCoalgebra, allow_bot: bool = True) -> bool:
    """Joint surjectivity of all runs of length up to the carrier size."""
    covered = run_reachable_states(c, c.carrier.size(), allow_bot)
    return covered == set(c.carrier.pairs())


# ---------------------------------------------------------------------------
# Open-map checking

@dataclass
class SquareWitness:
    """A commuting square with no diagonal filler."""

    path: PathObj
    run: Run
    extension: PathObj
    dst_run: Run


@dataclass
class OpenCheckReport:
    verdict: str  # "open" | "not-open"
    bound: int
    reason: str = ""
    lax_violation: tuple | None = None  # ((sort, state), term) breaking laxness
    witness: SquareWitness | None = None

    @property
    def is_open(self) -> bool:
        return self.verdict == "open"


def is_open(m: CoalgMorphism, bound: int) -> OpenCheckReport:
    """Check openness of a lax morphism against path extensions up to ``bound``.

    A map that is not even a lax morphism is reported not-open with the
    offending transition: it is not a morphism of the system category,
    so no square lifting discipline applies to it.
    """
    src, dst = m.src, m.dst
    if not m.preserves_pointing():
        return OpenCheckReport("not-open", bound, reason="map does not preserve the pointing")
    for (s, x) in src.states():
        for t in src.xi[(s, x)]:
            image = fmap(src.functor, m.map, s, t)
            if image not in dst.xi[(s, m.map(s, x))]:
                return OpenCheckReport(
                    "not-open", bound, reason="not a lax homomorphism",
                    lax_violation=((s, x), t),
                )
    levels, _union = reachable_bfs(src)
    functor = src.functor
    checked: set[tuple[str, str]] = set()
    for level_index, level in enumerate(levels):
        if level_index >= bound:
            break
        for (s, v) in sorted(level - checked):
            checked.add((s, v))
            for shape in element_shapes(functor, s):
                fresh_vars = sorted(
                    {(var.sort, var.name) for var, _p in occurrences(functor.node(s), shape)}
                )
                pools = [dst.carrier.elems(vs) for vs, _vn in fresh_vars]
                if any(not pool for pool in pools):
                    continue
                for combo in itertools.product(*pools):
                    phi = dict(zip(fresh_vars, combo))
                    target = _instantiate(functor, s, shape, phi)
                    if target not in dst.xi[(s, m.map(s, v))]:
                        continue
                    if not _has_lift(m, s, v, shape, fresh_vars, phi):
                        witness = _materialize_witness(m, levels, level_index, (s, v), shape, fresh_vars, phi)
                        return OpenCheckReport(
                            "not-open", bound,
                            reason=f"no lift at state {v} for shape {shape!r}",
                            witness=witness,
                        )
    return OpenCheckReport("open", bound)


def _instantiate(functor: Functor, sort: str, shape: Term, phi: dict) -> Term:
    from .functors import subst_node

    sigma = {key: Var(key[0], name) for key, name in phi.items()}
    return subst_node(functor.node(sort), shape, sigma)


def _has_lift(m: CoalgMorphism, sort: str, v: str, shape: Term, fresh_vars: list, phi: dict) -> bool:
    src = m.src
    pools = []
    for (vs, vn) in fresh_vars:
        target = phi[(vs, vn)]
        pool = [x for x in src.carrier.elems(vs) if m.map(vs, x) == target]
        if not pool:
            return False
        pools.append(pool)
    for combo in itertools.product(*pools):
        psi = dict(zip(fresh_vars, combo))
        candidate = _instantiate(src.functor, sort, shape, psi)
        if candidate in src.xi[(sort, v)]:
            return True
    return False


def _chain_to_state(
    src: PointedCoalgebra, levels: list[set[tuple[str, str]]], level_index: int, state: tuple[str, str]
) -> list:
    """A transition chain from a pointing image to ``state``, one entry
    ((sort, state), term) per step, ending with the bare target."""
    chain: list = [state]
    front = state
    for k in range(level_index, 0, -1):
        parent = None
        for (s, x) in sorted(levels[k - 1]):
            for t in src.xi[(s, x)]:
                occ = {(v.sort, v.name) for v, _p in occurrences(src.functor.node(s), t)}
                if front in occ:
                    parent = ((s, x), t)
                    break
            if parent is not None:
                break
        if parent is None:
            raise CoalgError("internal error: breadth-first chain broken")
        chain.insert(0, parent)
        front = parent[0]
    return chain


def _run_reaching(src: PointedCoalgebra, chain: list) -> tuple[PathObj, Run, tuple[str, str]]:
    """A run whose last level hits the chain's target, padding all other
    branches with the added point."""
    from .functors import rebuild_with_fresh

    functor = src.functor
    pointing = src.pointing
    target0 = chain[0][0] if len(chain) > 1 else chain[0]
    current = None
    for (s, i) in pointing.pairs():
        if (s, src.point[(s, i)]) == target0:
            current = (s, i)
            break
    if current is None:
        raise CoalgError("internal error: chain does not start at the pointing")
    levels_built = [pointing]
    comps = [SortedFun(pointing, src.carrier, dict(src.point))]
    step_tables: list[dict] = []
    for j in range(len(chain) - 1):
        (st, t) = chain[j]
        nxt_state = chain[j + 1][0] if j + 1 < len(chain) - 1 else chain[j + 1]
        cur_level = levels_built[-1]
        occ_values: list[tuple[str, str]] = []

        def fresh(var: Var, _path) -> Var:
            occ_values.append((var.sort, var.name))
            return Var(var.sort, f"n{len(occ_values) - 1:03d}")

        relabelled = rebuild_with_fresh(functor.node(st[0]), t, fresh)
        per_sort: dict[str, list[str]] = {s: [] for s in pointing.sorts}
        comp_table: dict[tuple[str, str], str] = {}
        next_elem = None
        for i, (vs, value) in enumerate(occ_values):
            name = f"n{i:03d}"
            per_sort[vs].append(name)
            comp_table[(vs, name)] = value
            if next_elem is None and (vs, value) == nxt_state:
                next_elem = (vs, name)
        next_level = SortedSet.make(per_sort, pointing.sorts)
        table = {key: bot_of_plus1() for key in cur_level.pairs()}
        table[current] = step_of_plus1(relabelled)
        step_tables.append(table)
        levels_built.append(next_level)
        comps.append(SortedFun(next_level, src.carrier, comp_table))
        if next_elem is None:
            raise CoalgError("internal error: chain successor not among occurrences")
        current = next_elem
    path = make_path(functor, pointing, levels_built, step_tables)
    return path, Run(path, src, tuple(comps)), current


def _materialize_witness(
    m: CoalgMorphism,
    levels: list[set[tuple[str, str]]],
    level_index: int,
    state: tuple[str, str],
    shape: Term,
    fresh_vars: list,
    phi: dict,
) -> SquareWitness:
    """Rebuild an explicit square from the failing triple: a padded run
    reaching the state, extended by the shape at that element."""
    src, dst = m.src, m.dst
    chain = _chain_to_state(src, levels, level_index, state)
    path, run, hit = _run_reaching(src, chain)
    fp1_space_carrier: dict[str, list[str]] = {s: [] for s in src.pointing.sorts}
    rename = {}
    for i, (vs, vn) in enumerate(fresh_vars):
        fresh_name = f"w{i:03d}"
        fp1_space_carrier[vs].append(fresh_name)
        rename[(vs, vn)] = fresh_name
    new_level = SortedSet.make(fp1_space_carrier, src.pointing.sorts)
    table = {}
    for key in path.levels[-1].pairs():
        if key == hit:
            sigma = {k: Var(k[0], rename[k]) for k in rename}
            from .functors import subst_node

            table[key] = step_of_plus1(subst_node(src.functor.node(key[0]), shape, sigma))
        else:
            table[key] = bot_of_plus1()
    extension = make_path(
        src.functor,
        src.pointing,
        list(path.levels) + [new_level],
        [st.table for st in path.steps] + [table],
    )
    y_components = [
        SortedFun(
            path.levels[k],
            dst.carrier,
            {key: m.map(key[0], comp_k(*key)) for key in path.levels[k].pairs()},
        )
        for k, comp_k in enumerate(run.components)
    ]
    y_last = SortedFun(new_level, dst.carrier, {(vs, rename[(vs, vn)]): phi[(vs, vn)] for (vs, vn) in fresh_vars})
    dst_run = Run(extension, dst, tuple(y_components) + (y_last,))
    return SquareWitness(path, run, extension, dst_run)


def replay_witness(m: CoalgMorphism, w: SquareWitness) -> bool:
    """True when the witness square commutes and no diagonal exists."""
    if validate_path(w.path) or validate_path(w.extension):
        return False
    if not is_run(w.run) or not is_run(w.dst_run):
        return False
    n = w.path.length
    if w.extension.length != n + 1 or w.extension.levels[: n + 1] != w.path.levels:
        return False
    for k in range(n + 1):
        for key in w.path.levels[k].pairs():
            if m.map(key[0], w.run.components[k](*key)) != w.dst_run.components[k](*key):
                return False
    last_level = w.extension.levels[-1]
    pools = [
        [x for x in m.src.carrier.elems(s) if m.map(s, x) == w.dst_run.components[-1](s, e)]
        for (s, e) in last_level.pairs()
    ]
    keys = list(last_level.pairs())
    for combo in itertools.product(*pools):
        x_last = SortedFun(last_level, m.src.carrier, dict(zip(keys, combo)))
        candidate = Run(w.extension, m.src, tuple(w.run.components) + (x_last,))
        if is_run(candidate):
            return False  # a diagonal exists after all
    return True


# ---------------------------------------------------------------------------
# Theorem harness

@dataclass
class TrialResult:
    index: int
    passed: bool
    clauses: list[str] = field(default_factory=list)
    witness_lines: list[str] = field(default_factory=list)


@dataclass
class HarnessReport:
    results: list[TrialResult]
    trials: int

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            detail = f" {'; '.join(r.clauses)}" if r.clauses else ""
            out.append(f"trial {r.index}: {status}{detail}")
            if not r.passed:
                out.extend(f"  {line}" for line in r.witness_lines)
        out.append(f"{'all passed' if self.all_passed else 'FAILURES'} ({self.trials} trials)")
        return out


def serialize_witness(w: SquareWitness) -> list[str]:
    """Line rendering of a counterexample square."""
    from .functors import plus1
    from .modelio import print_term_for

    fp1 = plus1(w.extension.functor)
    lines = [f"square: path length {w.path.length}, extension length {w.extension.length}"]
    for k, step in enumerate(w.extension.steps):
        for (s, e) in w.extension.levels[k].pairs():
            run_note = ""
            if k < len(w.run.components):
                run_note = f"  [src {w.run.components[k](s, e)} -> dst {w.dst_run.components[k](s, e)}]"
            lines.append(f"{k} : {e} -> {print_term_for(fp1.node(s), step(s, e))}{run_note}")
    last = w.dst_run.components[-1]
    for (s, e) in w.extension.levels[-1].pairs():
        lines.append(f"{w.extension.length} : {e} [dst {last(s, e)}, no source lift]")
    return lines


def _quotient_map(rng: random.Random, src: PointedCoalgebra, classes: int) -> tuple[PointedCoalgebra, SortedFun]:
    """Merge states into randomly chosen classes; the projection is lax."""
    assignment: dict[tuple[str, str], str] = {}
    class_names: dict[str, list[str]] = {s: [] for s in src.carrier.sorts}
    for s in src.carrier.sorts:
        elems = src.carrier.elems(s)
        n_classes = max(1, min(classes, len(elems))) if elems else 0
        for i in range(n_classes):
            class_names[s].append(f"c{i}")
        for x in elems:
            assignment[(s, x)] = class_names[s][rng.randrange(n_classes)]
    used: dict[str, list[str]] = {
        s: sorted({assignment[(s, x)] for x in src.carrier.elems(s)}) for s in src.carrier.sorts
    }
    carrier = SortedSet.make(used, src.carrier.sorts)
    fun = SortedFun(src.carrier, carrier, assignment)
    point = {(s, i): assignment[(s, src.point[(s, i)])] for s, i in src.pointing.pairs()}
    xi: dict[tuple[str, str], set] = {key: set() for key in carrier.pairs()}
    for (s, x), terms in src.xi.items():
        for t in terms:
            xi[(s, assignment[(s, x)])].add(fmap(src.functor, fun, s, t))
    dst = PointedCoalgebra(
        src.functor, src.pointing, carrier, point, {k: tuple(sorted(v)) for k, v in xi.items()}
    )
    return dst, fun


def _add_noise(rng: random.Random, c: PointedCoalgebra, amount: int) -> PointedCoalgebra:
    from .functors import eval_functor

    terms = eval_functor(c.functor, c.carrier)
    xi = {k: set(v) for k, v in c.xi.items()}
    keys = sorted(xi.keys())
    for _ in range(amount):
        if not keys:
            break
        key = keys[rng.randrange(len(keys))]
        pool = terms[key[0]]
        if pool:
            xi[key].add(pool[rng.randrange(len(pool))])
    return PointedCoalgebra(
        c.functor, c.pointing, c.carrier, dict(c.point), {k: tuple(sorted(v)) for k, v in xi.items()}
    )


def _random_map(rng: random.Random, src: PointedCoalgebra, dst: PointedCoalgebra) -> SortedFun:
    table = {}
    for (s, x) in src.carrier.pairs():
        pool = dst.carrier.elems(s)
        table[(s, x)] = pool[rng.randrange(len(pool))]
    for (s, i) in src.pointing.pairs():
        table[(s, src.point[(s, i)])] = dst.point[(s, i)]
    return SortedFun(src.carrier, dst.carrier, table)


def verify_theorems(spec: GenSpec, trials: int, check_traces: bool = False) -> HarnessReport:
    """Per trial: strict => open, open and path-reachable => strict,
    path-reachable <=> no proper subcoalgebra, and the dual-bound guard.

    Sources are repaired to path-reachable form by restriction to the
    BFS union, so both theorem directions are exercised in every trial.
    """
    if trials < 1:
        raise CoalgError("at least one trial required")
    seed_rng = random.Random(spec.seed)
    subseeds = [seed_rng.randrange(2**63) for _ in range(trials)]
    results: list[TrialResult] = []
    for index in range(trials):
        try:
            results.append(_run_trial(spec, index, subseeds[index], check_traces))
        except CoalgError as exc:  # a red report, never a crash
            results.append(TrialResult(index, False, [f"internal error: {exc}"]))
    return HarnessReport(results, trials)


def _run_trial(spec: GenSpec, index: int, subseed: int, check_traces: bool) -> TrialResult:
    rng = random.Random(subseed)
    clauses: list[str] = []
    passed = True
    sizes = {s: max(1, rng.randint(1, n)) if n else 0 for s, n in spec.sizes.items()}
    raw = random_coalgebra(
        GenSpec(spec.functor, sizes, spec.density, rng.randrange(2**63), spec.pointing)
    )
    # (c) the two reachability notions agree on the unrepaired source
    pr = is_path_reachable(raw)
    nps = is_reachable_no_proper_sub(raw)
    if pr != nps:
        passed = False
        clauses.append(f"reachability mismatch: path={pr} sub={nps}")
    _levels, union = reachable_bfs(raw)
    src = raw.restrict(union) if union != set(raw.carrier.pairs()) else raw
    style = index % 3
    if style == 0:
        dst, fun = _quotient_map(rng, src, classes=max(1, src.carrier.size() - 1))
    elif style == 1:
        dst0, fun = _quotient_map(rng, src, classes=max(1, src.carrier.size()))
        dst = _add_noise(rng, dst0, amount=2)
    else:
        dst = random_coalgebra(
            GenSpec(spec.functor, sizes, spec.density, rng.randrange(2**63), spec.pointing)
        )
        fun = _random_map(rng, src, dst)
    m = CoalgMorphism(src, dst, fun)
    strict = is_strict_hom(m)
    bound = src.carrier.size() + 1
    report = is_open(m, bound)
    witness_lines: list[str] = []
    if strict and not report.is_open:
        passed = False
        clauses.append("strict hom reported not-open")
        if report.witness is not None:
            witness_lines = serialize_witness(report.witness)
    if report.is_open and not strict:
        passed = False
        clauses.append("open map on path-reachable source is not strict")
    report_hi = is_open(m, src.carrier.size() + 3)
    if report.verdict != report_hi.verdict:
        passed = False
        clauses.append(f"bound guard: {report.verdict} at {bound} vs {report_hi.verdict}")
    if report.witness is not None and not replay_witness(m, report.witness):
        passed = False
        clauses.append("witness does not replay")
    if check_traces and report.is_open:
        from .trace import trace_equiv

        if not trace_equiv(src, dst, bound):
            passed = False
            clauses.append("open map does not preserve traces")
    return TrialResult(index, passed, clauses, witness_lines)
