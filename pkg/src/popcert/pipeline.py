"""End-to-end certification: analysis modes, certificates, final checks.

The analyzer runs in three modes.  "direct" orients the rules themselves
with the plain order (no argument filtering).  "dp" splits the system into
dependency pairs plus usable rules and orients the whole pair set at once.
"dg" walks the congruence graph and discharges one obligation set per path,
where only the last class must decrease strictly.

A certificate records everything needed to replay the proof without any
search: the class paths, the usable-rule indices, the interpretation
weights, and the order parameters.  recheck() is the replay.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from . import __version__
from .dp import (
    DependencyPair,
    congruence_paths,
    estimate_graph,
    pair_signature,
    tpwidp,
    usable_rules,
    widp,
)
from .orders import (
    OrderParams,
    is_admissible,
    orient,
    params_from_text,
    params_to_text,
    validate_params,
)
from .rewriting import FuelExhausted, derivation_length, runtime_complexity_samples
from .sli import SLIWeights, check_compat
from .sli import synthesize as sli_synthesize
from .synth import ObligationSet
from .synth import synthesize as order_synthesize
from .terms import App, Term, Var, size, subterms, var_multiplicities
from .trs import TRS, SortDecl

VERDICT_POLYNOMIAL = "polynomial-innermost-runtime"
VERDICT_MAYBE = "maybe"
CERTIFICATE_VERSION = 1
_TOOL = f"popcert {__version__}"


class MalformedCertificate(ValueError):
    pass


# ---------------------------------------------------------------------------
# Analysis


@dataclass(frozen=True)
class AnalysisConfig:
    mode: str = "dg"
    tp_pairs: bool = False
    backend: str = "internal"
    solver_path: Optional[str] = None
    path_timeout_s: float = 5.0
    timeout_s: float = 60.0
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("direct", "dp", "dg"):
            raise ValueError(f"unknown analysis mode {self.mode!r}")


@dataclass(frozen=True)
class PathRecord:
    """One discharged obligation group: a class path plus its witnesses.

    classes holds pair indices per congruence class, the last class strict;
    in direct mode it is a single group of rule indices.  usables are rule
    indices.
    """

    classes: tuple[tuple[int, ...], ...]
    usables: tuple[int, ...]
    sli: SLIWeights
    params: OrderParams

    def label(self) -> str:
        return " -> ".join(",".join(str(i) for i in cls) for cls in self.classes)


@dataclass(frozen=True)
class EmpiricalReport:
    """Measured derivation lengths and the growth diagnosis drawn from them."""

    samples: tuple[tuple[int, int], ...]
    exponent: float
    superpoly: bool
    flagged: bool
    fuel_exhausted: bool
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Certificate:
    verdict: str
    mode: str
    tp_pairs: bool
    paths: tuple[PathRecord, ...]
    diagnostics: tuple[str, ...] = ()
    polytime: bool = False
    empirical: Optional[EmpiricalReport] = None
    version: int = CERTIFICATE_VERSION
    tool: str = _TOOL


def _pairs_for(trs: TRS, tp: bool) -> list[DependencyPair]:
    return tpwidp(trs) if tp else widp(trs)


class _PathFailure(Exception):
    pass


def _duplicating_pairs(pairs: Sequence[DependencyPair]) -> list[int]:
    out = []
    for p in pairs:
        left = var_multiplicities(p.lhs)
        right = var_multiplicities(p.rhs)
        if any(n > left.get(v, 0) for v, n in right.items()):
            out.append(p.index)
    return out


def _solve_path(
    trs: TRS,
    pairs: Sequence[DependencyPair],
    classes: tuple[tuple[int, ...], ...],
    cfg: AnalysisConfig,
    deadline: float,
) -> PathRecord:
    by_index = {p.index: p for p in pairs}
    label = " -> ".join(",".join(str(i) for i in cls) for cls in classes)
    chosen = [by_index[i] for cls in classes for i in cls]
    if time.monotonic() > deadline:
        raise _PathFailure(f"path {label}: timed out")
    usable = usable_rules(chosen, trs)
    weights = sli_synthesize(usable)
    if weights is None:
        raise _PathFailure(
            f"path {label}: no strongly linear interpretation for the usable rules"
        )
    if time.monotonic() > deadline:
        raise _PathFailure(f"path {label}: timed out")
    strict = tuple(by_index[i].as_rule() for i in classes[-1])
    weak = tuple(by_index[i].as_rule() for cls in classes[:-1] for i in cls) + usable
    obls = ObligationSet(
        strict=strict,
        weak=weak,
        signature=pair_signature(trs, pairs),
        safe_filtering=True,
    )
    params = order_synthesize(
        obls,
        backend=cfg.backend,
        solver_path=cfg.solver_path,
        timeout_s=max(0.01, deadline - time.monotonic()),
    )
    if params is None:
        raise _PathFailure(f"path {label}: no compatible order parameters")
    return PathRecord(classes, tuple(r.index for r in usable), weights, params)


def analyze(trs: TRS, config: Optional[AnalysisConfig] = None) -> Certificate:
    cfg = config or AnalysisConfig()
    hard_deadline = time.monotonic() + cfg.timeout_s

    def maybe(*diags: str) -> Certificate:
        return Certificate(VERDICT_MAYBE, cfg.mode, cfg.tp_pairs, (), tuple(diags))

    def polynomial(records: Iterable[PathRecord]) -> Certificate:
        return Certificate(VERDICT_POLYNOMIAL, cfg.mode, cfg.tp_pairs, tuple(records))

    if cfg.mode == "direct":
        if not trs.rules:
            return polynomial(())
        if not trs.is_constructor_trs():
            return maybe(
                "not a constructor system: a left-hand side argument "
                "contains a defined symbol"
            )
        obls = ObligationSet(
            strict=trs.rules, signature=trs.signature, identity_filtering=True
        )
        params = order_synthesize(
            obls,
            backend=cfg.backend,
            solver_path=cfg.solver_path,
            timeout_s=min(cfg.path_timeout_s, cfg.timeout_s),
        )
        if params is None:
            return maybe("no compatible order for the rules")
        record = PathRecord(
            (tuple(r.index for r in trs.rules),), (), SLIWeights({}), params
        )
        return polynomial((record,))

    pairs = _pairs_for(trs, cfg.tp_pairs)
    if not pairs:
        return polynomial(())
    dups = _duplicating_pairs(pairs)
    if dups:
        listed = " ".join(str(i) for i in dups)
        return maybe(f"dependency pairs duplicate variables: {listed}")
    if cfg.mode == "dp":
        class_paths = [(tuple(p.index for p in pairs),)]
    else:
        graph = estimate_graph(pairs, trs)
        class_paths = [cp.nodes for cp in congruence_paths(graph)]

    def run(classes: tuple[tuple[int, ...], ...]) -> PathRecord:
        deadline = min(time.monotonic() + cfg.path_timeout_s, hard_deadline)
        return _solve_path(trs, pairs, classes, cfg, deadline)

    records: list[Optional[PathRecord]] = [None] * len(class_paths)
    failures: list[str] = []
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(run, classes) for classes in class_paths]
            for i, fut in enumerate(futures):
                try:
                    records[i] = fut.result()
                except _PathFailure as e:
                    failures.append(str(e))
    else:
        for i, classes in enumerate(class_paths):
            if time.monotonic() > hard_deadline:
                failures.append("analysis timed out")
                break
            try:
                records[i] = run(classes)
            except _PathFailure as e:
                failures.append(str(e))
    if failures:
        return maybe(*failures)
    return polynomial([r for r in records if r is not None])


# ---------------------------------------------------------------------------
# Replay


def _recheck_record(
    record: PathRecord, trs: TRS, pairs: Sequence[DependencyPair]
) -> bool:
    by_index = {p.index: p for p in pairs}
    for cls in record.classes:
        for i in cls:
            if i not in by_index:
                raise MalformedCertificate(f"unknown pair index {i}")
    chosen = [by_index[i] for cls in record.classes for i in cls]
    usable = usable_rules(chosen, trs)
    if tuple(r.index for r in usable) != record.usables:
        return False
    if not check_compat(record.sli, usable):
        return False
    strict = tuple(by_index[i].as_rule() for i in record.classes[-1])
    weak = (
        tuple(by_index[i].as_rule() for cls in record.classes[:-1] for i in cls)
        + usable
    )
    obls = ObligationSet(
        strict=strict,
        weak=weak,
        signature=pair_signature(trs, pairs),
        safe_filtering=True,
    )
    params = record.params
    if params.guard != obls.guard():
        return False
    if validate_params(params, obls.occurring(), safe_filtering=True):
        return False
    if not is_admissible(params.prec, guard=params.guard):
        return False
    if not orient(strict, params, mode="strict").ok:
        return False
    return orient(weak, params, mode="weak").ok


def recheck(certificate: Certificate, trs: TRS) -> bool:
    """Replay a certificate.  Nothing is searched; every claim is re-derived."""
    if certificate.verdict == VERDICT_MAYBE:
        return True
    if certificate.verdict != VERDICT_POLYNOMIAL:
        raise MalformedCertificate(f"unknown verdict {certificate.verdict!r}")

    if certificate.mode == "direct":
        if not trs.rules:
            return not certificate.paths
        if len(certificate.paths) != 1:
            raise MalformedCertificate("a direct certificate carries one record")
        if not trs.is_constructor_trs():
            return False
        record = certificate.paths[0]
        if record.classes != (tuple(r.index for r in trs.rules),):
            return False
        if record.usables or record.sli.weight:
            return False
        params = record.params
        if params.filtering.pi:
            return False  # the direct mode never filters
        obls = ObligationSet(
            strict=trs.rules, signature=trs.signature, identity_filtering=True
        )
        if params.guard != obls.guard():
            return False
        if validate_params(params, obls.occurring()):
            return False
        if not is_admissible(params.prec, guard=params.guard):
            return False
        return orient(trs.rules, params, mode="strict").ok

    if certificate.mode not in ("dp", "dg"):
        raise MalformedCertificate(f"unknown mode {certificate.mode!r}")
    pairs = _pairs_for(trs, certificate.tp_pairs)
    if not pairs:
        return not certificate.paths
    if _duplicating_pairs(pairs):
        return False
    if certificate.mode == "dp":
        expected = {(tuple(p.index for p in pairs),)}
    else:
        graph = estimate_graph(pairs, trs)
        expected = {cp.nodes for cp in congruence_paths(graph)}
    got = [record.classes for record in certificate.paths]
    if len(got) != len(set(got)) or set(got) != expected:
        return False
    return all(_recheck_record(record, trs, pairs) for record in certificate.paths)


# ---------------------------------------------------------------------------
# Certificate text


def _yesno(flag: bool) -> str:
    return "yes" if flag else "no"


def certificate_to_text(certificate: Certificate) -> str:
    lines = [f"popcert-certificate {certificate.version}"]
    lines.append(f"tool {certificate.tool}")
    lines.append(f"verdict {certificate.verdict}")
    lines.append(f"mode {certificate.mode}")
    lines.append(f"pairs {'tpwidp' if certificate.tp_pairs else 'widp'}")
    lines.append(f"polytime {_yesno(certificate.polytime)}")
    for note in certificate.diagnostics:
        if "\n" in note:
            raise ValueError("diagnostic spans several lines")
        lines.append(f"note {note}")
    lines.append(f"paths {len(certificate.paths)}")
    for record in certificate.paths:
        lines.append("path")
        lines.append(
            "classes "
            + " | ".join(" ".join(str(i) for i in cls) for cls in record.classes)
        )
        lines.append(("usables " + " ".join(str(i) for i in record.usables)).rstrip())
        for name in sorted(record.sli.weight):
            lines.append(f"weight {name} {record.sli.weight[name]}")
        lines.append("params")
        lines.extend(params_to_text(record.params).splitlines())
        lines.append("end-params")
        lines.append("end-path")
    if certificate.empirical is not None:
        rep = certificate.empirical
        lines.append("empirical")
        for n, d in rep.samples:
            lines.append(f"sample {n} {d}")
        lines.append(f"exponent {rep.exponent!r}")
        lines.append(f"superpoly {_yesno(rep.superpoly)}")
        lines.append(f"flagged {_yesno(rep.flagged)}")
        lines.append(f"fuel-exhausted {_yesno(rep.fuel_exhausted)}")
        for note in rep.notes:
            if "\n" in note:
                raise ValueError("note spans several lines")
            lines.append(f"note {note}")
        lines.append("end-empirical")
    lines.append("end-certificate")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self) -> str:
        line = self.peek()
        if line is None:
            raise MalformedCertificate("unexpected end of certificate")
        self.pos += 1
        return line

    def expect(self, keyword: str) -> str:
        line = self.next()
        if line != keyword and not line.startswith(keyword + " "):
            raise MalformedCertificate(f"expected {keyword!r}, found {line!r}")
        return line[len(keyword):].strip()


def _parse_flag(text: str, what: str) -> bool:
    if text == "yes":
        return True
    if text == "no":
        return False
    raise MalformedCertificate(f"bad {what} flag {text!r}")


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split())
    except ValueError:
        raise MalformedCertificate(f"bad index list {text!r}") from None


def _read_path_block(r: _Reader) -> PathRecord:
    r.expect("path")
    class_text = r.expect("classes")
    classes = tuple(_parse_ints(part) for part in class_text.split(" | "))
    if not classes or any(not cls for cls in classes):
        raise MalformedCertificate(f"bad class path {class_text!r}")
    usables = _parse_ints(r.expect("usables"))
    weights: dict[str, int] = {}
    while r.peek() is not None and r.peek().startswith("weight "):
        parts = r.next().split()
        if len(parts) != 3:
            raise MalformedCertificate(f"bad weight line {parts!r}")
        try:
            weights[parts[1]] = int(parts[2])
        except ValueError:
            raise MalformedCertificate(f"bad weight for {parts[1]}") from None
    r.expect("params")
    body: list[str] = []
    while True:
        line = r.next()
        if line == "end-params":
            break
        body.append(line)
    try:
        params = params_from_text("\n".join(body) + "\n")
    except ValueError as e:
        raise MalformedCertificate(f"bad order parameters: {e}") from None
    r.expect("end-path")
    return PathRecord(classes, usables, SLIWeights(weights), params)


def _read_empirical_block(r: _Reader) -> EmpiricalReport:
    r.expect("empirical")
    samples: list[tuple[int, int]] = []
    while r.peek() is not None and r.peek().startswith("sample "):
        nums = _parse_ints(r.next()[len("sample "):])
        if len(nums) != 2:
            raise MalformedCertificate("a sample line carries size and length")
        samples.append((nums[0], nums[1]))
    exp_text = r.expect("exponent")
    try:
        exponent = float(exp_text)
    except ValueError:
        raise MalformedCertificate(f"bad exponent {exp_text!r}") from None
    superpoly = _parse_flag(r.expect("superpoly"), "superpoly")
    flagged = _parse_flag(r.expect("flagged"), "flagged")
    fuel = _parse_flag(r.expect("fuel-exhausted"), "fuel-exhausted")
    notes: list[str] = []
    while r.peek() is not None and r.peek().startswith("note "):
        notes.append(r.next()[len("note "):])
    r.expect("end-empirical")
    return EmpiricalReport(
        tuple(samples), exponent, superpoly, flagged, fuel, tuple(notes)
    )


def certificate_from_text(text: str) -> Certificate:
    r = _Reader(text)
    head = r.expect("popcert-certificate")
    try:
        version = int(head)
    except ValueError:
        raise MalformedCertificate(f"bad version {head!r}") from None
    if version != CERTIFICATE_VERSION:
        raise MalformedCertificate(f"unsupported certificate version {version}")
    tool = r.expect("tool")
    verdict = r.expect("verdict")
    if verdict not in (VERDICT_POLYNOMIAL, VERDICT_MAYBE):
        raise MalformedCertificate(f"unknown verdict {verdict!r}")
    mode = r.expect("mode")
    if mode not in ("direct", "dp", "dg"):
        raise MalformedCertificate(f"unknown mode {mode!r}")
    pair_kind = r.expect("pairs")
    if pair_kind not in ("widp", "tpwidp"):
        raise MalformedCertificate(f"unknown pair kind {pair_kind!r}")
    polytime = _parse_flag(r.expect("polytime"), "polytime")
    notes: list[str] = []
    while r.peek() is not None and r.peek().startswith("note "):
        notes.append(r.next()[len("note "):])
    count_text = r.expect("paths")
    try:
        count = int(count_text)
    except ValueError:
        raise MalformedCertificate(f"bad path count {count_text!r}") from None
    paths = tuple(_read_path_block(r) for _ in range(count))
    empirical = None
    if r.peek() == "empirical":
        empirical = _read_empirical_block(r)
    r.expect("end-certificate")
    if r.peek() is not None:
        raise MalformedCertificate(f"trailing material {r.peek()!r}")
    return Certificate(
        verdict=verdict,
        mode=mode,
        tp_pairs=(pair_kind == "tpwidp"),
        paths=paths,
        diagnostics=tuple(notes),
        polytime=polytime,
        empirical=empirical,
        version=version,
        tool=tool,
    )


# ---------------------------------------------------------------------------
# Sorted signatures and the extra feasibility conditions


@dataclass(frozen=True)
class SortedSignatureInfo:
    sorts: tuple[str, ...]
    decls: Mapping[str, SortDecl]
    ranks: Optional[Mapping[str, int]]


def _constructor_decls(
    decls: Mapping[str, SortDecl], defined: frozenset[str]
) -> dict[str, SortDecl]:
    return {n: d for n, d in decls.items() if n not in defined}


def _scc_components(n: int, edges: set[tuple[int, int]]) -> list[int]:
    """Tarjan over a tiny graph; returns a component id per node."""
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in sorted(edges):
        succ[a].append(b)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    comps = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if ei < len(succ[v]):
                work[-1] = (v, ei + 1)
                w = succ[v][ei]
                if index[w] == -1:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp[w] = comps
                        if w == v:
                            break
                    comps += 1
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
    return comp


def _ranks_witness(cons: Mapping[str, SortDecl], ranks: Mapping[str, int]) -> bool:
    for decl in cons.values():
        if decl.sort not in ranks:
            return False
        top = ranks[decl.sort]
        equal = 0
        for s in decl.arg_sorts:
            if s not in ranks or ranks[s] > top:
                return False
            if ranks[s] == top:
                equal += 1
        if equal > 1:
            return False
    return True


def _simplicity_ranks(
    decls: Mapping[str, SortDecl], defined: frozenset[str]
) -> Optional[dict[str, int]]:
    """Rank sorts so every constructor strictly lowers all but one argument.

    Arg-to-result edges force rank(arg) <= rank(result); a cycle forces
    equality, so a constructor with two arguments in the result's component
    admits no witness.  Otherwise the component condensation depth works.
    """
    cons = _constructor_decls(decls, defined)
    sorts = sorted(
        {d.sort for d in decls.values()}
        | {s for d in decls.values() for s in d.arg_sorts}
    )
    idx = {s: i for i, s in enumerate(sorts)}
    edges = {(idx[a], idx[d.sort]) for d in cons.values() for a in d.arg_sorts}
    comp = _scc_components(len(sorts), edges)
    for decl in cons.values():
        same = sum(1 for a in decl.arg_sorts if comp[idx[a]] == comp[idx[decl.sort]])
        if same > 1:
            return None
    depth: dict[int, int] = {}

    def comp_depth(c: int) -> int:
        if c in depth:
            return depth[c]
        preds = {comp[a] for a, b in edges if comp[b] == c and comp[a] != c}
        depth[c] = 1 + max((comp_depth(p) for p in preds), default=-1)
        return depth[c]

    ranks = {s: comp_depth(comp[idx[s]]) for s in sorts}
    if not _ranks_witness(cons, ranks):  # defensive; the construction is exact
        return None
    return ranks


def sorted_info_from(trs: TRS) -> SortedSignatureInfo:
    decls = dict(trs.sort_decls)
    sorts = tuple(trs.sorts) or tuple(
        sorted(
            {d.sort for d in decls.values()}
            | {s for d in decls.values() for s in d.arg_sorts}
        )
    )
    ranks = _simplicity_ranks(decls, trs.defined) if decls else None
    return SortedSignatureInfo(sorts=sorts, decls=decls, ranks=ranks)


def _typecheck(
    t: Term, expected: str, decls: Mapping[str, SortDecl], env: dict[int, str]
) -> bool:
    if isinstance(t, Var):
        if t.id in env:
            return env[t.id] == expected
        env[t.id] = expected
        return True
    decl = decls.get(t.sym.name)
    if decl is None or decl.sort != expected or len(decl.arg_sorts) != len(t.args):
        return False
    return all(_typecheck(a, s, decls, env) for a, s in zip(t.args, decl.arg_sorts))


def _check_sorted(trs: TRS, decls: Mapping[str, SortDecl]) -> Optional[str]:
    for rule in trs.rules:
        decl = decls[rule.root()]
        env: dict[int, str] = {}
        if not (
            _typecheck(rule.lhs, decl.sort, decls, env)
            and _typecheck(rule.rhs, decl.sort, decls, env)
        ):
            return f"rules are not sort-correct: rule {rule.index}"
    return None


def _shift_vars(t: Term, offset: int) -> Term:
    if isinstance(t, Var):
        return Var(t.id + offset)
    return App(t.sym, tuple(_shift_vars(a, offset) for a in t.args))


def _unifiable(a: Term, b: Term) -> bool:
    subst: dict[int, Term] = {}

    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t.id in subst:
            t = subst[t.id]
        return t

    def occurs(v: int, t: Term) -> bool:
        stack = [t]
        while stack:
            u = walk(stack.pop())
            if isinstance(u, Var):
                if u.id == v:
                    return True
            else:
                stack.extend(u.args)
        return False

    work = [(a, b)]
    while work:
        s, t = work.pop()
        s, t = walk(s), walk(t)
        if isinstance(s, Var) and isinstance(t, Var) and s.id == t.id:
            continue
        if isinstance(s, Var):
            if occurs(s.id, t):
                return False
            subst[s.id] = t
        elif isinstance(t, Var):
            if occurs(t.id, s):
                return False
            subst[t.id] = s
        else:
            if s.sym != t.sym:
                return False
            work.extend(zip(s.args, t.args))
    return True


def _max_var(t: Term) -> int:
    best = -1
    for u in subterms(t):
        if isinstance(u, Var):
            best = max(best, u.id)
    return best


def _find_overlap(trs: TRS) -> Optional[tuple[int, int]]:
    """Two left-hand sides meeting at a non-variable position, renamed apart.

    A rule never overlaps itself at the root, but a root meeting between
    distinct rules counts, as does a proper self-overlap.
    """
    for r1 in trs.rules:
        for r2 in trs.rules:
            offset = max(_max_var(r1.lhs), _max_var(r2.lhs)) + 1
            other = _shift_vars(r2.lhs, offset)
            for k, u in enumerate(subterms(r1.lhs)):
                if isinstance(u, Var):
                    continue
                if r1.index == r2.index and k == 0:
                    continue
                if _unifiable(u, other):
                    return (r1.index, r2.index)
    return None


def _inhabited_sorts(cons: Mapping[str, SortDecl]) -> frozenset[str]:
    done: set[str] = set()
    changed = True
    while changed:
        changed = False
        for decl in cons.values():
            if decl.sort not in done and all(s in done for s in decl.arg_sorts):
                done.add(decl.sort)
                changed = True
    return frozenset(done)


def _covers(
    patterns: list[tuple[Term, ...]],
    col_sorts: list[str],
    cons_by_sort: Mapping[str, list[tuple[str, SortDecl]]],
    inhabited: frozenset[str],
) -> bool:
    if any(s not in inhabited for s in col_sorts):
        return True  # no ground instance exists, nothing to cover
    if any(all(isinstance(x, Var) for x in p) for p in patterns):
        return True
    if not patterns:
        return False
    j = next(
        i for i in range(len(col_sorts)) if any(isinstance(p[i], App) for p in patterns)
    )
    for name, decl in cons_by_sort.get(col_sorts[j], []):
        new_sorts = col_sorts[:j] + list(decl.arg_sorts) + col_sorts[j + 1:]
        new_patterns: list[tuple[Term, ...]] = []
        for p in patterns:
            x = p[j]
            if isinstance(x, Var):
                spread = tuple(Var(0) for _ in decl.arg_sorts)
                new_patterns.append(p[:j] + spread + p[j + 1:])
            elif x.sym.name == name:
                new_patterns.append(p[:j] + x.args + p[j + 1:])
        if not _covers(new_patterns, new_sorts, cons_by_sort, inhabited):
            return False
    return True


def _completely_defined(trs: TRS, decls: Mapping[str, SortDecl]) -> Optional[str]:
    cons = _constructor_decls(decls, trs.defined)
    cons_by_sort: dict[str, list[tuple[str, SortDecl]]] = {}
    for name in sorted(cons):
        cons_by_sort.setdefault(cons[name].sort, []).append((name, cons[name]))
    inhabited = _inhabited_sorts(cons)
    bad = []
    for f in sorted(trs.defined):
        decl = decls[f]
        patterns = [tuple(r.lhs.args) for r in trs.rules if r.root() == f]
        if not _covers(patterns, list(decl.arg_sorts), cons_by_sort, inhabited):
            bad.append(f)
    if bad:
        return "not completely defined: " + " ".join(bad)
    return None


@dataclass(frozen=True)
class PolytimeReport:
    added: bool
    reasons: tuple[str, ...]
    passed: tuple[str, ...]
    failed: tuple[str, ...]
    skipped: tuple[str, ...]


def check_polytime(
    trs: TRS, info: SortedSignatureInfo, certificate: Certificate
) -> PolytimeReport:
    """Decide whether the polynomial-time claim may be added to a certificate.

    The conditions verified here: the certificate is a polynomial pair-mode
    certificate, every symbol carries a sort declaration, the rules are
    sort-correct, the sorted signature admits a rank witness, the system is
    an orthogonal constructor system, and every defined symbol covers all
    well-sorted value arguments.  Conditions that need sort declarations are
    skipped when declarations are missing.
    """
    passed: list[str] = []
    failed: list[str] = []
    skipped: list[str] = []
    reasons: list[str] = []

    def record(cond: str, reason: Optional[str]) -> None:
        if reason is None:
            passed.append(cond)
        else:
            failed.append(cond)
            reasons.append(reason)

    cert_ok = certificate.verdict == VERDICT_POLYNOMIAL and certificate.mode in (
        "dp",
        "dg",
    )
    record(
        "certificate",
        None
        if cert_ok
        else "certificate is not a polynomial dependency-pair certificate",
    )

    if not info.decls:
        decl_reason: Optional[str] = "no sort declarations given"
    else:
        missing = sorted(n for n in trs.signature if n not in info.decls)
        decl_reason = (
            "missing sort declarations: " + " ".join(missing) if missing else None
        )
    record("declarations", decl_reason)

    constructor_ok = trs.is_constructor_trs()
    record("constructor", None if constructor_ok else "not a constructor system")

    linear = trs.is_left_linear()
    if not linear:
        ortho_reason: Optional[str] = (
            "not orthogonal: a left-hand side repeats a variable"
        )
    else:
        overlap = _find_overlap(trs)
        ortho_reason = (
            f"not orthogonal: rules {overlap[0]} and {overlap[1]} overlap"
            if overlap
            else None
        )
    record("orthogonal", ortho_reason)

    if decl_reason is None:
        record("sorted", _check_sorted(trs, info.decls))
        record(
            "simple",
            None
            if info.ranks is not None
            and _ranks_witness(_constructor_decls(info.decls, trs.defined), info.ranks)
            else "signature is not simple: no rank witness exists",
        )
        if constructor_ok and linear:
            record("completely-defined", _completely_defined(trs, info.decls))
        else:
            skipped.append("completely-defined")
    else:
        skipped.extend(["sorted", "simple", "completely-defined"])

    return PolytimeReport(
        added=not failed,
        reasons=tuple(reasons),
        passed=tuple(passed),
        failed=tuple(failed),
        skipped=tuple(skipped),
    )


# ---------------------------------------------------------------------------
# Empirical validation


def _fit_exponent(samples: Sequence[tuple[int, int]]) -> float:
    pts = [(math.log(n), math.log(d)) for n, d in samples if n >= 1 and d >= 1]
    if len(pts) < 2:
        return 0.0
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    den = sum((x - mx) ** 2 for x, _ in pts)
    if den == 0:
        return 0.0
    return sum((x - mx) * (y - my) for x, y in pts) / den


def _doubling_flag(samples: Sequence[tuple[int, int]], threshold: float) -> bool:
    """Growth looks at least geometric when the consecutive-size ratios hold
    the threshold on a long enough suffix (three or more, sizes from 4 up)."""
    by_size = dict(samples)
    ratios: list[float] = []
    for n, d in sorted(by_size.items()):
        if n >= 4 and d >= 1 and (n + 1) in by_size:
            ratios.append(by_size[n + 1] / d)
    run = 0
    for r in reversed(ratios):
        if r >= threshold:
            run += 1
        else:
            break
    return run >= 3


def empirical_validate(
    trs: TRS,
    certificate: Optional[Certificate] = None,
    max_size: int = 12,
    fuel: int = 100_000,
    starts: Optional[Sequence[Term]] = None,
    exponent_threshold: float = 4.0,
    ratio_threshold: float = 1.5,
) -> EmpiricalReport:
    """Measure innermost derivation lengths and compare against the verdict.

    Without explicit start terms the envelope runs over all ground basic
    terms up to max_size.  The report flags growth whose fitted log-log
    exponent exceeds the threshold or whose doubling ratios look geometric.
    """
    notes: list[str] = []
    fuel_hit = False
    if starts is not None:
        by_size: dict[int, int] = {}
        for t in starts:
            try:
                d = derivation_length(trs, t, fuel=fuel)
            except FuelExhausted:
                fuel_hit = True
                notes.append(f"fuel exhausted on a start term of size {size(t)}")
                continue
            n = size(t)
            by_size[n] = max(by_size.get(n, 0), d)
        best = 0
        samples = []
        for n in sorted(by_size):
            best = max(best, by_size[n])
            samples.append((n, best))
    else:
        report = runtime_complexity_samples(trs, max_size, fuel=fuel, on_fuel="stop")
        samples = list(report["samples"])
        fuel_hit = bool(report["fuel_exhausted"])
        if fuel_hit:
            notes.append("fuel exhausted; the sample envelope is truncated")
    exponent = _fit_exponent(samples)
    superpoly = _doubling_flag(samples, ratio_threshold)
    flagged = superpoly or exponent > exponent_threshold
    if flagged and certificate is not None and certificate.verdict == VERDICT_POLYNOMIAL:
        notes.append("measurements contradict the polynomial verdict")
    return EmpiricalReport(
        samples=tuple((n, d) for n, d in samples),
        exponent=exponent,
        superpoly=superpoly,
        flagged=flagged,
        fuel_exhausted=fuel_hit,
        notes=tuple(notes),
    )
