"""Region planning: validate directives in context and prepare codegen inputs.

One RegionPlan is produced per top-level `parallel` / `parallel for`
construct. Worksharing and synchronization directives found inside a
parallel block are attached to the owning plan; everything else is a
diagnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic, DiagnosticError, error, fail, warning
from .frontend import (
    ClauseSet,
    DeclInfo,
    LocatedPragma,
    LoopHeader,
    PragmaDirective,
    StructuredBlock,
    TranslationUnit,
    parse_canonical_loop,
)

MAX_CORES = 8


def clamp_fork_width(
    requested: Optional[int],
    diags: list[Diagnostic],
    line_index: int = 0,
    default: int = MAX_CORES,
) -> int:
    """Resolve a num_threads request to the [1, 8] width the cluster offers."""
    if requested is None:
        return default
    if requested <= 0:
        raise fail(line_index + 1, f"num_threads({requested}) must be positive")
    if requested > MAX_CORES:
        diags.append(
            warning(
                line_index + 1,
                f"num_threads({requested}) exceeds the {MAX_CORES}-core cluster; clamped to {MAX_CORES}",
            )
        )
        return MAX_CORES
    return requested


def iteration_count(loop: LoopHeader, lb: int, ub: int) -> int:
    """Trip count of a canonical loop for concrete bounds.

    Matches the arithmetic emitted into generated prologues: ceiling
    division for `<`, inclusive span for `<=`, negative spans clamp to 0.
    """
    step = int(loop.step)
    if step <= 0:
        raise ValueError("step must be strictly positive")
    span = ub - lb + (1 if loop.comparison == "<=" else 0)
    return max(0, -(-span // step))


def static_partition(n: int, p: int, core: int) -> tuple[int, int]:
    """Half-open iteration-index range [start, end) owned by `core`.

    Contiguous block schedule: the first n mod p cores get one extra
    iteration, so range lengths differ by at most one.
    """
    if n < 0 or not (1 <= p <= MAX_CORES) or not (0 <= core < p):
        raise ValueError("static_partition arguments out of range")
    q, r = divmod(n, p)
    start = core * q + min(core, r)
    length = q + 1 if core < r else q
    return start, start + length


@dataclass(frozen=True)
class VarPlan:
    shared: tuple[tuple[str, DeclInfo], ...] = ()
    privates: tuple[tuple[str, DeclInfo], ...] = ()
    reductions: tuple[tuple[str, str, DeclInfo], ...] = ()  # (op, name, decl)

    def names(self) -> set[str]:
        return (
            {n for n, _ in self.shared}
            | {n for n, _ in self.privates}
            | {n for _, n, _ in self.reductions}
        )


@dataclass(frozen=True)
class InnerDirective:
    directive: PragmaDirective
    block: StructuredBlock
    loop: Optional[LoopHeader] = None


@dataclass(frozen=True)
class RegionPlan:
    index: int
    kind: str  # "parallel" | "parallel_for"
    fork_width: int
    worker_name: str
    master_name: str
    record_name: str
    record_type: str
    l1_name: str
    vars: VarPlan
    loop: Optional[LoopHeader]
    block: StructuredBlock
    inner_directives: tuple[InnerDirective, ...]
    enclosing_function: str
    pragma_line: int
    pragma_span: int


@dataclass
class PlanResult:
    plans: list[RegionPlan]
    diagnostics: list[Diagnostic]
    scratch: dict[str, str] = field(default_factory=dict)

    @property
    def has_errors(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


class NameAllocator:
    """Deterministic fresh-name source; never returns a taken identifier."""

    def __init__(self, taken: frozenset[str] | set[str]):
        self._taken = set(taken)

    def fresh(self, base: str) -> str:
        name = base
        suffix = 1
        while name in self._taken:
            name = f"{base}_{suffix}"
            suffix += 1
        self._taken.add(name)
        return name


def _resolve_decl(
    unit: TranslationUnit, func: str, ident: str
) -> Optional[DeclInfo]:
    info = unit.declarations.get((func, ident))
    if info is None:
        info = unit.declarations.get(("", ident))
    return info


def classify_variables(
    clauses: ClauseSet,
    unit: TranslationUnit,
    func: str,
    line_index: int,
    loop: Optional[LoopHeader] = None,
    extra: tuple[ClauseSet, ...] = (),
    extra_loops: tuple[LoopHeader, ...] = (),
) -> VarPlan:
    """Resolve clause identifiers (plus induction variables) to typed groups."""
    private_names: list[str] = list(clauses.private_vars)
    shared_names: list[str] = list(clauses.shared_vars)
    reduction_pairs: list[tuple[str, str]] = list(clauses.reductions)
    for cs in extra:
        for ident in cs.private_vars:
            if ident not in private_names:
                private_names.append(ident)
        for pair in cs.reductions:
            if pair not in reduction_pairs:
                reduction_pairs.append(pair)

    induction: list[tuple[str, Optional[str]]] = []
    for lh in (loop, *extra_loops):
        if lh is not None and lh.var not in [v for v, _ in induction]:
            induction.append((lh.var, lh.decl_type))
    for var, _ in induction:
        if var not in private_names:
            private_names.append(var)
        if var in shared_names or var in [n for _, n in reduction_pairs]:
            raise fail(line_index + 1, f"loop variable '{var}' cannot be shared or reduced")

    red_names = [n for _, n in reduction_pairs]
    for ident in private_names:
        if ident in shared_names or ident in red_names:
            raise fail(line_index + 1, f"'{ident}' appears in more than one data-sharing class")
    for ident in shared_names:
        if ident in red_names:
            raise fail(line_index + 1, f"'{ident}' appears in more than one data-sharing class")

    inline_types = {v: t for v, t in induction if t is not None}

    def resolve(ident: str, allow_array: bool) -> DeclInfo:
        if ident in inline_types:
            return DeclInfo(base=inline_types[ident])
        info = _resolve_decl(unit, func, ident)
        if info is None:
            raise fail(line_index + 1, f"cannot resolve type of '{ident}'")
        if info.is_array and not allow_array:
            raise fail(
                line_index + 1,
                f"array '{ident}' cannot be listed in a clause; make it global instead",
            )
        return info

    shared = tuple((n, resolve(n, allow_array=False)) for n in shared_names)
    privates = tuple((n, resolve(n, allow_array=False)) for n in private_names)
    reductions = tuple((op, n, resolve(n, allow_array=False)) for op, n in reduction_pairs)
    return VarPlan(shared=shared, privates=privates, reductions=reductions)


_SCRATCH_BASES = (
    "__args",
    "__core",
    "__lb",
    "__step",
    "__count",
    "__width",
    "__quota",
    "__rem",
    "__begin",
    "__finish",
    "__slot",
)


def _validate_inner_clauses(d: PragmaDirective) -> None:
    cs = d.clauses
    line = d.line_index + 1
    if d.kind in ("critical", "single") and not cs.is_empty():
        raise fail(line, f"'{d.kind}' does not accept clauses")
    if d.kind == "for":
        if cs.num_threads is not None:
            raise fail(line, "num_threads is only valid on a parallel construct")
        if cs.shared_vars:
            raise fail(line, "shared is only valid on a parallel construct")


@dataclass
class _OpenRegion:
    pragma: LocatedPragma
    inner: list[InnerDirective] = field(default_factory=list)
    # extents of inner blocks in which further directives are restricted
    critical_until: int = -1
    single_until: int = -1


def plan_regions(
    unit: TranslationUnit,
    default_width: int = MAX_CORES,
    serial_fallback: bool = False,
) -> PlanResult:
    """Build one RegionPlan per parallel construct, attaching inner directives."""
    diags: list[Diagnostic] = []
    plans: list[RegionPlan] = []
    alloc = NameAllocator(unit.identifiers)

    def reject(lp: LocatedPragma, exc: DiagnosticError) -> None:
        if serial_fallback:
            lp.elided = True
            d = exc.diagnostic
            diags.append(warning(d.line, d.message + " [kept sequential]"))
        else:
            diags.append(exc.diagnostic)

    current: Optional[_OpenRegion] = None
    pending: list[_OpenRegion] = []

    for lp in unit.pragmas:
        if lp.elided or lp.directive is None or lp.block is None:
            continue
        d = lp.directive
        if current is not None and lp.line_index > current.pragma.block.end_line:
            pending.append(current)
            current = None
        try:
            if d.kind in ("parallel", "parallel_for"):
                if current is not None:
                    raise fail(d.line_index + 1, "nested parallel regions are unsupported")
                if unit.function_at(lp.line_index) is None:
                    raise fail(d.line_index + 1, "parallel region outside any function")
                current = _OpenRegion(pragma=lp)
                if d.kind == "parallel_for":
                    # surfaces non-canonical loops right away
                    parse_canonical_loop(unit, lp.block.start_line)
            else:
                if current is None:
                    raise fail(d.line_index + 1, f"orphaned '{d.kind}' outside a parallel region")
                _validate_inner_clauses(d)
                if lp.line_index <= current.critical_until:
                    raise fail(d.line_index + 1, f"'{d.kind}' may not nest inside 'critical'")
                if lp.line_index <= current.single_until and d.kind in ("for", "single"):
                    raise fail(d.line_index + 1, f"'{d.kind}' may not nest inside 'single'")
                if current.pragma.directive.kind == "parallel_for" and d.kind in (
                    "for",
                    "single",
                ):
                    raise fail(
                        d.line_index + 1,
                        f"'{d.kind}' may not nest inside a 'parallel for' loop",
                    )
                loop = None
                if d.kind == "for":
                    loop = parse_canonical_loop(unit, lp.block.start_line)
                if d.kind == "critical":
                    current.critical_until = max(current.critical_until, lp.block.end_line)
                elif d.kind == "single":
                    current.single_until = max(current.single_until, lp.block.end_line)
                current.inner.append(InnerDirective(directive=d, block=lp.block, loop=loop))
        except DiagnosticError as exc:
            reject(lp, exc)
            if d.kind in ("parallel", "parallel_for") and current is not None:
                if current.pragma is lp:
                    current = None
    if current is not None:
        pending.append(current)

    for region in pending:
        lp = region.pragma
        d = lp.directive
        try:
            func = unit.function_at(lp.line_index)
            loop = None
            if d.kind == "parallel_for":
                loop = parse_canonical_loop(unit, lp.block.start_line)
            width = clamp_fork_width(
                d.clauses.num_threads, diags, d.line_index, default=default_width
            )
            vars_plan = classify_variables(
                d.clauses,
                unit,
                func.name if func else "",
                d.line_index,
                loop=loop,
                extra=tuple(i.directive.clauses for i in region.inner),
                extra_loops=tuple(i.loop for i in region.inner if i.loop is not None),
            )
            index = len(plans)
            record_name = alloc.fresh(f"__omp_region{index}_args")
            plans.append(
                RegionPlan(
                    index=index,
                    kind=d.kind,
                    fork_width=width,
                    worker_name=alloc.fresh(f"__omp_region{index}_worker"),
                    master_name=alloc.fresh(f"__omp_region{index}_master"),
                    record_name=record_name,
                    record_type=alloc.fresh(f"{record_name}_t"),
                    l1_name=alloc.fresh(f"{record_name}_l1"),
                    vars=vars_plan,
                    loop=loop,
                    block=lp.block,
                    inner_directives=tuple(region.inner),
                    enclosing_function=func.name if func else "",
                    pragma_line=lp.line_index,
                    pragma_span=lp.n_lines,
                )
            )
        except DiagnosticError as exc:
            reject(lp, exc)
            for inner in region.inner:
                for cand in unit.pragmas:
                    if cand.line_index == inner.directive.line_index:
                        cand.elided = cand.elided or serial_fallback

    scratch = {base: alloc.fresh(base) for base in _SCRATCH_BASES}
    red_vars = sorted({n for p in plans for _, n, _ in p.vars.reductions})
    for name in red_vars:
        scratch[f"__red_{name}"] = alloc.fresh(f"__red_{name}")
        scratch[f"__partials_{name}"] = alloc.fresh(f"__partials_{name}")
    return PlanResult(plans=plans, diagnostics=diags, scratch=scratch)
