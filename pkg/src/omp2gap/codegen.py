"""Emission of GAP8-SDK-style C from a planned translation unit.

The output file keeps the original includes at the top, inserts the
runtime header plus one generated block (record types, forward
declarations, workers, masters), and replaces each pragma site with
copy-in / send-task / wait / copy-back orchestration.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .diagnostics import Diagnostic, DiagnosticError, fail, warning
from .frontend import (
    IDENT_RE,
    LoopHeader,
    StructuredBlock,
    TranslationUnit,
    build_shadows,
    parse_pragmas,
    scan_source,
)
from .planner import InnerDirective, PlanResult, RegionPlan, plan_regions

IND = "    "
SHIM_HEADER = "gap_shim.h"
_OMP_INCLUDE_RE = re.compile(r'^\s*#\s*include\s*[<"]\s*omp\.h\s*[>"]')
_THREAD_NUM_RE = re.compile(r"\bomp_get_thread_num\s*\(\s*\)")
_NUM_THREADS_RE = re.compile(r"\bomp_get_num_threads\s*\(\s*\)")


@dataclass(frozen=True)
class EmittedFile:
    path: str
    contents: str


@dataclass(frozen=True)
class LifecyclePlan:
    width: int
    start_before: int  # 0-based line index; CLUSTER_Start goes before it
    stop_before: int  # 0-based line index; CLUSTER_Stop goes before it
    tight: bool  # anchors coincide with the first/last region site


@dataclass
class TranslateOptions:
    outdir: str = "output"
    cores: int = 8
    serial_fallback: bool = False
    emit_l1: bool = False
    strict_paper_paths: bool = False


def _indent_of(line: str) -> str:
    return line[: len(line) - len(line.lstrip())].replace("\t", IND) if line.strip() else ""


def _rewrite_spans(text: str, shadow: str, mapping: dict[str, str], suppressed: set[str],
                   thread_repl: str, nthreads_repl: str) -> tuple[str, bool, bool]:
    """Apply identifier and omp-call substitutions; returns (text, used_map, used_nthreads)."""
    spans: list[tuple[int, int, str, bool, bool]] = []
    for m in _THREAD_NUM_RE.finditer(shadow):
        spans.append((m.start(), m.end(), thread_repl, False, False))
    for m in _NUM_THREADS_RE.finditer(shadow):
        spans.append((m.start(), m.end(), nthreads_repl, False, True))
    for m in IDENT_RE.finditer(shadow):
        name = m.group(0)
        if name in ("omp_get_thread_num", "omp_get_num_threads"):
            continue
        if name not in mapping or name in suppressed:
            continue
        k = m.start() - 1
        while k >= 0 and shadow[k] in " \t":
            k -= 1
        if k >= 0 and (shadow[k] == "." or (shadow[k] == ">" and k > 0 and shadow[k - 1] == "-")):
            continue
        spans.append((m.start(), m.end(), mapping[name], True, False))
    spans.sort(key=lambda s: s[0])
    out: list[str] = []
    last = 0
    used_map = False
    used_nthreads = False
    for start, end, repl, is_map, is_nthr in spans:
        out.append(text[last:start])
        out.append(repl)
        last = end
        used_map = used_map or is_map
        used_nthreads = used_nthreads or is_nthr
    out.append(text[last:])
    return "".join(out), used_map, used_nthreads


class _RegionRewriter:
    """Token rewriting for one region: shared vars to record fields,
    reduction vars to core-local accumulators, omp_* calls to shim calls."""

    def __init__(self, plan: RegionPlan, unit: TranslationUnit, scratch: dict[str, str],
                 diags: list[Diagnostic]):
        self.plan = plan
        self.unit = unit
        self.scratch = scratch
        self.diags = diags
        args = scratch["__args"]
        self.mapping: dict[str, str] = {}
        for name, _ in plan.vars.shared:
            self.mapping[name] = f"{args}->{name}"
        for _, name, _ in plan.vars.reductions:
            self.mapping[name] = scratch[f"__red_{name}"]
        self.nthreads_repl = f"{args}->fork_width"
        self.thread_repl = "CLUSTER_CoreId()"
        self.used_args = False
        self._suppress = self._find_shadowing()

    def _find_shadowing(self) -> dict[int, set[str]]:
        """Lines on which a mapped name is suppressed by a local declaration."""
        from .frontend import _DECL_RE, _DECLARATOR_RE, _NON_DECL_WORDS, _split_top_level

        block = self.plan.block
        per_line: dict[int, set[str]] = {}
        if not self.mapping:
            return per_line
        depth = 0
        active: list[tuple[str, int]] = []  # (name, depth at declaration)
        warned: set[str] = set()
        for idx in range(block.start_line, block.end_line + 1):
            shadow = self.unit.brace_shadow[idx]
            start_depth = depth
            m = _DECL_RE.match(shadow)
            if m and m.group("base").split()[0] not in _NON_DECL_WORDS:
                for decl in _split_top_level(m.group("rest"), ","):
                    dm = _DECLARATOR_RE.match(decl.strip())
                    if dm and "(" not in decl and dm.group("name") in self.mapping:
                        name = dm.group("name")
                        active.append((name, start_depth))
                        if name not in warned:
                            warned.add(name)
                            self.diags.append(
                                warning(
                                    idx + 1,
                                    f"declaration of '{name}' shadows a clause-listed "
                                    "variable; it stays local inside this scope",
                                )
                            )
            for name, _ in active:
                per_line.setdefault(idx, set()).add(name)
            for ch in shadow:
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    active = [(n, d) for n, d in active if d <= depth]
        return per_line

    def line(self, idx: int) -> str:
        text = self.unit.lines[idx]
        shadow = self.unit.code_shadow[idx]
        out, used_map, used_nthr = _rewrite_spans(
            text, shadow, self.mapping, self._suppress.get(idx, set()),
            self.thread_repl, self.nthreads_repl,
        )
        self.used_args = self.used_args or used_map or used_nthr
        return out

    def expr(self, expr_text: str) -> str:
        shadow = "".join(build_shadows(expr_text)[0])
        out, used_map, used_nthr = _rewrite_spans(
            expr_text, shadow, self.mapping, set(), self.thread_repl, self.nthreads_repl
        )
        self.used_args = self.used_args or used_map or used_nthr
        return out


class _WorkerBuilder:
    def __init__(self, plan: RegionPlan, unit: TranslationUnit, scratch: dict[str, str],
                 diags: list[Diagnostic], elided_lines: set[int]):
        self.plan = plan
        self.unit = unit
        self.scratch = scratch
        self.rw = _RegionRewriter(plan, unit, scratch, diags)
        self.elided_lines = elided_lines
        self.needs_core = bool(plan.vars.reductions) or plan.kind == "parallel_for"

    def _header_tail(self, loop: LoopHeader) -> str:
        """Rewritten text after the closing ')' of the loop header line."""
        shadow = self.unit.brace_shadow[loop.header_line]
        depth = 0
        close = None
        for j, ch in enumerate(shadow):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    close = j
                    break
        tail_text = self.unit.lines[loop.header_line][close + 1 :]
        tail_shadow = self.unit.code_shadow[loop.header_line][close + 1 :]
        out, used_map, used_nthr = _rewrite_spans(
            tail_text, tail_shadow, self.rw.mapping,
            self.rw._suppress.get(loop.header_line, set()),
            self.rw.thread_repl, self.rw.nthreads_repl,
        )
        self.rw.used_args = self.rw.used_args or used_map or used_nthr
        return out.rstrip("\r\n")

    def _loop_lines(self, loop: LoopHeader, block: StructuredBlock,
                    inners: list[InnerDirective], base: str) -> list[str]:
        s = self.scratch
        rw = self.rw
        self.needs_core = True
        rw.used_args = True
        lb, step = s["__lb"], s["__step"]
        count, width = s["__count"], s["__width"]
        quota, rem = s["__quota"], s["__rem"]
        begin, finish = s["__begin"], s["__finish"]
        core, args = s["__core"], s["__args"]
        inner = base + IND
        bias = f"{step} - 1" if loop.comparison == "<" else step
        init_decl = f"{loop.decl_type} " if loop.decl_type else ""
        tail = self._header_tail(loop)
        out = [
            f"{base}{{\n",
            f"{inner}long {lb} = ({rw.expr(loop.lower_bound)});\n",
            f"{inner}long {step} = ({rw.expr(loop.step)});\n",
            f"{inner}long {count} = (({rw.expr(loop.upper_bound)}) - {lb} + {bias}) / {step};\n",
            f"{inner}long {width} = {args}->fork_width;\n",
            f"{inner}long {quota}, {rem}, {begin}, {finish};\n",
            f"{inner}if ({count} < 0) {{\n",
            f"{inner}{IND}{count} = 0;\n",
            f"{inner}}}\n",
            f"{inner}{quota} = {count} / {width};\n",
            f"{inner}{rem} = {count} % {width};\n",
            f"{inner}{begin} = {core} * {quota} + ({core} < {rem} ? {core} : {rem});\n",
            f"{inner}{finish} = {begin} + {quota} + ({core} < {rem} ? 1 : 0);\n",
            f"{inner}for ({init_decl}{loop.var} = {lb} + {begin} * {step}; "
            f"{loop.var} < {lb} + {finish} * {step}; {loop.var} += {step}){tail}\n",
        ]
        if block.end_line > loop.header_line:
            out.extend(self._segment(loop.header_line + 1, block.end_line, inners))
        out.append(f"{base}}}\n")
        return out

    def _construct(self, inner: InnerDirective, sub: list[InnerDirective]) -> list[str]:
        d = inner.directive
        base = _indent_of(self.unit.lines[d.line_index])
        core = self.scratch["__core"]
        if d.kind == "critical":
            return [
                f"{base}CRITICAL_ENTER();\n",
                *self._segment(inner.block.start_line, inner.block.end_line, sub),
                f"{base}CRITICAL_EXIT();\n",
            ]
        if d.kind == "single":
            self.needs_core = True
            return [
                f"{base}if ({core} == 0) {{\n",
                *self._segment(inner.block.start_line, inner.block.end_line, sub),
                f"{base}}}\n",
                f"{base}CLUSTER_Barrier();\n",
            ]
        # inner worksharing loop
        assert d.kind == "for" and inner.loop is not None
        return [
            *self._loop_lines(inner.loop, inner.block, sub, base),
            f"{base}CLUSTER_Barrier();\n",
        ]

    def _segment(self, start: int, end: int, inners: list[InnerDirective]) -> list[str]:
        out: list[str] = []
        idx = start
        remaining = [i for i in inners if start <= i.directive.line_index <= end]
        for inner in remaining:
            line = inner.directive.line_index
            if line < idx:
                continue  # consumed by an enclosing construct
            for j in range(idx, line):
                if j not in self.elided_lines:
                    out.append(self.rw.line(j))
            sub = [i for i in inners
                   if inner.block.start_line <= i.directive.line_index <= inner.block.end_line
                   and i is not inner]
            out.extend(self._construct(inner, sub))
            idx = inner.block.end_line + 1
        for j in range(idx, end + 1):
            if j not in self.elided_lines:
                out.append(self.rw.line(j))
        return out

    def body(self) -> list[str]:
        plan = self.plan
        inners = list(plan.inner_directives)
        if plan.kind == "parallel_for":
            assert plan.loop is not None
            return self._loop_lines(plan.loop, plan.block, inners, IND)
        if plan.block.form == "braced":
            return self._segment(plan.block.start_line, plan.block.end_line, inners)
        return [
            f"{IND}{{\n",
            *self._segment(plan.block.start_line, plan.block.end_line, inners),
            f"{IND}}}\n",
        ]


def _field_decl(info, name: str) -> str:
    ctype = info.ctype
    sep = "" if ctype.endswith("*") else " "
    return f"{ctype}{sep}{name}"


def emit_shared_record(plan: RegionPlan, scratch: dict[str, str], l1_mode: bool = False) -> list[str]:
    """File-scope record type plus its global instance (or L1 pointer)."""
    lines = [f"typedef struct {{\n"]
    for name, info in plan.vars.shared:
        lines.append(f"{IND}{_field_decl(info, name)};\n")
    for _, name, info in plan.vars.reductions:
        lines.append(f"{IND}{_field_decl(info, name)};\n")
        lines.append(f"{IND}{_field_decl(info, scratch[f'__partials_{name}'])}[8];\n")
    lines.append(f"{IND}int fork_width;\n")
    lines.append(f"}} {plan.record_type};\n")
    lines.append("\n")
    if l1_mode:
        lines.append(f"{plan.record_type} *{plan.l1_name};\n")
    else:
        lines.append(f"{plan.record_type} {plan.record_name};\n")
    return lines


def rewrite_region_body(plan: RegionPlan, unit: TranslationUnit, scratch: dict[str, str],
                        diags: list[Diagnostic] | None = None,
                        elided_lines: set[int] | None = None) -> list[str]:
    """Worker-body lines for a region (partitioned loop, rewritten names)."""
    builder = _WorkerBuilder(plan, unit, scratch, diags if diags is not None else [],
                             elided_lines or set())
    return builder.body()


def emit_worker_and_master(plan: RegionPlan, unit: TranslationUnit, scratch: dict[str, str],
                           diags: list[Diagnostic] | None = None,
                           elided_lines: set[int] | None = None) -> list[str]:
    """Worker function (cast, privates, partition, body, reduction combine)
    plus the per-region master whose only job is the cores fork."""
    diags = diags if diags is not None else []
    builder = _WorkerBuilder(plan, unit, scratch, diags, elided_lines or set())
    body = builder.body()
    args, core, slot = scratch["__args"], scratch["__core"], scratch["__slot"]

    has_reduction = bool(plan.vars.reductions)
    used_args = builder.rw.used_args or has_reduction
    needs_core = builder.needs_core or has_reduction

    inline_vars = {lh.var for lh in ([plan.loop] if plan.loop else [])
                   + [i.loop for i in plan.inner_directives if i.loop] if lh.decl_type}

    lines = [f"void {plan.worker_name}(void *arg) {{\n"]
    if used_args:
        lines.append(f"{IND}{plan.record_type} *{args} = ({plan.record_type} *)arg;\n")
    else:
        lines.append(f"{IND}(void)arg;\n")
    if needs_core:
        lines.append(f"{IND}int {core} = CLUSTER_CoreId();\n")
    for name, info in plan.vars.privates:
        if name in inline_vars:
            continue
        lines.append(f"{IND}{_field_decl(info, name)};\n")
    for op, name, info in plan.vars.reductions:
        identity = "1" if op == "*" else "0"
        lines.append(f"{IND}{_field_decl(info, scratch[f'__red_{name}'])} = {identity};\n")
    lines.extend(body)
    if has_reduction:
        for _, name, _ in plan.vars.reductions:
            lines.append(f"{IND}{args}->{scratch[f'__partials_{name}']}[{core}] = "
                         f"{scratch[f'__red_{name}']};\n")
        lines.append(f"{IND}CLUSTER_Barrier();\n")
        lines.append(f"{IND}if ({core} == 0) {{\n")
        lines.append(f"{IND}{IND}for (int {slot} = 0; {slot} < {args}->fork_width; {slot}++) {{\n")
        for op, name, _ in plan.vars.reductions:
            fold = "*" if op == "*" else "+"
            lines.append(f"{IND}{IND}{IND}{args}->{name} {fold}= "
                         f"{args}->{scratch[f'__partials_{name}']}[{slot}];\n")
        lines.append(f"{IND}{IND}}}\n")
        lines.append(f"{IND}}}\n")
    lines.append("}\n")
    lines.append("\n")
    lines.append(f"void {plan.master_name}(void *arg) {{\n")
    lines.append(f"{IND}CLUSTER_CoresFork({plan.worker_name}, arg);\n")
    lines.append("}\n")
    return lines


def rewrite_pragma_site(plan: RegionPlan, unit: TranslationUnit, l1_mode: bool = False) -> list[str]:
    """Statements replacing the pragma and its block in the original function."""
    ind = _indent_of(unit.lines[plan.pragma_line])
    acc = f"{plan.l1_name}->" if l1_mode else f"{plan.record_name}."
    task_arg = plan.l1_name if l1_mode else f"&{plan.record_name}"
    lines: list[str] = []
    for name, _ in plan.vars.shared:
        lines.append(f"{ind}{acc}{name} = {name};\n")
    for _, name, _ in plan.vars.reductions:
        lines.append(f"{ind}{acc}{name} = {name};\n")
    lines.append(f"{ind}{acc}fork_width = {plan.fork_width};\n")
    lines.append(f"{ind}CLUSTER_SendTask(0, {plan.master_name}, (void *){task_arg}, 0);\n")
    lines.append(f"{ind}CLUSTER_Wait(0);\n")
    for name, _ in plan.vars.shared:
        lines.append(f"{ind}{name} = {acc}{name};\n")
    for _, name, _ in plan.vars.reductions:
        lines.append(f"{ind}{name} = {acc}{name};\n")
    # privatized names may have lost every use in this function
    inline_vars = {lh.var for lh in ([plan.loop] if plan.loop else [])
                   + [i.loop for i in plan.inner_directives if i.loop] if lh.decl_type}
    for name, _ in plan.vars.privates:
        if name not in inline_vars:
            lines.append(f"{ind}(void)sizeof({name});\n")
    return lines


def emit_lifecycle(unit: TranslationUnit, plans: list[RegionPlan]) -> LifecyclePlan:
    """Where CLUSTER_Start / CLUSTER_Stop go, and with how many cores."""
    main = unit.main_function()
    if main is None:
        raise fail(1, "translation needs a main function to start the cluster")
    width = max(p.fork_width for p in plans)
    in_main = [p for p in plans
               if main.body_start <= p.pragma_line <= main.body_end]
    if len(in_main) == len(plans):
        return LifecyclePlan(
            width=width,
            start_before=plans[0].pragma_line,
            stop_before=plans[-1].block.end_line + 1,
            tight=True,
        )
    # regions in helper functions: bracket the whole of main
    stop_before = main.body_end
    depth = 0
    for idx in range(main.body_start, main.body_end + 1):
        shadow = unit.brace_shadow[idx]
        if depth == 1 and re.match(r"\s*return\b", shadow):
            stop_before = idx
        for ch in shadow:
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
    return LifecyclePlan(
        width=width, start_before=main.body_start + 1, stop_before=stop_before, tight=False
    )


def _generated_section(unit: TranslationUnit, result: PlanResult,
                       diags: list[Diagnostic], l1_mode: bool,
                       elided_lines: set[int]) -> list[str]:
    out: list[str] = ["\n", "/* ---- generated cluster offload support ---- */\n"]
    externs: list[str] = []
    for (func, name), info in unit.declarations.items():
        if func == "" and not info.static:
            stars = "*" * info.stars
            externs.append(f"extern {info.base} {stars}{name}{info.array};\n")
    if externs:
        out.append("\n")
        out.extend(externs)
    protos = [fn for fn in unit.functions if fn.name != "main" and fn.header_text]
    if protos:
        out.append("\n")
        for fn in protos:
            out.append(f"{fn.header_text};\n")
    for plan in result.plans:
        out.append("\n")
        out.extend(emit_shared_record(plan, result.scratch, l1_mode))
    for plan in result.plans:
        out.append("\n")
        out.extend(
            emit_worker_and_master(plan, unit, result.scratch, diags, elided_lines)
        )
    out.append("\n")
    return out


def _apply_edits(lines: list[str], edits: list[tuple[int, int, list[str]]]) -> list[str]:
    out: list[str] = []
    pos = 0
    for start, stop, repl in sorted(edits, key=lambda e: (e[0], e[1])):
        if start < pos:
            raise ValueError(f"overlapping edits at line {start}")
        out.extend(lines[pos:start])
        out.extend(repl)
        pos = stop
    out.extend(lines[pos:])
    return out


def build_output_text(unit: TranslationUnit, result: PlanResult,
                      diags: list[Diagnostic], options: TranslateOptions) -> str:
    """Assemble the translated file contents (pure; no filesystem access)."""
    plans = result.plans
    # outside parallel regions the omp queries have serial answers
    lines: list[str] = []
    for text, shadow in zip(unit.lines, unit.code_shadow):
        out, _, _ = _rewrite_spans(text, shadow, {}, set(), "0", "1")
        lines.append(out)
    edits: list[tuple[int, int, list[str]]] = []

    include_idxs = [i for i, ln in enumerate(lines) if ln.lstrip().startswith("#include")]
    shim_present = False
    for i in include_idxs:
        if _OMP_INCLUDE_RE.match(lines[i]):
            edits.append((i, i + 1, []))
        elif SHIM_HEADER in lines[i]:
            shim_present = True
    insert_at = (max(include_idxs) + 1) if include_idxs else 0

    elided_lines: set[int] = set()
    for lp in unit.pragmas:
        if lp.elided:
            elided_lines.update(range(lp.line_index, lp.line_index + lp.n_lines))

    gen: list[str] = []
    if not shim_present:
        gen.append(f'#include "{SHIM_HEADER}"\n')
    if plans:
        gen.extend(_generated_section(unit, result, diags, options.emit_l1, elided_lines))
    if gen:
        edits.append((insert_at, insert_at, gen))

    covered: set[int] = set()
    for plan in plans:
        covered.update(range(plan.pragma_line, plan.block.end_line + 1))
    for lp in unit.pragmas:
        if lp.elided and lp.line_index not in covered:
            edits.append((lp.line_index, lp.line_index + lp.n_lines, []))

    if plans:
        lc = emit_lifecycle(unit, plans)
        start_ind = _indent_of(lines[lc.start_before]) or IND
        stop_anchor = min(lc.stop_before, len(lines) - 1)
        stop_ind = _indent_of(lines[plans[-1].pragma_line]) if lc.tight else (
            _indent_of(lines[stop_anchor]) or IND
        )
        start_lines = [f"{start_ind}CLUSTER_Start(0, {lc.width});\n"]
        stop_lines = []
        if options.emit_l1:
            for plan in plans:
                start_lines.append(
                    f"{start_ind}{plan.l1_name} = ({plan.record_type} *)"
                    f"L1_Malloc(sizeof({plan.record_type}));\n"
                )
                stop_lines.append(
                    f"{stop_ind}L1_Free({plan.l1_name}, sizeof({plan.record_type}));\n"
                )
        stop_lines.append(f"{stop_ind}CLUSTER_Stop(0);\n")
        edits.append((lc.start_before, lc.start_before, start_lines))
        edits.append((lc.stop_before, lc.stop_before, stop_lines))
        for plan in plans:
            edits.append(
                (plan.pragma_line, plan.block.end_line + 1,
                 rewrite_pragma_site(plan, unit, options.emit_l1))
            )

    return "".join(_apply_edits(lines, edits))


def output_path(source_path: str, outdir: str) -> str:
    stem = os.path.splitext(os.path.basename(source_path))[0]
    return os.path.join(outdir, f"{stem}_gap.c")


def render_output(unit: TranslationUnit, result: PlanResult, diags: list[Diagnostic],
                  options: TranslateOptions, write: bool = True) -> EmittedFile:
    """Build the emitted file and (optionally) write it under the output dir."""
    contents = build_output_text(unit, result, diags, options)
    path = output_path(unit.source_path, options.outdir)
    if write:
        if not os.path.isdir(options.outdir):
            if options.strict_paper_paths:
                raise DiagnosticError(
                    Diagnostic("error", 1, f"output directory '{options.outdir}' does not exist"),
                    exit_code=1,
                )
            try:
                os.makedirs(options.outdir, exist_ok=True)
            except OSError as exc:
                raise DiagnosticError(
                    Diagnostic("error", 1, f"cannot create output directory: {exc}"),
                    exit_code=1,
                ) from exc
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(contents)
        except OSError as exc:
            raise DiagnosticError(
                Diagnostic("error", 1, f"cannot write output: {exc}"), exit_code=1
            ) from exc
    return EmittedFile(path=path, contents=contents)


def translate_source(text: str, path: str, options: TranslateOptions | None = None,
                     write: bool = True) -> tuple[EmittedFile | None, list[Diagnostic]]:
    """Frontend, planner and codegen in sequence.

    Returns (emitted, diagnostics); emitted is None when an error-severity
    diagnostic suppressed emission. Structural failures (unreadable or
    brace-imbalanced input) raise DiagnosticError instead.
    """
    options = options or TranslateOptions()
    unit = scan_source(text, path)
    diags = parse_pragmas(unit, options.serial_fallback)
    result = plan_regions(unit, options.cores, options.serial_fallback)
    diags.extend(result.diagnostics)
    if any(d.severity == "error" for d in diags):
        return None, diags
    try:
        emitted = render_output(unit, result, diags, options, write=write)
    except DiagnosticError as exc:
        if exc.exit_code == 1:
            raise
        diags.append(exc.diagnostic)
        return None, diags
    return emitted, diags
