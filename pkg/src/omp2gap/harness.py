"""Differential verification: translated-plus-shim vs. a serial-elision oracle.

The oracle is the same program with every pragma deleted and the omp
queries stubbed to their single-thread answers; for the supported
directive subset that preserves semantics up to reduction rounding and
output interleaving.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .codegen import TranslateOptions, translate_source
from .diagnostics import DiagnosticError
from .frontend import PRAGMA_OMP_RE, build_shadows

DEFAULT_TOLERANCE = 1e-6
_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")
_THREAD_ID_RE = re.compile(r"(?i)(thread\s+)(\d+)")
_OMP_INCLUDE_RE = re.compile(r'^\s*#\s*include\s*[<"]\s*omp\.h\s*[>"]')

# Line counts reported for these benchmarks by the original tool
# (original, converted); shown for orientation, never asserted.
REFERENCE_LINE_COUNTS: dict[str, tuple[int, int]] = {
    "omp_pi": (40, 135),
    "omp_trap2a": (98, 265),
    "omp_hello": (22, 79),
    "hello_for": (24, 121),
    "hello_cru": (49, 266),
}

# name -> comparison mode used by the corpus runner
CORPUS_PROGRAMS: tuple[tuple[str, str], ...] = (
    ("omp_hello", "threads"),
    ("omp_pi", "ordered"),
    ("omp_trap2a", "ordered"),
    ("hello_for", "unordered"),
    ("hello_cru", "threads"),
)


def repo_root() -> Path:
    return Path(__file__).resolve().parents[2]


def default_shim_dir() -> Path:
    env = os.environ.get("OMP2GAP_SHIM_DIR")
    return Path(env) if env else repo_root() / "shim"


def default_corpus_dir() -> Path:
    env = os.environ.get("OMP2GAP_CORPUS_DIR")
    return Path(env) if env else repo_root() / "corpus"


def host_cc() -> str:
    return os.environ.get("OMP2GAP_CC", "cc")


def serial_elision(text: str) -> str:
    """Sequential oracle source: pragmas deleted, omp queries stubbed."""
    shadows, _ = build_shadows(text)
    out_lines: list[str] = []
    skip_continuation = False
    uses_omp = False
    stubbed = False
    for raw, shadow in zip(text.splitlines(keepends=True), shadows):
        if skip_continuation:
            skip_continuation = shadow.rstrip("\r\n").endswith("\\")
            continue
        if PRAGMA_OMP_RE.match(shadow):
            skip_continuation = shadow.rstrip("\r\n").endswith("\\")
            continue
        if _OMP_INCLUDE_RE.match(raw):
            out_lines.append("#define omp_get_thread_num() 0\n")
            out_lines.append("#define omp_get_num_threads() 1\n")
            stubbed = True
            continue
        if "omp_get_" in shadow:
            uses_omp = True
        out_lines.append(raw)
    if uses_omp and not stubbed:
        out_lines.insert(0, "#define omp_get_num_threads() 1\n")
        out_lines.insert(0, "#define omp_get_thread_num() 0\n")
    return "".join(out_lines)


@dataclass
class BuildResult:
    ok: bool
    log: str = ""
    warnings: str = ""


@dataclass
class VerifyReport:
    program: str
    mode: str
    tolerance: float = DEFAULT_TOLERANCE
    translate_ok: bool = False
    build_translated: BuildResult = field(default_factory=lambda: BuildResult(False))
    build_oracle: BuildResult = field(default_factory=lambda: BuildResult(False))
    deltas: list[float] = field(default_factory=list)
    detail: str = ""
    verdict: str = "FAIL"

    def render(self) -> str:
        lines = [
            f"program: {self.program}",
            f"translate: {'ok' if self.translate_ok else 'FAILED'}",
            f"build translated: {'ok' if self.build_translated.ok else 'FAILED'}",
            f"build oracle: {'ok' if self.build_oracle.ok else 'FAILED'}",
            f"mode: {self.mode}",
        ]
        if self.deltas:
            lines.append(f"max relative delta: {max(self.deltas):.3e} (tolerance {self.tolerance:g})")
        if self.detail:
            lines.append(self.detail)
        for res in (self.build_translated, self.build_oracle):
            if not res.ok and res.log:
                lines.append(res.log.rstrip())
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def compile_c(cc: str, sources: list[Path], out: Path, include_dirs: list[Path],
              warn: bool = True, pthread: bool = False) -> BuildResult:
    cmd = [cc, "-std=c99"]
    if warn:
        cmd += ["-Wall", "-Wextra"]
    for inc in include_dirs:
        cmd += ["-I", str(inc)]
    if pthread:
        cmd.append("-pthread")
    cmd += [str(s) for s in sources] + ["-o", str(out)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        return BuildResult(ok=False, log=f"$ {' '.join(cmd)}\n{proc.stderr}")
    return BuildResult(ok=True, warnings=proc.stderr)


def run_binary(path: Path, timeout: float = 30.0) -> tuple[int, str, str]:
    proc = subprocess.run([str(path)], capture_output=True, text=True, timeout=timeout)
    return proc.returncode, proc.stdout, proc.stderr


def compare_ordered_numeric(got: str, want: str, tolerance: float) -> tuple[bool, list[float], str]:
    """Line-by-line: final numeric token within relative tolerance, rest equal."""
    got_lines = got.splitlines()
    want_lines = want.splitlines()
    if len(got_lines) != len(want_lines):
        return False, [], f"line count differs: {len(got_lines)} vs {len(want_lines)}"
    deltas: list[float] = []
    for i, (a, b) in enumerate(zip(got_lines, want_lines), start=1):
        am = list(_NUMBER_RE.finditer(a))
        bm = list(_NUMBER_RE.finditer(b))
        if not am or not bm:
            if a != b:
                return False, deltas, f"line {i} differs: {a!r} vs {b!r}"
            continue
        a_tok, b_tok = am[-1], bm[-1]
        if a[: a_tok.start()] != b[: b_tok.start()] or a[a_tok.end():] != b[b_tok.end():]:
            return False, deltas, f"line {i} differs outside the numeric token"
        x, y = float(a_tok.group(0)), float(b_tok.group(0))
        denom = max(abs(x), abs(y), 1e-300)
        delta = abs(x - y) / denom if x != y else 0.0
        deltas.append(delta)
        if delta > tolerance:
            return False, deltas, f"line {i}: {x!r} vs {y!r} (relative delta {delta:.3e})"
    return True, deltas, ""


def wildcard_thread_ids(text: str) -> list[str]:
    return [_THREAD_ID_RE.sub(r"\1*", ln) for ln in text.splitlines()]


def compare_unordered_lines(got: str, want: str) -> tuple[bool, str]:
    """Multiset equality after wildcarding thread ids."""
    from collections import Counter

    a = Counter(wildcard_thread_ids(got))
    b = Counter(wildcard_thread_ids(want))
    if a == b:
        return True, ""
    missing = list((b - a).elements())[:3]
    extra = list((a - b).elements())[:3]
    return False, f"multisets differ; missing {missing!r}, extra {extra!r}"


def thread_id_set(text: str) -> set[int]:
    return {int(m.group(2)) for m in _THREAD_ID_RE.finditer(text)}


def check_thread_ids(got: str, team: int) -> tuple[bool, str]:
    ids = thread_id_set(got)
    want = set(range(team))
    if ids == want:
        return True, ""
    return False, f"thread ids {sorted(ids)} != expected {sorted(want)}"


def cmd_verify(input_path: str | Path, mode: str = "ordered",
               tolerance: float = DEFAULT_TOLERANCE,
               shim_dir: Path | None = None,
               cc: str | None = None,
               keep_dir: Path | None = None) -> VerifyReport:
    """Translate, build both variants, run them, and compare outputs."""
    input_path = Path(input_path)
    program = input_path.stem
    report = VerifyReport(program=program, mode=mode, tolerance=tolerance)
    shim_dir = shim_dir or default_shim_dir()
    cc = cc or host_cc()

    try:
        text = input_path.read_text(encoding="utf-8")
    except OSError as exc:
        report.detail = f"cannot read input: {exc}"
        return report

    workdir = keep_dir or Path(tempfile.mkdtemp(prefix=f"omp2gap_{program}_"))
    try:
        options = TranslateOptions(outdir=str(workdir / "output"))
        try:
            emitted, diags = translate_source(text, str(input_path), options)
        except DiagnosticError as exc:
            report.detail = exc.diagnostic.render(str(input_path))
            return report
        if emitted is None:
            report.detail = "; ".join(d.render(str(input_path)) for d in diags)
            return report
        report.translate_ok = True
        team = _max_fork_width(text)

        oracle_src = workdir / f"{program}_serial.c"
        oracle_src.write_text(serial_elision(text), encoding="utf-8")

        report.build_translated = compile_c(
            cc, [Path(emitted.path), shim_dir / "gap_shim.c"],
            workdir / f"{program}_gap", [shim_dir], warn=True, pthread=True,
        )
        report.build_oracle = compile_c(
            cc, [oracle_src], workdir / f"{program}_serial", [], warn=False,
        )
        if not (report.build_translated.ok and report.build_oracle.ok):
            return report

        rc_t, out_t, err_t = run_binary(workdir / f"{program}_gap")
        rc_o, out_o, _ = run_binary(workdir / f"{program}_serial")
        if rc_t != 0:
            report.detail = f"translated binary exited {rc_t}: {err_t.strip()}"
            return report
        if rc_o != 0:
            report.detail = f"oracle binary exited {rc_o}"
            return report

        if mode == "ordered":
            ok, deltas, detail = compare_ordered_numeric(out_t, out_o, tolerance)
            report.deltas = deltas
        elif mode == "unordered":
            ok, detail = compare_unordered_lines(out_t, out_o)
        elif mode == "threads":
            ok, detail = check_thread_ids(out_t, team)
        else:
            ok, detail = False, f"unknown mode '{mode}'"
        report.detail = detail
        report.verdict = "PASS" if ok else "FAIL"
        return report
    finally:
        if keep_dir is None:
            shutil.rmtree(workdir, ignore_errors=True)


def _max_fork_width(text: str) -> int:
    """Largest fork width the translation will use (for the threads check)."""
    from .frontend import parse_pragmas, scan_source
    from .planner import plan_regions

    try:
        unit = scan_source(text, "<input>")
        parse_pragmas(unit)
        result = plan_regions(unit)
        if result.plans:
            return max(p.fork_width for p in result.plans)
    except DiagnosticError:
        pass
    return 8


@dataclass
class CorpusRow:
    program: str
    input_lines: int
    output_lines: int
    verdict: str

    @property
    def ratio(self) -> float:
        return self.output_lines / self.input_lines if self.input_lines else 0.0


def cmd_corpus(corpus_dir: Path | None = None, shim_dir: Path | None = None,
               cc: str | None = None) -> tuple[list[CorpusRow], int]:
    """Translate and verify every corpus program; returns rows and exit code."""
    corpus_dir = corpus_dir or default_corpus_dir()
    rows: list[CorpusRow] = []
    reports: list[VerifyReport] = []
    for name, mode in CORPUS_PROGRAMS:
        src = corpus_dir / f"{name}.c"
        if not src.exists():
            rows.append(CorpusRow(name, 0, 0, "MISSING"))
            continue
        text = src.read_text(encoding="utf-8")
        out_lines = 0
        try:
            emitted, _ = translate_source(
                text, str(src), TranslateOptions(outdir="output")
            )
        except DiagnosticError:
            emitted = None
        if emitted is not None:
            out_lines = emitted.contents.count("\n")
        report = cmd_verify(src, mode=mode, shim_dir=shim_dir, cc=cc)
        reports.append(report)
        rows.append(CorpusRow(name, text.count("\n"), out_lines, report.verdict))
    exit_code = 0 if rows and all(r.verdict == "PASS" for r in rows) else 1
    return rows, exit_code


def render_corpus_table(rows: list[CorpusRow]) -> str:
    header = f"{'program':<12} {'input':>6} {'output':>7} {'ratio':>6}  {'reference':<12} verdict"
    out = [header, "-" * len(header)]
    for row in rows:
        ref = REFERENCE_LINE_COUNTS.get(row.program)
        ref_text = f"{ref[0]}->{ref[1]}" if ref else "-"
        out.append(
            f"{row.program:<12} {row.input_lines:>6} {row.output_lines:>7} "
            f"{row.ratio:>6.2f}  {ref_text:<12} {row.verdict}"
        )
    passed = sum(1 for r in rows if r.verdict == "PASS")
    out.append(f"corpus: {passed}/{len(rows)} PASS")
    return "\n".join(out)
