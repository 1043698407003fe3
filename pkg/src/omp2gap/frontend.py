"""Line-oriented frontend for OpenMP-annotated C sources.

The scanner keeps every input line verbatim and works on two "shadow"
copies of the text: one with comments and string/char literals blanked
(for tokenizing), and one that additionally blanks preprocessor lines
(for brace matching). Shadows preserve length and line structure, so
every index is valid in the original text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .diagnostics import Diagnostic, DiagnosticError, fail, warning

DIRECTIVE_KINDS = ("parallel", "for", "parallel_for", "critical", "single")
REDUCTION_OPS = ("+", "*", "-")

PRAGMA_OMP_RE = re.compile(r"^\s*#\s*pragma\s+omp\b")
IDENT_RE = re.compile(r"[A-Za-z_]\w*")
IDENT_FULL_RE = re.compile(r"^[A-Za-z_]\w*$")
INT_LITERAL_RE = re.compile(r"^[+-]?\d+$")

# Words that can never start a declaration we index.
_NON_DECL_WORDS = frozenset(
    "return else goto break continue case default typedef do while for if "
    "switch sizeof extern void".split()
)

_KNOWN_BASE = (
    r"(?:(?:unsigned|signed)\s+)?"
    r"(?:long\s+long\s+int|long\s+long|long\s+int|long\s+double|short\s+int"
    r"|long|int|short|float|double|char)"
)
_DECL_RE = re.compile(
    r"^\s*(?P<quals>(?:(?:static|const|register|volatile)\s+)*)"
    r"(?P<base>" + _KNOWN_BASE + r"|unsigned|signed"
    r"|(?:struct|union|enum)\s+[A-Za-z_]\w*"
    r"|[A-Za-z_]\w*)"
    r"\s+(?P<rest>[^;]+);\s*$"
)
_DECLARATOR_RE = re.compile(
    r"^\s*(?P<stars>[\s*]*)(?P<name>[A-Za-z_]\w*)\s*"
    r"(?P<arr>(?:\[[^\]]*\])+)?\s*(?:=.*)?$",
    re.S,
)
_PARAM_RE = re.compile(
    r"^\s*(?P<quals>(?:const\s+)*)"
    r"(?P<base>" + _KNOWN_BASE + r"|unsigned|signed|[A-Za-z_]\w*)"
    r"\s*(?P<stars>[\s*]*)\s*(?P<name>[A-Za-z_]\w*)\s*(?P<arr>(?:\[[^\]]*\])*)\s*$"
)
_FUNC_HEADER_RE = re.compile(
    r"(?P<static>\bstatic\b\s+)?[A-Za-z_][\w\s\*]*?"
    r"(?P<name>[A-Za-z_]\w*)\s*\((?P<params>[^()]*(?:\([^()]*\)[^()]*)*)\)\s*$"
)


@dataclass(frozen=True)
class ClauseSet:
    """Normalized clauses of one directive. Identifier classes are disjoint."""

    num_threads: Optional[int] = None
    private_vars: tuple[str, ...] = ()
    shared_vars: tuple[str, ...] = ()
    reductions: tuple[tuple[str, str], ...] = ()  # (operator, identifier)

    def is_empty(self) -> bool:
        return (
            self.num_threads is None
            and not self.private_vars
            and not self.shared_vars
            and not self.reductions
        )


@dataclass(frozen=True)
class PragmaDirective:
    kind: str  # one of DIRECTIVE_KINDS
    clauses: ClauseSet
    line_index: int  # 0-based


@dataclass(frozen=True)
class StructuredBlock:
    start_line: int  # 0-based, inclusive
    end_line: int  # 0-based, inclusive
    form: str  # "braced" | "single_statement"


@dataclass(frozen=True)
class LoopHeader:
    var: str
    lower_bound: str
    upper_bound: str
    comparison: str  # "<" | "<="
    step: str  # positive integer literal or expression text
    header_line: int
    decl_type: Optional[str] = None  # set when the loop declares its own variable


@dataclass(frozen=True)
class DeclInfo:
    base: str
    stars: int = 0
    array: str = ""  # e.g. "[8]"
    static: bool = False
    depth: int = 1

    @property
    def ctype(self) -> str:
        return self.base + " " + "*" * self.stars if self.stars else self.base

    @property
    def is_array(self) -> bool:
        return bool(self.array)


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    params_text: str
    header_line: int  # line of the opening brace
    body_start: int
    body_end: int
    static: bool = False
    header_text: str = ""  # whitespace-normalized definition header


@dataclass
class LocatedPragma:
    """One `#pragma omp` occurrence: verbatim location plus parsed pieces."""

    line_index: int
    n_lines: int  # 1 + continuation lines
    text: str  # joined, continuations folded
    directive: Optional[PragmaDirective] = None
    block: Optional[StructuredBlock] = None
    elided: bool = False  # directive dropped under --serial-fallback


@dataclass
class TranslationUnit:
    source_path: str
    lines: list[str]  # verbatim, line endings kept
    includes: list[str]
    pragmas: list[LocatedPragma]
    declarations: dict[tuple[str, str], DeclInfo]
    functions: list[FunctionSpan]
    code_shadow: list[str]  # comments and literals blanked
    brace_shadow: list[str]  # code shadow with preprocessor lines blanked
    identifiers: frozenset[str]

    def function_at(self, line_index: int) -> Optional[FunctionSpan]:
        for fn in self.functions:
            if fn.body_start <= line_index <= fn.body_end:
                return fn
        return None

    def main_function(self) -> Optional[FunctionSpan]:
        for fn in self.functions:
            if fn.name == "main":
                return fn
        return None


def build_shadows(text: str) -> tuple[list[str], list[str]]:
    """Blank comments and string/char literals; return (code, brace) shadows.

    Both shadows keep length and newlines. The brace shadow additionally
    blanks preprocessor lines (and their backslash continuations) so that
    braces inside macros or pragmas never reach the matcher.
    """
    out = list(text)
    n = len(text)
    i = 0
    state = "code"
    while i < n:
        c = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if state == "code":
            if c == "/" and nxt == "/":
                out[i] = out[i + 1] = " "
                i += 2
                state = "line_comment"
            elif c == "/" and nxt == "*":
                out[i] = out[i + 1] = " "
                i += 2
                state = "block_comment"
            elif c == '"':
                out[i] = " "
                i += 1
                state = "string"
            elif c == "'":
                out[i] = " "
                i += 1
                state = "char"
            else:
                i += 1
        elif state == "line_comment":
            if c == "\n":
                state = "code"
            else:
                out[i] = " "
            i += 1
        elif state == "block_comment":
            if c == "*" and nxt == "/":
                out[i] = out[i + 1] = " "
                i += 2
                state = "code"
            else:
                if c != "\n":
                    out[i] = " "
                i += 1
        else:  # string or char literal
            quote = '"' if state == "string" else "'"
            if c == "\\" and nxt:
                out[i] = " "
                if nxt != "\n":
                    out[i + 1] = " "
                i += 2
            elif c == quote:
                out[i] = " "
                i += 1
                state = "code"
            elif c == "\n":  # unterminated literal; recover at line end
                i += 1
                state = "code"
            else:
                out[i] = " "
                i += 1

    code_lines = "".join(out).splitlines(keepends=True)
    brace_lines: list[str] = []
    continued = False
    for raw, shadow in zip(text.splitlines(keepends=True), code_lines):
        is_pp = raw.lstrip().startswith("#") or continued
        if is_pp:
            ending = "\n" if shadow.endswith("\n") else ""
            brace_lines.append(" " * (len(shadow) - len(ending)) + ending)
            continued = raw.rstrip("\r\n").endswith("\\")
        else:
            brace_lines.append(shadow)
            continued = False
    return code_lines, brace_lines


def code_tokens(text: str) -> list[str]:
    """Identifier tokens of `text`, ignoring comments and literals."""
    code, _ = build_shadows(text)
    return IDENT_RE.findall("".join(code))


def _split_top_level(text: str, sep: str) -> list[str]:
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def _index_declaration_line(
    shadow_line: str,
    func: str,
    depth: int,
    decls: dict[tuple[str, str], DeclInfo],
) -> None:
    m = _DECL_RE.match(shadow_line)
    if not m:
        return
    base = re.sub(r"\s+", " ", m.group("base").strip())
    first_word = base.split()[0]
    if first_word in _NON_DECL_WORDS:
        return
    quals = m.group("quals") or ""
    is_static = "static" in quals
    for decl in _split_top_level(m.group("rest"), ","):
        dm = _DECLARATOR_RE.match(decl.strip())
        if not dm or "(" in decl:
            continue
        name = dm.group("name")
        info = DeclInfo(
            base=base,
            stars=dm.group("stars").count("*"),
            array=dm.group("arr") or "",
            static=is_static,
            depth=depth,
        )
        key = (func, name)
        if key not in decls or decls[key].depth > depth:
            decls[key] = info


def _index_parameters(
    params_text: str, func: str, decls: dict[tuple[str, str], DeclInfo]
) -> None:
    for param in _split_top_level(params_text, ","):
        param = param.strip()
        if not param or param in ("void", "..."):
            continue
        pm = _PARAM_RE.match(param)
        if not pm:
            continue
        base = re.sub(r"\s+", " ", pm.group("base").strip())
        if base.split()[0] in _NON_DECL_WORDS:
            continue
        decls[(func, pm.group("name"))] = DeclInfo(
            base=base,
            stars=pm.group("stars").count("*"),
            array=pm.group("arr") or "",
        )


def scan_source(text: str, path: str) -> TranslationUnit:
    """Scan a C file into a TranslationUnit; pragmas are located, not parsed."""
    lines = text.splitlines(keepends=True)
    code_shadow, brace_shadow = build_shadows(text)
    # splitlines drops nothing, but guard against a final unterminated line
    assert len(code_shadow) == len(lines) and len(brace_shadow) == len(lines)

    includes = [ln.rstrip("\r\n") for ln in lines if ln.lstrip().startswith("#include")]

    pragmas: list[LocatedPragma] = []
    i = 0
    while i < len(lines):
        if PRAGMA_OMP_RE.match(code_shadow[i]):
            joined = code_shadow[i].rstrip("\r\n")
            span = 1
            while joined.endswith("\\") and i + span < len(lines):
                joined = joined[:-1] + " " + code_shadow[i + span].rstrip("\r\n")
                span += 1
            pragmas.append(LocatedPragma(line_index=i, n_lines=span, text=joined))
            i += span
        else:
            i += 1

    # Brace walk: track depth, open-brace lines, and function definitions.
    functions: list[FunctionSpan] = []
    open_stack: list[int] = []
    # name, params, header line, static, normalized header text
    func_stack: list[tuple[str, str, int, bool, str]] = []
    header_buf: list[str] = []
    line_start_depth: list[int] = []
    depth = 0
    for idx, shadow in enumerate(brace_shadow):
        line_start_depth.append(depth)
        for ch in shadow:
            if ch == "{":
                if depth == 0:
                    header = re.sub(r"\s+", " ", "".join(header_buf)).strip()
                    fm = _FUNC_HEADER_RE.search(header)
                    if fm:
                        func_stack.append(
                            (
                                fm.group("name"),
                                fm.group("params"),
                                idx,
                                bool(fm.group("static")),
                                header,
                            )
                        )
                    else:
                        func_stack.append(("", "", idx, False, ""))
                    header_buf = []
                open_stack.append(idx)
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    raise fail(idx + 1, "unmatched '}'")
                if open_stack:
                    open_stack.pop()
                if depth == 0 and func_stack:
                    name, params, header_line, is_static, header = func_stack.pop()
                    if name:
                        functions.append(
                            FunctionSpan(
                                name, params, header_line, header_line, idx, is_static, header
                            )
                        )
            elif depth == 0:
                header_buf.append(ch)
                if ch == ";":
                    header_buf = []
    if depth != 0:
        last_open = open_stack[-1] if open_stack else len(lines) - 1
        raise fail(last_open + 1, "unbalanced braces: '{' is never closed")

    declarations: dict[tuple[str, str], DeclInfo] = {}
    for fn in functions:
        _index_parameters(fn.params_text, fn.name, declarations)
    for idx, shadow in enumerate(brace_shadow):
        if not shadow.strip():
            continue
        d = line_start_depth[idx]
        fn = None
        for candidate in functions:
            if candidate.body_start <= idx <= candidate.body_end:
                fn = candidate
                break
        if fn is not None and d >= 1:
            _index_declaration_line(shadow, fn.name, d, declarations)
        elif d == 0:
            _index_declaration_line(shadow, "", 0, declarations)

    identifiers = frozenset(IDENT_RE.findall("".join(code_shadow)))
    return TranslationUnit(
        source_path=path,
        lines=lines,
        includes=includes,
        pragmas=pragmas,
        declarations=declarations,
        functions=functions,
        code_shadow=code_shadow,
        brace_shadow=brace_shadow,
        identifiers=identifiers,
    )


def _clause_error(line_index: int, column: int, message: str) -> DiagnosticError:
    return fail(line_index + 1, f"{message} (column {column})")


def parse_directive(pragma_line: str, line_index: int) -> PragmaDirective:
    """Parse one joined `#pragma omp` line into a directive with clauses."""
    m = PRAGMA_OMP_RE.match(pragma_line)
    if not m:
        raise fail(line_index + 1, "not an OpenMP pragma")
    pos = m.end()
    dm = re.compile(r"\s*([A-Za-z_]\w*)").match(pragma_line, pos)
    if not dm:
        raise _clause_error(line_index, pos + 1, "missing directive name")
    kind = dm.group(1)
    pos = dm.end()
    if kind == "parallel":
        fm = re.compile(r"\s+for\b").match(pragma_line, pos)
        if fm:
            kind = "parallel_for"
            pos = fm.end()
    elif kind not in ("for", "critical", "single"):
        raise fail(line_index + 1, f"unsupported directive '{kind}'")

    num_threads: Optional[int] = None
    private_vars: list[str] = []
    shared_vars: list[str] = []
    reductions: list[tuple[str, str]] = []

    while True:
        sm = re.compile(r"[\s,]*").match(pragma_line, pos)
        pos = sm.end()
        if pos >= len(pragma_line):
            break
        cm = re.compile(r"([A-Za-z_]\w*)\s*").match(pragma_line, pos)
        if not cm:
            raise _clause_error(line_index, pos + 1, "malformed clause syntax")
        name = cm.group(1)
        col = pos + 1
        pos = cm.end()
        if pos >= len(pragma_line) or pragma_line[pos] != "(":
            raise _clause_error(line_index, col, f"clause '{name}' is missing its '(...)'")
        depth_p = 0
        arg_start = pos + 1
        end = None
        for j in range(pos, len(pragma_line)):
            if pragma_line[j] == "(":
                depth_p += 1
            elif pragma_line[j] == ")":
                depth_p -= 1
                if depth_p == 0:
                    end = j
                    break
        if end is None:
            raise _clause_error(line_index, col, f"unterminated clause '{name}'")
        arg = pragma_line[arg_start:end].strip()
        pos = end + 1

        if name == "num_threads":
            if num_threads is not None:
                raise _clause_error(line_index, col, "duplicate num_threads clause")
            if not INT_LITERAL_RE.match(arg):
                raise _clause_error(
                    line_index, col, f"num_threads expects an integer literal, got '{arg}'"
                )
            num_threads = int(arg)
        elif name in ("private", "shared"):
            target = private_vars if name == "private" else shared_vars
            for ident in arg.split(","):
                ident = ident.strip()
                if not IDENT_FULL_RE.match(ident):
                    raise _clause_error(
                        line_index, col, f"'{ident}' is not a valid identifier in {name}(...)"
                    )
                if ident not in target:
                    target.append(ident)
        elif name == "reduction":
            if ":" not in arg:
                raise _clause_error(line_index, col, "reduction expects 'op: list'")
            op, _, rest = arg.partition(":")
            op = op.strip()
            if op not in REDUCTION_OPS:
                raise _clause_error(line_index, col, f"unsupported reduction operator '{op}'")
            for ident in rest.split(","):
                ident = ident.strip()
                if not IDENT_FULL_RE.match(ident):
                    raise _clause_error(
                        line_index, col, f"'{ident}' is not a valid identifier in reduction(...)"
                    )
                for other_op, existing in reductions:
                    if existing == ident and other_op != op:
                        raise _clause_error(
                            line_index, col, f"'{ident}' reduced with two different operators"
                        )
                if (op, ident) not in reductions:
                    reductions.append((op, ident))
        else:
            raise _clause_error(line_index, col, f"unsupported clause '{name}'")

    red_names = [ident for _, ident in reductions]
    for ident in private_vars:
        if ident in shared_vars or ident in red_names:
            raise fail(line_index + 1, f"'{ident}' appears in more than one data-sharing clause")
    for ident in shared_vars:
        if ident in red_names:
            raise fail(line_index + 1, f"'{ident}' appears in more than one data-sharing clause")

    return PragmaDirective(
        kind=kind,
        clauses=ClauseSet(
            num_threads=num_threads,
            private_vars=tuple(private_vars),
            shared_vars=tuple(shared_vars),
            reductions=tuple(reductions),
        ),
        line_index=line_index,
    )


def render_clauses(clauses: ClauseSet) -> str:
    """Canonical clause text; parse_directive(render(...)) round-trips."""
    parts: list[str] = []
    if clauses.num_threads is not None:
        parts.append(f"num_threads({clauses.num_threads})")
    if clauses.private_vars:
        parts.append(f"private({', '.join(clauses.private_vars)})")
    if clauses.shared_vars:
        parts.append(f"shared({', '.join(clauses.shared_vars)})")
    for op, ident in clauses.reductions:
        parts.append(f"reduction({op}: {ident})")
    return " ".join(parts)


def render_directive(kind: str, clauses: ClauseSet) -> str:
    text = "#pragma omp " + kind.replace("_", " ")
    rendered = render_clauses(clauses)
    return text + (" " + rendered if rendered else "")


def extract_structured_block(unit: TranslationUnit, pragma_line_index: int) -> StructuredBlock:
    """Compute the extent of the block governed by the pragma at the given line."""
    pragma = None
    for lp in unit.pragmas:
        if lp.line_index == pragma_line_index:
            pragma = lp
            break
    span = pragma.n_lines if pragma else 1

    j = pragma_line_index + span
    while True:
        if j >= len(unit.lines):
            raise fail(pragma_line_index + 1, "pragma is not followed by a statement")
        if PRAGMA_OMP_RE.match(unit.code_shadow[j]):
            raise fail(
                pragma_line_index + 1,
                "pragma immediately followed by another pragma (stacking unsupported)",
            )
        if unit.brace_shadow[j].strip():
            break
        j += 1

    first_char = unit.brace_shadow[j].lstrip()[0]
    if first_char == "{":
        depth = 0
        seen = False
        for k in range(j, len(unit.lines)):
            for ch in unit.brace_shadow[k]:
                if ch == "{":
                    depth += 1
                    seen = True
                elif ch == "}":
                    depth -= 1
                if seen and depth == 0:
                    return StructuredBlock(start_line=j, end_line=k, form="braced")
        raise fail(j + 1, "end of file before block closes")

    # Single statement: ends at ';' outside parens/braces, or when a brace
    # group opened within the statement closes (e.g. a loop body).
    paren = 0
    brace = 0
    for k in range(j, len(unit.lines)):
        for ch in unit.brace_shadow[k]:
            if ch == "(":
                paren += 1
            elif ch == ")":
                paren -= 1
            elif ch == "{":
                brace += 1
            elif ch == "}":
                brace -= 1
                if brace == 0:
                    return StructuredBlock(start_line=j, end_line=k, form="single_statement")
            elif ch == ";" and paren == 0 and brace == 0:
                return StructuredBlock(start_line=j, end_line=k, form="single_statement")
    raise fail(j + 1, "end of file before statement completes")


_FOR_START_RE = re.compile(r"^\s*for\s*\(")
_INIT_RE = re.compile(
    r"^\s*(?:(?P<type>" + _KNOWN_BASE + r")\s+)?(?P<var>[A-Za-z_]\w*)\s*=\s*(?P<lb>.+?)\s*$",
    re.S,
)
_COND_RE = re.compile(r"^\s*(?P<var>[A-Za-z_]\w*)\s*(?P<cmp><=|<)(?P<ub>[^<].*?)\s*$", re.S)
_INCR_RES = (
    re.compile(r"^\s*(?P<var>[A-Za-z_]\w*)\s*\+\+\s*$"),
    re.compile(r"^\s*\+\+\s*(?P<var>[A-Za-z_]\w*)\s*$"),
    re.compile(r"^\s*(?P<var>[A-Za-z_]\w*)\s*\+=\s*(?P<step>.+?)\s*$", re.S),
)
_DECR_RE = re.compile(r"--|-=|\*=|/=|>>=|<<=")


def parse_canonical_loop(unit: TranslationUnit, header_line: int) -> LoopHeader:
    """Parse `for (ident = lb; ident </<= ub; ident++/+=s)` at header_line."""
    line = unit.lines[header_line]
    shadow = unit.code_shadow[header_line]
    if not _FOR_START_RE.match(shadow):
        raise fail(header_line + 1, "directive block does not start with a for loop")
    open_idx = shadow.index("(")
    depth = 0
    close_idx = None
    for j in range(open_idx, len(shadow)):
        if shadow[j] == "(":
            depth += 1
        elif shadow[j] == ")":
            depth -= 1
            if depth == 0:
                close_idx = j
                break
    if close_idx is None:
        raise fail(header_line + 1, "for loop header must fit on one line")
    header = line[open_idx + 1 : close_idx]
    parts = _split_top_level(header, ";")
    if len(parts) != 3:
        raise fail(header_line + 1, "non-canonical loop: header needs exactly two ';'")
    init_text, cond_text, incr_text = parts

    if "," in _split_top_level(init_text, ",")[0] or len(_split_top_level(init_text, ",")) > 1:
        raise fail(header_line + 1, "non-canonical loop: comma in init clause")
    im = _INIT_RE.match(init_text)
    if not im:
        raise fail(header_line + 1, f"non-canonical loop: cannot parse init '{init_text.strip()}'")
    cm = _COND_RE.match(cond_text)
    if not cm:
        raise fail(
            header_line + 1,
            f"non-canonical loop: condition must be '<' or '<=' ('{cond_text.strip()}')",
        )
    if cm.group("var") != im.group("var"):
        raise fail(header_line + 1, "non-canonical loop: condition tests a different variable")

    if _DECR_RE.search(incr_text):
        raise fail(
            header_line + 1,
            f"non-canonical loop: only increasing loops are supported ('{incr_text.strip()}')",
        )
    step = None
    for rx in _INCR_RES:
        xm = rx.match(incr_text)
        if xm:
            if xm.group("var") != im.group("var"):
                raise fail(header_line + 1, "non-canonical loop: increment of a different variable")
            step = xm.groupdict().get("step", "1") or "1"
            break
    if step is None:
        raise fail(
            header_line + 1, f"non-canonical loop: cannot parse increment '{incr_text.strip()}'"
        )
    step = step.strip()
    if INT_LITERAL_RE.match(step) and int(step) <= 0:
        raise fail(header_line + 1, "non-canonical loop: step must be strictly positive")

    decl_type = im.group("type")
    return LoopHeader(
        var=im.group("var"),
        lower_bound=im.group("lb").strip(),
        upper_bound=cm.group("ub").strip(),
        comparison=cm.group("cmp"),
        step=step,
        header_line=header_line,
        decl_type=re.sub(r"\s+", " ", decl_type) if decl_type else None,
    )


def parse_pragmas(
    unit: TranslationUnit, serial_fallback: bool = False
) -> list[Diagnostic]:
    """Parse every located pragma and extract its block, in place.

    Returns collected diagnostics. Without serial_fallback the first error
    is still collected (not raised) so callers can report all of them.
    """
    diags: list[Diagnostic] = []
    for lp in unit.pragmas:
        try:
            lp.directive = parse_directive(lp.text, lp.line_index)
            lp.block = extract_structured_block(unit, lp.line_index)
        except DiagnosticError as exc:
            if serial_fallback:
                lp.elided = True
                d = exc.diagnostic
                diags.append(warning(d.line, d.message + " [kept sequential]"))
            else:
                diags.append(exc.diagnostic)
    return diags
