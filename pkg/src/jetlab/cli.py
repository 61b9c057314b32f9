"""Command-line front end.

Exit codes: 0 pass/true, 1 checked-false, 2 I/O or usage error,
3 syntax error, 4 semantic error (unknown variable, ill-posed input).

Workspace files are line oriented::

    independent: x, t
    dependent: u
    eq: u_t = u*u_x + u_xxx
    chi flow: u*u_x + u_xxx
    form J: u dx + (1/2*u^2 + u_xx) dt
    L: (1/2*u_t^2 - 1/2*u_x^2) dx dt
    source: u_t - u*u_x - u_xxx

Names after the key (``chi flow``) are optional; flags such as ``--chi``
accept either a declared name or an inline expression.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .diffpoly import JetSpace
from .equation import DEFAULT_REWRITE_CAP, IllPosedSystem, PdeSystem, prolong_equation, reduce
from .foliation import (
    FoliationError,
    ce_derivations,
    curvature,
    exterior_derivative,
    exterior_derivative_coordinates,
    lr_structure_maps,
    parse_model,
    dbar,
    form_samples,
    lr_samples,
)
from .homotopy import (
    Report,
    TableError,
    TableFile,
    brackets_from,
    ce_report,
    check_a_infinity,
    check_l_infinity,
    check_lr_infinity,
    lr_data_from,
    lr_report,
    parse_tables,
)
from .horizontal import HorizontalForm, SourceForm, conservation_check, euler_lagrange, helmholtz_check
from .parser import ParseError, UnknownIdentifier, parse_expr, parse_form
from .symmetry import AnsatzTooLarge, GeneratingSection, find_symmetries, jacobi_bracket, symmetry_check

EXIT_OK, EXIT_FALSE, EXIT_IO, EXIT_SYNTAX, EXIT_SEMANTIC = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _syntax(where: str, exc: Exception) -> CliError:
    return CliError(EXIT_SYNTAX, f"{where}: {exc}")


def _semantic(where: str, exc: Exception | str) -> CliError:
    return CliError(EXIT_SEMANTIC, f"{where}: {exc}")


def _wrap(where: str, fn: Callable):
    try:
        return fn()
    except UnknownIdentifier as exc:
        raise _semantic(where, exc) from None
    except ParseError as exc:
        raise _syntax(where, exc) from None
    except (IllPosedSystem, FoliationError) as exc:
        raise _semantic(where, exc) from None


# -- workspace ----------------------------------------------------------------

@dataclass
class Workspace:
    space: JetSpace
    system: PdeSystem | None
    sections: dict[str, GeneratingSection] = field(default_factory=dict)
    forms: dict[str, HorizontalForm] = field(default_factory=dict)
    lagrangians: dict[str, HorizontalForm] = field(default_factory=dict)
    sources: dict[str, SourceForm] = field(default_factory=dict)

    def section(self, text: str, where: str = "--chi") -> GeneratingSection:
        if text in self.sections:
            return self.sections[text]
        return parse_section(text, self.space, where)

    def form(self, text: str, where: str = "--form") -> HorizontalForm:
        if text in self.forms:
            return self.forms[text]
        return parse_hform(text, self.space, where)

    def lagrangian(self, text: str | None, where: str = "--L") -> HorizontalForm:
        if text is None:
            return _only(self.lagrangians, "L")
        if text in self.lagrangians:
            return self.lagrangians[text]
        return parse_hform(text, self.space, where)

    def source(self, text: str | None, where: str = "--source") -> SourceForm:
        if text is None:
            return _only(self.sources, "source")
        if text in self.sources:
            return self.sources[text]
        return parse_source(text, self.space, where)

    def require_system(self) -> PdeSystem:
        if self.system is None:
            raise CliError(EXIT_SEMANTIC, "workspace declares no equations")
        return self.system


def _only(table: dict, key: str):
    if len(table) != 1:
        raise CliError(EXIT_IO, f"give --{key} (workspace has {len(table)} '{key}:' entries)")
    return next(iter(table.values()))


def _split_top(text: str) -> list[str]:
    """Split on commas outside parentheses."""
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def parse_section(text: str, space: JetSpace, where: str) -> GeneratingSection:
    comps = _split_top(text)
    if len(comps) != space.m:
        raise _semantic(where, f"section has {len(comps)} components, expected {space.m}")
    return GeneratingSection(_wrap(where, lambda c=c: parse_expr(c, space)) for c in comps)


def parse_source(text: str, space: JetSpace, where: str) -> SourceForm:
    comps = _split_top(text)
    if len(comps) != space.m:
        raise _semantic(where, f"source form has {len(comps)} components, expected {space.m}")
    return SourceForm(_wrap(where, lambda c=c: parse_expr(c, space)) for c in comps)


def parse_hform(text: str, space: JetSpace, where: str) -> HorizontalForm:
    degree, comps = _wrap(where, lambda: parse_form(text, space))
    return HorizontalForm(space.n, degree, comps)


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


WORKSPACE_KEYS = ("independent", "dependent", "eq", "chi", "form", "L", "source")


def load_workspace(path: str | Path, rewrite_cap: int = DEFAULT_REWRITE_CAP) -> Workspace:
    text = _read(path)
    indep: list[str] | None = None
    dep: list[str] | None = None
    pending: list[tuple[int, str, str | None, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise CliError(EXIT_SYNTAX, f"{path}:{lineno}: expected 'key: value'")
        words = head.split()
        if not words or words[0] not in WORKSPACE_KEYS or len(words) > 2:
            raise CliError(EXIT_SYNTAX, f"{path}:{lineno}: unknown key {head.strip()!r}")
        key, name = words[0], (words[1] if len(words) == 2 else None)
        if key == "independent":
            indep = _names(rest)
        elif key == "dependent":
            dep = _names(rest)
        else:
            pending.append((lineno, key, name, rest.strip()))
    if indep is None or dep is None:
        raise CliError(EXIT_SYNTAX, f"{path}: both 'independent:' and 'dependent:' are required")
    try:
        space = JetSpace(indep, dep)
    except ValueError as exc:
        raise CliError(EXIT_SEMANTIC, f"{path}: {exc}") from None
    ws = Workspace(space, None)
    equations = []
    counters: dict[str, int] = {}
    for lineno, key, name, rest in pending:
        where = f"{path}:{lineno}"
        if key == "eq":
            lhs, eq, rhs = rest.partition("=")
            if not eq or "=" in rhs:
                raise CliError(EXIT_SYNTAX, f"{where}: equation needs exactly one '='")
            lhs_poly = _wrap(where, lambda: parse_expr(lhs, space))
            if len(lhs_poly.terms) != 1 or next(iter(lhs_poly.terms.values())) != 1:
                raise CliError(EXIT_SYNTAX, f"{where}: left side must be a bare derivative")
            mono = next(iter(lhs_poly.terms))
            if len(mono) != 1 or mono[0][1] != 1 or mono[0][0].is_independent:
                raise CliError(EXIT_SYNTAX, f"{where}: left side must be a bare derivative")
            equations.append((mono[0][0], _wrap(where, lambda: parse_expr(rhs, space))))
            continue
        counters[key] = counters.get(key, 0) + 1
        label = name or f"{key}{counters[key]}"
        tables = {"chi": ws.sections, "form": ws.forms, "L": ws.lagrangians, "source": ws.sources}
        if label in tables[key]:
            raise CliError(EXIT_SEMANTIC, f"{where}: duplicate name {label!r}")
        if key == "chi":
            ws.sections[label] = parse_section(rest, space, where)
        elif key == "form":
            ws.forms[label] = parse_hform(rest, space, where)
        elif key == "L":
            ws.lagrangians[label] = parse_hform(rest, space, where)
        else:
            ws.sources[label] = parse_source(rest, space, where)
    if equations:
        ws.system = _wrap(str(path), lambda: PdeSystem(space, tuple(equations), rewrite_cap=rewrite_cap))
    return ws


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


# -- output -------------------------------------------------------------------

@dataclass
class Outcome:
    ok: bool
    records: list[tuple[str, str]] = field(default_factory=list)
    verdict: bool = True  # whether the command renders a pass/fail line

    def add(self, key: str, value) -> None:
        self.records.append((key, str(value)))


def render(command: str, out: Outcome, fmt: str) -> str:
    lines = []
    if fmt == "machine":
        lines.append(f"command={command}")
        if out.verdict:
            lines.append(f"status={'pass' if out.ok else 'fail'}")
        lines.extend(f"{k}={v}" for k, v in out.records)
    else:
        if out.verdict:
            lines.append(f"{command}: {'PASS' if out.ok else 'FAIL'}")
        lines.extend(f"{k} = {v}" for k, v in out.records)
    return "\n".join(lines) + "\n"


def _report_records(out: Outcome, report: Report, limit: int = 20) -> None:
    out.add("checked", report.checked)
    out.add("failures", len(report.failures))
    for i, f in enumerate(report.failures[:limit], start=1):
        out.add(f"failure[{i}]", f.describe())


# -- commands -----------------------------------------------------------------

def cmd_reduce(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    sys_ = ws.require_system()
    p = _wrap("--expr", lambda: parse_expr(args.expr, ws.space))
    nf = _wrap("reduce", lambda: reduce(p, sys_, args.rewrite_cap))
    out = Outcome(True, verdict=False)
    out.add("reduced", ws.space.format(nf))
    return out


def cmd_prolong(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    sys_ = ws.require_system()
    try:
        J = ws.space.parse_suffix(args.by) if args.by else ()
    except KeyError:
        raise _semantic("--by", f"unknown derivative letters {args.by!r}") from None
    which = range(len(sys_.equations)) if args.eq is None else [args.eq - 1]
    out = Outcome(True, verdict=False)
    for a in which:
        if not 0 <= a < len(sys_.equations):
            raise _semantic("--eq", f"equation {a + 1} does not exist")
        v, rhs = _wrap("prolong", lambda: prolong_equation(sys_, a, J))
        out.add(ws.space.var_name(v), ws.space.format(rhs))
    return out


def cmd_symmetry_check(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    sys_ = ws.require_system()
    chi = ws.section(args.chi)
    ok, residuals = _wrap("symmetry-check", lambda: symmetry_check(sys_, chi))
    out = Outcome(ok)
    out.add("chi", chi.format(ws.space))
    for a, r in enumerate(residuals, start=1):
        out.add(f"residual[{a}]", ws.space.format(r))
    return out


def cmd_symmetry_find(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    sys_ = ws.require_system()
    try:
        basis = _wrap("symmetry-find", lambda: find_symmetries(sys_, args.max_order, args.max_degree))
    except AnsatzTooLarge as exc:
        raise _semantic("symmetry-find", exc) from None
    out = Outcome(True, verdict=False)
    out.add("max_order", args.max_order)
    out.add("max_degree", args.max_degree)
    out.add("dimension", len(basis))
    for i, chi in enumerate(basis, start=1):
        out.add(f"chi[{i}]", chi.format(ws.space))
    return out


def cmd_bracket(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    chi, psi = ws.section(args.chi, "--chi"), ws.section(args.psi, "--psi")
    br = jacobi_bracket(chi, psi)
    out = Outcome(True, verdict=False)
    out.add("bracket", br.format(ws.space))
    if ws.system is not None:
        ok, _ = _wrap("bracket", lambda: symmetry_check(ws.system, br))
        out.add("symmetry", "true" if ok else "false")
    return out


def cmd_conserve(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    sys_ = ws.require_system()
    J = ws.form(args.form)
    if J.degree != ws.space.n - 1:
        raise _semantic("--form", f"a current is an {ws.space.n - 1}-form, got degree {J.degree}")
    ok, residual = _wrap("conserve", lambda: conservation_check(sys_, J))
    out = Outcome(ok)
    out.add("current", J.format(ws.space))
    out.add("residual", ws.space.format(residual))
    return out


def cmd_euler_lagrange(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    L = ws.lagrangian(args.L)
    try:
        E = euler_lagrange(L, ws.space.m)
    except ValueError as exc:
        raise _semantic("--L", exc) from None
    out = Outcome(True, verdict=False)
    for a, e in enumerate(E, start=1):
        out.add(f"E[{a}]", ws.space.format(e))
    return out


def cmd_helmholtz(args) -> Outcome:
    ws = load_workspace(args.file, args.rewrite_cap)
    E = ws.source(args.source)
    ok, diff = helmholtz_check(E)
    out = Outcome(ok)
    for a in range(diff.rows):
        for b in range(diff.cols):
            if diff.entry(a, b):
                out.add(f"mismatch[{a + 1},{b + 1}]", diff.format_entry(a, b, ws.space))
    return out


def _tables(path) -> TableFile:
    text = _read(path)
    try:
        return parse_tables(text)
    except TableError as exc:
        raise CliError(EXIT_SYNTAX, f"{path}: {exc}") from None


def _table_semantic(path, fn):
    try:
        return fn()
    except TableError as exc:
        raise CliError(EXIT_SEMANTIC, f"{path}: {exc}") from None


def cmd_linfty(args) -> Outcome:
    tf = _tables(args.file)

    def run():
        V = tf.space("basis")
        _only_keys(tf, "l")
        brackets = brackets_from(tf, "l", lambda k: [V] * k, V, True)
        return check_l_infinity(V, brackets, args.max_k)

    report = _table_semantic(args.file, run)
    out = Outcome(report.passed)
    out.add("max_k", args.max_k)
    _report_records(out, report)
    return out


def cmd_ainfty(args) -> Outcome:
    tf = _tables(args.file)

    def run():
        U = tf.space("basis")
        _only_keys(tf, "a")
        ops = brackets_from(tf, "a", lambda k: [U] * k, U, False)
        return check_a_infinity(U, ops, args.max_k)

    report = _table_semantic(args.file, run)
    out = Outcome(report.passed)
    out.add("max_k", args.max_k)
    _report_records(out, report)
    return out


def _only_keys(tf, letter: str) -> None:
    for key in tf.entries:
        if not (key[:1] == letter and key[1:].isdigit()):
            raise TableError(f"unexpected key '{key}' (expected {letter}<k>)")


def cmd_lrinfty(args) -> Outcome:
    tf = _tables(args.file)
    report = _table_semantic(args.file, lambda: check_lr_infinity(lr_data_from(tf), args.max_k))
    out = Outcome(report.passed)
    out.add("max_k", args.max_k)
    _report_records(out, report)
    return out


def cmd_foliation(args) -> Outcome:
    text = _read(args.file)
    try:
        model = parse_model(text)
    except ParseError as exc:
        raise _syntax(str(args.file), exc) from None
    except FoliationError as exc:
        raise _semantic(str(args.file), exc) from None
    out = Outcome(True)
    out.add("coords", ", ".join(model.space.independents))
    for i in range(model.N):
        for j in range(i + 1, model.N):
            br = [
                (model.structure[k][i][j], model.frame_name(k)) for k in range(model.N) if model.structure[k][i][j]
            ]
            if br:
                terms = " + ".join(
                    f"{model.space.format(c)}*{n}" if model.space.format(c) != "1" else n for c, n in br
                ).replace("+ -", "- ")
                out.add(f"[{model.frame_name(i)},{model.frame_name(j)}]", terms)
    out.add("R", curvature(model).format())

    samples = form_samples(model, args.max_degree)
    bad = [s.label for s in samples if exterior_derivative(s.value) != exterior_derivative_coordinates(s.value)]
    out.add("d_matches_coordinates", "true" if not bad else f"false ({bad[0]})")
    split_bad = [s.label for s in samples if sum(ce_derivations(model, s.value)[1:], ce_derivations(model, s.value)[0]) != exterior_derivative(s.value)]
    out.add("d1+d2+d3=d", "true" if not split_bad else f"false ({split_bad[0]})")
    derivs = [lambda w, i=i: ce_derivations(model, w)[i] for i in range(3)]
    ce = ce_report(samples, derivs, lambda a, b: a.wedge(b))
    out.add("ce_relations", "true" if ce.passed else f"false ({ce.first_failure.describe()})")

    maps = lr_structure_maps(model)
    Ls, As = lr_samples(model, min(args.max_degree, 1))
    lr = lr_report(Ls, As, maps.l_ops(), maps.m_ops(), maps.product, maps.action, args.max_k, a_differential=dbar)
    out.add("lr_checked", lr.checked)
    out.add("lr_infinity", "true" if lr.passed else f"false ({lr.first_failure.describe()})")
    out.ok = not bad and not split_bad and ce.passed and lr.passed
    return out


COMMANDS: dict[str, tuple[Callable, str]] = {
    "reduce": (cmd_reduce, "on-shell normal form of --expr"),
    "prolong": (cmd_prolong, "prolong equation --eq along --by"),
    "symmetry-check": (cmd_symmetry_check, "test a generating section --chi"),
    "symmetry-find": (cmd_symmetry_find, "polynomial symmetries within --max-order/--max-degree"),
    "bracket": (cmd_bracket, "higher Jacobi bracket of --chi and --psi"),
    "conserve": (cmd_conserve, "test a conserved current --form"),
    "euler-lagrange": (cmd_euler_lagrange, "Euler-Lagrange expressions of --L"),
    "helmholtz": (cmd_helmholtz, "variationality test of --source"),
    "linfty-check": (cmd_linfty, "L-infinity identities of a table file"),
    "ainfty-check": (cmd_ainfty, "A-infinity identities of a table file"),
    "lrinfty-check": (cmd_lrinfty, "LR-infinity identities of a table file"),
    "foliation-check": (cmd_foliation, "structure checks of a foliation model file"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetlab", description="Symbolic jet-space and homotopy-algebra checks.")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument("--rewrite-cap", type=int, default=DEFAULT_REWRITE_CAP)
        p.add_argument("--max-order", type=int, default=2)
        p.add_argument("--max-degree", type=int, default=1)
        p.add_argument("--max-k", type=int, default=3)
        if name == "reduce":
            p.add_argument("--expr", required=True)
        elif name == "prolong":
            p.add_argument("--eq", type=int, help="1-based equation number (default: all)")
            p.add_argument("--by", default="", help="derivative letters, e.g. x or xt")
        elif name == "symmetry-check":
            p.add_argument("--chi", required=True)
        elif name == "bracket":
            p.add_argument("--chi", required=True)
            p.add_argument("--psi", required=True)
        elif name == "conserve":
            p.add_argument("--form", required=True)
        elif name == "euler-lagrange":
            p.add_argument("--L")
        elif name == "helmholtz":
            p.add_argument("--source")
    return parser


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """Run a command; returns ``(exit code, stdout text, stderr text)``."""
    parser = build_parser()
    out_buf, err_buf = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out_buf), contextlib.redirect_stderr(err_buf):
            args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0), out_buf.getvalue(), err_buf.getvalue()
    for flag in ("max_order", "max_degree", "max_k", "rewrite_cap"):
        if getattr(args, flag) < 0:
            return EXIT_IO, "", f"error: --{flag.replace('_', '-')} must be nonnegative\n"
    fn, _ = COMMANDS[args.command]
    try:
        out = fn(args)
    except CliError as exc:
        return exc.code, "", f"error: {exc}\n"
    code = EXIT_OK if out.ok else EXIT_FALSE
    return code, render(args.command, out, args.format), ""


def main(argv: Sequence[str] | None = None) -> int:
    code, stdout, stderr = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(stdout)
    sys.stderr.write(stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
