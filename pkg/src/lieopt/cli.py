"""Command-line entry point: ``lieopt <subcommand> [options]``.

Exit status is 0 on success, 1 when a verification fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from .adjoint import NonIntegerSpectrum, general_adjoint_matrix, render_adjoint_table, render_matrix, adjoint_table
from .algebra import AlgebraError, LieAlgebra, commutator_table, load_algebra, render_grid
from .equivalence import EquivalenceQuery, ModeMismatch, SolverConfig, solve_with_elements, verify_optimal_system
from .exppoly import ParseError
from .expr import parse_rational_function, coefficient_names
from .fixtures import CASES, DEFAULT_PARAMETERS, SYSTEMS, builtin_algebra, fixed_elements, get_case
from .fixtures.solutions import (ANNULUS, SECTOR, SOLUTIONS, GridSpec, LineGrid, SingularGrid, ns_residual,
                                 reduced_ode_residual)
from .fixtures.systems import Representative
from .invariants import (assemble_rational_invariants, check_invariant, discover_semi_invariants,
                         invariant_pde_system)
from .subalgebra import (ConstraintError, DegeneratePair, determined_equations, pair_from_elements,
                         parse_constraint, sample_constrained_pairs)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _emit(args, text: str, doc) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _algebra(args) -> LieAlgebra:
    name = args.algebra
    if name in SYSTEMS:
        return builtin_algebra(name)
    path = Path(name)
    if not path.exists():
        raise InputError(f"unknown algebra {name!r}: not a built-in name ({', '.join(SYSTEMS)}) or a file")
    return load_algebra(path, name=path.stem)


def _elements(args):
    return fixed_elements(args.algebra) if args.algebra in SYSTEMS else ()


def _cases(args):
    return CASES.get(args.algebra, [])


def _case(args):
    try:
        return get_case(args.algebra, args.case)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None


def _constraint(args, L):
    if getattr(args, "case", None):
        return _case(args).constraint
    if getattr(args, "constraint", None):
        text = args.constraint
        p = Path(text)
        if p.exists():
            text = p.read_text(encoding="utf-8")
        return parse_constraint(text, L.dim)
    return None


# -- subcommands ----------------------------------------------------------------------

def cmd_tables(args) -> int:
    L = _algebra(args)
    comm = commutator_table(L)
    adj = adjoint_table(L)
    text = ("commutator table\n" + render_grid(list(L.basis), list(L.basis), comm, corner="[,]")
            + "\n\nadjoint table\n" + render_adjoint_table(L))
    _emit(args, text, {"algebra": L.name, "basis": list(L.basis), "commutator": comm, "adjoint": adj})
    return EXIT_OK


def _parse_order(text: Optional[str], n: int):
    if not text:
        return None
    try:
        order = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"--order must be a comma-separated permutation of 1..{n}") from None
    if sorted(order) != list(range(1, n + 1)):
        raise InputError(f"--order must be a permutation of 1..{n}, got {text!r}")
    return order


def cmd_adjoint_matrix(args) -> int:
    L = _algebra(args)
    G = general_adjoint_matrix(L, _parse_order(args.order, L.dim))
    cells = [[str(e) for e in row] for row in G.matrix]
    text = f"A = A_{' A_'.join(map(str, G.order))}\n" + render_matrix(G.matrix)
    _emit(args, text, {"algebra": L.name, "order": list(G.order), "variables": list(G.variables), "entries": cells})
    return EXIT_OK


def cmd_determined_eqs(args) -> int:
    L = _algebra(args)
    system = determined_equations(L)
    lines = system.lines()
    _emit(args, "\n".join(lines), {"algebra": L.name, "symbols": list(system.symbols), "equations": lines})
    return EXIT_OK


def cmd_invariant_pdes(args) -> int:
    L = _algebra(args)
    fields = invariant_pde_system(L, args.mode)
    lines = [f"{f.label}: {f.render()}" for f in fields]
    text = f"{len(fields)} equations ({args.mode} mode)\n" + "\n".join(lines)
    doc = {"algebra": L.name, "mode": args.mode, "count": len(fields),
           "fields": [{"label": f.label, "coefficients": [str(c) for c in f.coeffs], "equation": f.render()}
                      for f in fields]}
    _emit(args, text, doc)
    return EXIT_OK


def cmd_check_invariant(args) -> int:
    L = _algebra(args)
    phi = parse_rational_function(args.phi, coefficient_names(L.dim))
    constraint = _constraint(args, L)
    report = check_invariant(L, phi, args.mode, constraint, samples=args.samples, seed=args.seed)
    lines = [f"phi = {phi}", f"mode: {report.mode}", f"seed: {args.seed}"]
    for label, ok in report.exact.items():
        lines.append(f"  {label}: {'ok' if ok else 'FAIL'}")
    if report.fd_max_deviation is not None:
        lines.append(f"samples: {report.samples}")
        lines.append(f"max finite-difference deviation: {report.fd_max_deviation:.3e}")
        lines.append(f"max flow deviation: {report.flow_max_deviation:.3e}")
    lines.append("PASS" if report.passed else "FAIL")
    _emit(args, "\n".join(lines), {"phi": str(phi), "seed": args.seed, **report.to_json()})
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_discover_invariants(args) -> int:
    L = _algebra(args)
    constraint = _constraint(args, L)
    semis = discover_semi_invariants(L, args.mode, args.degree, constraint)
    invs = assemble_rational_invariants(semis)
    labels = [lbl for lbl, _ in semis[0].weights] if semis else []
    lines = [f"semi-invariants (degree <= {args.degree}, weights on {', '.join(labels)}):"]
    for s in semis:
        lines.append(f"  {s.poly}  [{', '.join(str(w) for _, w in s.weights)}]")
    lines.append("rational invariants:")
    lines.extend(f"  {f}" for f in invs)
    if not invs:
        lines.append("  (none)")
    doc = {"algebra": L.name, "mode": args.mode, "degree": args.degree, "labels": labels,
           "semi_invariants": [s.to_json() for s in semis], "invariants": [str(f) for f in invs]}
    _emit(args, "\n".join(lines), doc)
    return EXIT_OK


def _solver_config(args) -> SolverConfig:
    if args.starts < 0:
        raise InputError("--starts must be nonnegative")
    return SolverConfig(starts=args.starts, tolerance=args.tolerance, seed=args.seed)


def cmd_check_equivalent(args) -> int:
    L = _algebra(args)
    src = pair_from_elements(L, *args.source)
    tgt = pair_from_elements(L, *args.target)
    q = EquivalenceQuery.build(L, src, tgt, args.mode)
    v = solve_with_elements(L, q, _solver_config(args), elements=_elements(args))
    text = f"mode: {q.mode}\nseed: {args.seed}\n" + v.describe()
    _emit(args, text, {"query": q.to_json(), "seed": args.seed, **v.to_json()})
    return EXIT_OK if v.equivalent else EXIT_FAIL


def cmd_sample_case(args) -> int:
    L = _algebra(args)
    case = _case(args)
    samples = sample_constrained_pairs(L, case.constraint, args.count, args.seed)
    lines = [f"case {case.name} -> {case.representative} ({case.mode} mode), seed {args.seed}"]
    docs = []
    for s in samples:
        lines.append(f"  a = ({', '.join(map(str, s.pair.a))})  b = ({', '.join(map(str, s.pair.b))})  "
                     f"lambda = {s.lam}")
        docs.append({**s.pair.to_json(), "lambda": str(s.lam)})
    _emit(args, "\n".join(lines), {"case": case.name, "representative": case.representative, "seed": args.seed,
                                   "samples": docs})
    return EXIT_OK


def _load_system(args, L):
    if args.system == "builtin":
        if args.algebra not in SYSTEMS:
            raise InputError("--system builtin needs a built-in algebra")
        system, params = SYSTEMS[args.algebra], DEFAULT_PARAMETERS[args.algebra]
    else:
        try:
            doc = json.loads(Path(args.system).read_text(encoding="utf-8"))
            system = [Representative(r["label"], r["w1"], r["w2"], r["mode"], r.get("param"))
                      for r in doc["representatives"]]
            params = [Fraction(str(p)) for p in doc.get("parameters", [])]
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"cannot read system file {args.system!r}: {exc}") from None
    drop = set(args.drop or [])
    unknown = drop - {r.label for r in system}
    if unknown:
        raise InputError(f"--drop names unknown representatives: {sorted(unknown)}")
    return [r for r in system if r.label not in drop], params


def cmd_verify_optimal_system(args) -> int:
    L = _algebra(args)
    system, params = _load_system(args, L)
    cases = _cases(args)
    if args.case:
        known = {c.name for c in cases}
        missing = sorted(set(args.case) - known)
        if missing:
            raise InputError(f"unknown case(s) {missing} for {args.algebra}; known: {sorted(known)}")
    report = verify_optimal_system(L, system, cases, params, _solver_config(args), samples=args.samples,
                                   seed=args.seed, coverage=not args.no_coverage, pairwise=not args.no_pairwise,
                                   coverage_cases=args.case, elements=_elements(args))
    _emit(args, f"seed: {args.seed}\n" + report.render(), {"seed": args.seed, **report.to_json()})
    return EXIT_OK if report.passed else EXIT_FAIL


def _solution(args):
    name = args.solution
    if name not in SOLUTIONS:
        raise InputError(f"unknown solution {name!r}; known: {', '.join(SOLUTIONS)}")
    kwargs = {}
    if args.gamma is not None and name != "zero" and name != "ns_constant":
        kwargs["gamma"] = args.gamma
    if getattr(args, "sign", None) is not None and name == "ns_radial":
        kwargs["sign"] = args.sign
    return SOLUTIONS[name](**kwargs)


def cmd_ns_residual(args) -> int:
    sol = _solution(args)
    base = SECTOR if sol.identifier == "ns_tanh" else ANNULUS
    grid = GridSpec(**{**base.to_json(), "step": args.step, "order": args.order,
                       "richardson": not args.no_richardson})
    rep = ns_residual(sol, grid)
    ok = rep.max < args.tolerance
    text = (f"{sol.identifier} {sol.to_json()['params']}\nmax |residual| = {rep.max:.3e} at "
            f"(x, y, t) = ({', '.join(f'{v:.6g}' for v in rep.argmax)})\n{'PASS' if ok else 'FAIL'} "
            f"(tolerance {args.tolerance:g})")
    _emit(args, text, {**rep.to_json(), "tolerance": args.tolerance, "passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ode_residual(args) -> int:
    sol = _solution(args)
    lo, hi = (1.0, 4.0) if args.ode == "red1" else (-2.0, 2.0)
    grid = LineGrid(lo, hi, step=args.step, order=args.order, richardson=not args.no_richardson)
    gamma = args.gamma or "1"
    rep = reduced_ode_residual(args.ode, sol, grid, c=args.c, gamma=gamma, branch=args.branch)
    ok = rep.max < args.tolerance
    text = (f"{args.ode} with {sol.identifier} {sol.to_json()['params']}\nmax |residual| = {rep.max:.3e} at "
            f"xi = {rep.argmax[0]:.6g}\n{'PASS' if ok else 'FAIL'} (tolerance {args.tolerance:g})")
    _emit(args, text, {"ode": args.ode, **rep.to_json(), "tolerance": args.tolerance, "passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling and solver starts (default 0)")

    alg = argparse.ArgumentParser(add_help=False)
    alg.add_argument("--algebra", default="heat6", help="built-in name (heat6, ns4) or path to a JSON document")

    mode = argparse.ArgumentParser(add_help=False)
    mode.add_argument("--mode", choices=("zero", "nonzero"), default="zero", help="lambda = 0 or lambda != 0")

    case = argparse.ArgumentParser(add_help=False)
    case.add_argument("--case", help="registered case name, e.g. i, iia, 3 (heat6) or 2.1(ii) (ns4)")
    case.add_argument("--constraint", help="constraint JSON text or file")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--starts", type=int, default=64)
    solver.add_argument("--tolerance", type=float, default=1e-10, help="squared-residual threshold")

    p = argparse.ArgumentParser(prog="lieopt", description="Optimal systems of two-dimensional subalgebras.")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    s = sub.add_parser("tables", parents=[common, alg], help="commutator and adjoint tables")
    s.set_defaults(func=cmd_tables)
    s = sub.add_parser("adjoint-matrix", parents=[common, alg], help="general adjoint matrix A")
    s.add_argument("--order", help="factor order as a permutation, e.g. 1,2,3,4")
    s.set_defaults(func=cmd_adjoint_matrix)
    s = sub.add_parser("determined-eqs", parents=[common, alg], help="equations of [w1, w2] = lambda*w1")
    s.set_defaults(func=cmd_determined_eqs)
    s = sub.add_parser("invariant-pdes", parents=[common, alg, mode], help="PDE system for invariants")
    s.set_defaults(func=cmd_invariant_pdes)
    s = sub.add_parser("check-invariant", parents=[common, alg, mode, case], help="verify a rational invariant")
    s.add_argument("--phi", required=True, help="rational function of a1..an, b1..bn")
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_check_invariant)
    s = sub.add_parser("discover-invariants", parents=[common, alg, mode, case], help="semi-invariant search")
    s.add_argument("--degree", type=int, default=2)
    s.set_defaults(func=cmd_discover_invariants)
    s = sub.add_parser("check-equivalent", parents=[common, alg, solver], help="solve the equivalence equations")
    s.add_argument("--source", nargs=2, required=True, metavar=("W1", "W2"))
    s.add_argument("--target", nargs=2, required=True, metavar=("W1", "W2"))
    s.add_argument("--mode", choices=("zero", "nonzero"))
    s.set_defaults(func=cmd_check_equivalent)
    s = sub.add_parser("sample-case", parents=[common, alg], help="exact samples of a registered case")
    s.add_argument("--case", required=True)
    s.add_argument("--count", type=int, default=5)
    s.set_defaults(func=cmd_sample_case)
    s = sub.add_parser("verify-optimal-system", parents=[common, alg, solver], help="check a whole optimal system")
    s.add_argument("--system", default="builtin", help="'builtin' or a JSON file of representatives")
    s.add_argument("--drop", action="append", help="remove a representative by label (repeatable)")
    s.add_argument("--samples", type=int, default=50, help="coverage samples per case")
    s.add_argument("--no-coverage", action="store_true")
    s.add_argument("--no-pairwise", action="store_true", help="skip the pairwise separation stage")
    s.add_argument("--case", action="append", help="limit coverage to this case (repeatable)")
    s.set_defaults(func=cmd_verify_optimal_system)

    fd = argparse.ArgumentParser(add_help=False)
    fd.add_argument("--gamma", help="viscosity (default 1)")
    fd.add_argument("--order", type=int, default=6, help="finite-difference accuracy order")
    fd.add_argument("--no-richardson", action="store_true")
    s = sub.add_parser("ns-residual", parents=[common, fd], help="finite-difference residual of a solution")
    s.add_argument("--solution", default="ns_radial", choices=[k for k in SOLUTIONS if k.startswith("ns_")])
    s.add_argument("--sign", type=int, choices=(1, -1))
    s.add_argument("--step", type=float, default=1e-2)
    s.add_argument("--tolerance", type=float, default=1e-4)
    s.set_defaults(func=cmd_ns_residual)
    s = sub.add_parser("ode-residual", parents=[common, fd], help="residual of a reduced ODE")
    s.add_argument("--ode", choices=("red1", "red2"), required=True)
    s.add_argument("--solution", default=None, choices=["red1_F", "red2_G", "zero"])
    s.add_argument("--branch", type=int, choices=(1, -1), default=1, help="sign choice in red1")
    s.add_argument("--c", default="0", help="parameter c of red2")
    s.add_argument("--step", type=float, default=5e-2)
    s.add_argument("--tolerance", type=float, default=1e-6)
    s.set_defaults(func=cmd_ode_residual)
    return p


def main(argv: List[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    if getattr(args, "command", None) == "ode-residual" and args.solution is None:
        args.solution = "red1_F" if args.ode == "red1" else "red2_G"
    try:
        return args.func(args)
    except NonIntegerSpectrum as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, AlgebraError, ParseError, ConstraintError, ModeMismatch, DegeneratePair,
            SingularGrid, KeyError, ValueError, ZeroDivisionError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
