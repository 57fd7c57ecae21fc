"""Command-line front end: build codes, run checks, sweeps and optimization.

Exit codes: 0 on success (and on passing checks), 1 when a check or
optimization run fails its tolerance, 2 on usage errors.  Every emitted
artifact embeds the tool version and the generating configuration; the
default optimizer seed can be set through the BOSONICQEC_SEED environment
variable.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import __version__
from . import codes as cd
from . import metrics as mt
from . import optimizer as op
from . import qec, serialize
from .fock import identity, mode_operators, operator_power

SEED_ENV = "BOSONICQEC_SEED"

_ERROR_TOKEN = re.compile(r"^(I|ad|a|n)(\d+)?$")
_GEN_FACTOR = re.compile(r"^(ad|a|n)(?:\^(\d+))?$")


def parse_error_spec(spec: str, cutoff: int):
    """Comma-separated tokens from {I, a, aK, ad, adK, n, nK} to operators."""
    ops = mode_operators(cutoff)
    table = {"a": ops["annihilation"], "ad": ops["creation"], "n": ops["number"]}
    out = []
    for token in spec.split(","):
        token = token.strip()
        m = _ERROR_TOKEN.match(token)
        if not m:
            raise ValueError(f"bad error token {token!r}")
        base, power = m.group(1), int(m.group(2) or 1)
        if base == "I":
            if m.group(2):
                raise ValueError("identity token takes no power")
            out.append(identity(cutoff))
        else:
            out.append(operator_power(table[base], power))
    return out


def parse_generators(spec: str):
    """Classification grammar 'monomial-sum:order;...' to (monomials, order).

    Monomials multiply factors from {n, a, ad} with optional ^K powers; n
    counts as one creation and one annihilation.
    """
    gens = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ValueError(f"generator {chunk!r} missing ':order'")
        expr, order_s = chunk.rsplit(":", 1)
        order = int(order_s)
        monomials = []
        for mono in expr.split("+"):
            j = k = 0
            for factor in mono.strip().split("*"):
                m = _GEN_FACTOR.match(factor.strip())
                if not m:
                    raise ValueError(f"bad monomial factor {factor!r}")
                base, power = m.group(1), int(m.group(2) or 1)
                if base == "n":
                    j += power
                    k += power
                elif base == "ad":
                    j += power
                else:
                    k += power
            monomials.append((j, k))
        gens.append((monomials, order))
    if not gens:
        raise ValueError("empty generator spec")
    return gens


def parse_code_specs(spec: str):
    """Sweep code list: 'naive' and 'binomial:N:S' entries."""
    codes = []
    for token in spec.split(","):
        token = token.strip()
        if token == "naive":
            codes.append(cd.naive_code())
        elif token.startswith("binomial:"):
            parts = token.split(":")
            if len(parts) != 3:
                raise ValueError(f"binomial spec {token!r} must be binomial:N:S")
            codes.append(cd.binomial_code(int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"unknown sweep code {token!r}")
    return codes


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _build_code(args) -> cd.Code:
    fam = args.family
    if fam == "binomial":
        return cd.binomial_code(args.N, args.S, cutoff=args.cutoff)
    if fam == "binomial-dual":
        return cd.binomial_dual_basis(args.N, args.S, cutoff=args.cutoff)
    if fam == "qudit":
        return cd.qudit_binomial_code(args.N, args.S, args.d, cutoff=args.cutoff)
    if fam == "cat":
        return cd.cat_code(args.beta, cutoff=args.cutoff)
    if fam == "two-mode":
        return cd.two_mode_code(args.N, args.S, cutoff=args.cutoff)
    if fam == "naive":
        return cd.naive_code(cutoff=args.cutoff or 4)
    if fam == "opt":
        return cd.optimized_codes(args.which, cutoff=args.cutoff)
    raise ValueError(f"unknown family {fam!r}")


def cmd_code_build(args) -> int:
    code = _build_code(args)
    config = {
        "command": "code build",
        "family": args.family,
        "N": args.N, "S": args.S, "d": args.d,
        "beta": args.beta, "which": args.which, "cutoff": args.cutoff,
    }
    doc = serialize.envelope({"code": serialize.code_to_dict(code)}, config)
    _emit(doc, args.out)
    return 0


def cmd_check(args) -> int:
    code = serialize.load_code(args.code)
    errors = parse_error_spec(args.errors, code.cutoff)
    report = qec.kl_matrix(code, errors, tolerance=args.tolerance)
    doc = serialize.envelope(
        {
            "passed": report.passed,
            "offdiag_defect": report.offdiag_defect,
            "worddep_defect": report.worddep_defect,
            "tolerance": report.tolerance,
            "alpha": [[[z.real, z.imag] for z in row] for row in report.alpha],
        },
        {"command": "check", "code": args.code, "errors": args.errors},
    )
    _emit(doc, args.out)
    return 0 if report.passed else 1


def cmd_classify(args) -> int:
    gens = parse_generators(args.gens)
    params = qec.required_code_params(gens)
    doc = serialize.envelope(
        {"L": params.L, "G": params.G, "N": params.N, "S": params.S},
        {"command": "classify", "gens": args.gens},
    )
    _emit(doc, args.out)
    return 0


def cmd_sweep(args) -> int:
    codes = parse_code_specs(args.codes)
    grid = np.geomspace(args.dt_min, args.dt_max, args.points)
    rows = mt.sweep_infidelity(codes, grid)
    config = {
        "command": "sweep", "codes": args.codes,
        "dt_min": args.dt_min, "dt_max": args.dt_max, "points": args.points,
    }
    serialize.write_sweep_csv(rows, args.out, config)
    return 0


def cmd_optimize(args) -> int:
    problem = op.OptimizationProblem(
        L=args.L, G=args.G, cutoff=args.cutoff,
        tolerance_kl=args.tolerance_kl, restarts=args.restarts, seed=args.seed,
    )
    result = op.optimize_code(problem)
    config = {
        "command": "optimize", "L": args.L, "G": args.G, "cutoff": args.cutoff,
        "restarts": args.restarts, "tolerance_kl": args.tolerance_kl,
    }
    doc = serialize.envelope(
        {
            "code": serialize.code_to_dict(result.code),
            "optimization": {
                "objective": result.objective,
                "kl_defect": result.kl_defect,
                "converged": result.converged,
                "seed": result.seed,
                "restarts": [
                    {
                        "restart": rec.restart,
                        "objective": rec.objective,
                        "kl_defect": rec.kl_defect,
                        "feasible": rec.feasible,
                    }
                    for rec in result.restart_log
                ],
            },
        },
        config,
        seed=args.seed,
    )
    _emit(doc, args.out)
    return 0 if result.converged else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonicqec",
        description="Bosonic quantum error correction toolkit (rates in units "
                    "of kappa, timesteps in units of 1/kappa).",
    )
    parser.add_argument("--version", action="version", version=f"bosonicqec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_code = sub.add_parser("code", help="code-word utilities")
    code_sub = p_code.add_subparsers(dest="code_command", required=True)
    p_build = code_sub.add_parser("build", help="construct and serialize a code")
    p_build.add_argument("--family", required=True,
                         choices=["binomial", "binomial-dual", "qudit", "cat",
                                  "two-mode", "naive", "opt"])
    p_build.add_argument("--N", type=int, default=1)
    p_build.add_argument("--S", type=int, default=1)
    p_build.add_argument("--d", type=int, default=3, help="qudit dimension")
    p_build.add_argument("--beta", type=float, default=2.0, help="cat amplitude")
    p_build.add_argument("--which", choices=["sqrt17", "sqrt21"], default="sqrt17")
    p_build.add_argument("--cutoff", type=int, default=None)
    p_build.add_argument("--out", default=None)
    p_build.set_defaults(func=cmd_code_build)

    p_check = sub.add_parser("check", help="Knill-Laflamme verification of a code file")
    p_check.add_argument("--code", required=True)
    p_check.add_argument("--errors", required=True,
                         help="comma-separated tokens: I, a, aK, ad, adK, n, nK")
    p_check.add_argument("--tolerance", type=float, default=1e-9)
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(func=cmd_check)

    p_cls = sub.add_parser("classify", help="minimal code orders for Lindblad generators")
    p_cls.add_argument("--gens", required=True,
                       help="semicolon-separated 'monomial-sum:order', e.g. 'n*a+ad:1;a:2'")
    p_cls.add_argument("--out", default=None)
    p_cls.set_defaults(func=cmd_classify)

    p_sweep = sub.add_parser("sweep", help="infidelity-rate sweep to CSV")
    p_sweep.add_argument("--codes", default="naive,binomial:1:1,binomial:2:2,binomial:3:3")
    p_sweep.add_argument("--dt-min", type=float, default=1e-4)
    p_sweep.add_argument("--dt-max", type=float, default=1.0)
    p_sweep.add_argument("--points", type=int, default=40)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_opt = sub.add_parser("optimize", help="numerical code search")
    p_opt.add_argument("--L", type=int, required=True)
    p_opt.add_argument("--G", type=int, default=0)
    p_opt.add_argument("--cutoff", type=int, required=True)
    p_opt.add_argument("--restarts", type=int, default=32)
    p_opt.add_argument("--seed", type=int, default=int(os.environ.get(SEED_ENV, "0")))
    p_opt.add_argument("--tolerance-kl", type=float, default=1e-8)
    p_opt.add_argument("--out", default=None)
    p_opt.set_defaults(func=cmd_optimize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and args.dt_min > args.dt_max:
        parser.error("--dt-min must not exceed --dt-max")
    if args.command == "sweep" and args.points < 1:
        parser.error("--points must be >= 1")
    try:
        return args.func(args)
    except (ValueError, NotImplementedError, FileNotFoundError) as exc:
        parser.error(str(exc))
        return 2  # unreachable; parser.error exits


if __name__ == "__main__":
    sys.exit(main())
