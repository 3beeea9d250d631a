"""Batch experiment runner.

Every experiment is a subcommand emitting CSV or JSON with deterministic
ordering and float formatting (15 significant digits); exact log values
are serialized as "q*log(p)" strings next to their float rendering.

Exit codes: 0 success, 2 parse error, 3 numeric non-convergence,
4 undecided branch present (partial results still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from .capacity import (
    capacity_bracket,
    lemniscate_chain,
    min_sample_gap,
    pairwise_distance_log,
)
from .equidist import (
    SetSequence,
    equidistribution_report,
    periodic_point_discriminant_identity,
)
from .errors import ArithDynError, NonConvergenceError, ParseError, UndecidedBranchError
from .heights import (
    DynSystem,
    canonical_height,
    is_preperiodic_rational,
    local_height_padic,
    log_capacity,
)
from .mandelbrot import (
    mandelbrot_capacity_partial,
    mandelbrot_escape_rate,
    mandelbrot_height,
)
from .places import LogAbs, Place, parse_place, parse_rational
from .polyq import GaloisSet, parse_poly
from .roots import sum_log_plus
from .symmetry import centroid, rotation_symmetry_order


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _fmt_logabs(v: LogAbs) -> str:
    parts = [f"{c}*log({p})" for p, c in v.terms]
    if v.approx is not None:
        parts.append(_fmt(v.approx))
    return " + ".join(parts) if parts else "0"


def _emit(rows: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _galois_set(text: str) -> GaloisSet:
    return GaloisSet.from_poly(parse_poly(text))


def cmd_height(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    S = _galois_set(args.set)
    hv = canonical_height(sys_, S, tol=args.tol)
    rows = [
        {
            "phi": args.phi,
            "set": args.set,
            "hhat": _fmt(hv.value),
            "error_bound": _fmt(hv.error_bound),
            "exact_part": _fmt_logabs(hv.exact_part),
        }
    ]
    _emit(rows, args.format, args.out)
    return 0


def cmd_local_height(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    S = _galois_set(args.set)
    rows = []
    code = 0
    for v in _places(args):
        if v.is_arch:
            from .heights import arch_heights_batch
            from .roots import complex_roots
            import numpy as np

            roots = complex_roots(S.poly)
            vals, errs = arch_heights_batch(
                sys_, np.array([r.value for r in roots]), args.tol
            )
            value = LogAbs.from_float(float(np.mean(vals)))
            rows.append(
                {
                    "place": str(v),
                    "local_height": _fmt(value.to_float()),
                    "exact": _fmt_logabs(value),
                }
            )
        else:
            try:
                value = local_height_padic(sys_, S, v.prime)
            except UndecidedBranchError as exc:
                rows.append({"place": str(v), "local_height": "", "exact": f"undecided: {exc}"})
                code = 4
                continue
            rows.append(
                {
                    "place": str(v),
                    "local_height": _fmt(value.to_float()),
                    "exact": _fmt_logabs(value),
                }
            )
    _emit(rows, args.format, args.out)
    return code


def _places(args) -> list[Place]:
    if not args.place:
        raise ParseError("empty place list")
    return [parse_place(p) for p in args.place]


def _circle_samples(count: int) -> list[complex]:
    return [
        complex(math.cos(2 * math.pi * k / count), math.sin(2 * math.pi * k / count))
        for k in range(count)
    ]


def _segment_samples(count: int) -> list[complex]:
    return [complex(-2.0 + 4.0 * k / (count - 1), 0.0) for k in range(count)]


def cmd_capacity(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi)) if args.phi else None
    rows = []
    if args.chain:
        if sys_ is None:
            raise ParseError("--chain needs --phi")
        v = parse_place(args.place[0]) if args.place else Place.archimedean()
        if v.is_arch:
            from .heights import _arch_escape_data

            r_esc, _, _ = _arch_escape_data(sys_)
            r0 = LogAbs.from_float(math.log(r_esc))
        else:
            from .heights import escape_valuation_threshold

            alpha = escape_valuation_threshold(sys_, v.prime)
            r0 = LogAbs.exact(-alpha, v.prime)
        chain = lemniscate_chain(sys_, v, r0, args.n_hi)
        limit = log_capacity(sys_, v)
        for est in chain:
            rows.append(
                {
                    "k": est.n_points,
                    "capacity": _fmt(math.exp(est.exact.to_float())),
                    "log_exact": _fmt_logabs(est.exact),
                    "log_limit": _fmt_logabs(limit),
                }
            )
    else:
        shape = args.shape
        samples = _circle_samples(512) if shape == "circle" else _segment_samples(1024)
        monic = parse_poly(args.monic) if args.monic else None
        if monic is None:
            monic = parse_poly("z^64") if shape == "circle" else None
            if monic is None:
                from .polyq import iterate

                monic = iterate(parse_poly("z^2-2"), 5)
        est = capacity_bracket(samples, args.n_points, monic)
        rows.append(
            {
                "shape": shape,
                "n_points": est.n_points,
                "lower": _fmt(est.lower),
                "upper": _fmt(est.upper),
                "sample_gap": _fmt(min_sample_gap(samples)),
            }
        )
    _emit(rows, args.format, args.out)
    return 0


def cmd_equidist(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    places = _places(args)
    if args.seq == "mu":
        seq = SetSequence("roots_of_unity", args.seq_p, args.n_lo, args.n_hi)
    elif args.seq == "periodic":
        seq = SetSequence("periodic", sys_, args.n_lo, args.n_hi)
    else:
        seq = SetSequence(
            "preimage", (sys_, parse_rational(args.seq_a)), args.n_lo, args.n_hi
        )
    report = equidistribution_report(
        seq, sys_, places, tol=args.tol, reference=args.reference
    )
    rows = []
    code = 0
    stats = dict(report.stats)
    for row in report.rows:
        if row.error is not None:
            rows.append(
                {
                    "n": row.n,
                    "N_n": "",
                    "hhat": "",
                    "place": "",
                    "dv_exact_coeff": "",
                    "dv_prime": "",
                    "dv_float": "",
                    "log_cv": "",
                    "gap": f"error: {row.error}",
                }
            )
            code = 4
            continue
        for g in row.gaps:
            coeff = ""
            prime = ""
            if g.dv.is_exact and len(g.dv.terms) == 1:
                prime = str(g.dv.terms[0][0])
                coeff = str(g.dv.terms[0][1])
            elif g.dv.is_exact_zero:
                coeff, prime = "0", ""
            entry = {
                "n": row.n,
                "N_n": row.cardinality,
                "hhat": _fmt(row.hhat.value),
                "place": str(g.place),
                "dv_exact_coeff": coeff,
                "dv_prime": prime,
                "dv_float": _fmt(g.dv.to_float()),
                "log_cv": _fmt(g.log_cv.to_float()),
                "gap": _fmt(g.gap.to_float()),
            }
            if row.n in stats:
                entry["ks"] = _fmt(stats[row.n].ks)
                entry["energy_gap"] = _fmt(stats[row.n].energy_gap)
            rows.append(entry)
    _emit(rows, args.format, args.out)
    return code


def cmd_pern_identity(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    rows = []
    for v in _places(args):
        lhs, rhs = periodic_point_discriminant_identity(sys_, args.n, v)
        rows.append(
            {
                "place": str(v),
                "n": args.n,
                "lhs": _fmt(lhs.to_float()),
                "rhs": _fmt(rhs.to_float()),
                "lhs_exact": _fmt_logabs(lhs),
                "rhs_exact": _fmt_logabs(rhs),
                "exact_equal": str(lhs == rhs) if lhs.is_exact and rhs.is_exact else "",
            }
        )
    _emit(rows, args.format, args.out)
    return 0


def cmd_symmetry(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    order = rotation_symmetry_order(sys_)
    rows = [
        {
            "phi": args.phi,
            "centroid": str(centroid(sys_)),
            "order": "" if order.infinite else str(order.order),
            "infinite": str(order.infinite).lower(),
        }
    ]
    _emit(rows, args.format, args.out)
    return 0


def cmd_mandelbrot(args) -> int:
    rows = []
    if args.capacity:
        for n in range(1, args.n_hi + 1):
            rows.append(
                {
                    "n": n,
                    "capacity": _fmt(mandelbrot_capacity_partial(n)),
                }
            )
    elif args.set:
        S = _galois_set(args.set)
        hv = mandelbrot_height(S, tol=args.tol)
        row = {
            "set": args.set,
            "h_M": _fmt(hv.value),
            "error_bound": _fmt(hv.error_bound),
        }
        for p in (2, 3, 5):
            dv = pairwise_distance_log(S, Place.finite(p)) if S.cardinality >= 2 else None
            row[f"dv_{p}"] = _fmt_logabs(dv) if dv is not None else ""
        rows.append(row)
    else:
        c = complex(float(parse_rational(args.c_re)), float(parse_rational(args.c_im)))
        rows.append(
            {
                "c": f"{_fmt(c.real)}+{_fmt(c.imag)}i",
                "lambda_inf": _fmt(mandelbrot_escape_rate(c, tol=args.tol)),
            }
        )
    _emit(rows, args.format, args.out)
    return 0


def cmd_preperiodic(args) -> int:
    sys_ = DynSystem(parse_poly(args.phi))
    x = parse_rational(args.x)
    rows = [
        {
            "phi": args.phi,
            "x": str(x),
            "preperiodic": str(is_preperiodic_rational(sys_, x)).lower(),
        }
    ]
    _emit(rows, args.format, args.out)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arithdyn",
        description="experiments with heights and capacities of polynomial "
        "dynamical systems over Q",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("height", help="canonical height of a Galois set")
    p.add_argument("--phi", required=True)
    p.add_argument("--set", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("local-height", help="canonical local heights")
    p.add_argument("--phi", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--place", action="append", default=[])
    _add_common(p)
    p.set_defaults(func=cmd_local_height)

    p = sub.add_parser("capacity", help="capacity chains and brackets")
    p.add_argument("--phi", default=None)
    p.add_argument("--chain", action="store_true")
    p.add_argument("--place", action="append", default=[])
    p.add_argument("--n-hi", "--n", dest="n_hi", type=int, default=10)
    p.add_argument("--shape", choices=("circle", "segment"), default="circle")
    p.add_argument("--n-points", type=int, default=64)
    p.add_argument("--monic", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("equidist", help="pseudo-equidistribution tables")
    p.add_argument("--phi", required=True)
    p.add_argument("--seq", choices=("mu", "periodic", "preimage"), default="mu")
    p.add_argument("--seq-p", type=int, default=3)
    p.add_argument("--seq-a", default="0")
    p.add_argument("--place", action="append", default=[])
    p.add_argument("--n-lo", type=int, default=1)
    p.add_argument("--n-hi", type=int, default=4)
    p.add_argument("--reference", choices=("uniform_circle", "arcsine"), default=None)
    _add_common(p)
    p.set_defaults(func=cmd_equidist)

    p = sub.add_parser("pern-identity", help="periodic-point discriminant identity")
    p.add_argument("--phi", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--place", action="append", default=[])
    _add_common(p)
    p.set_defaults(func=cmd_pern_identity)

    p = sub.add_parser("symmetry", help="Julia-set rotation symmetries")
    p.add_argument("--phi", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("mandelbrot", help="adelic Mandelbrot experiments")
    p.add_argument("--capacity", action="store_true")
    p.add_argument("--n-hi", "--n", dest="n_hi", type=int, default=13)
    p.add_argument("--set", default=None)
    p.add_argument("--c-re", default="0")
    p.add_argument("--c-im", default="0")
    _add_common(p)
    p.set_defaults(func=cmd_mandelbrot)

    p = sub.add_parser("preperiodic", help="exact rational preperiodicity")
    p.add_argument("--phi", required=True)
    p.add_argument("--x", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_preperiodic)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ParseError as exc:
        pos = f" at position {exc.position}" if exc.position is not None else ""
        print(f"parse error{pos}: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3
    except UndecidedBranchError as exc:
        print(f"undecided branch: {exc}", file=sys.stderr)
        return 4
    except ArithDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
