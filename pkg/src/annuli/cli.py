"""Batch experiment driver.

Subcommands map one-to-one onto the library experiments; every output
embeds its full run configuration so results are reproducible byte for
byte.  Exit codes: 0 ok, 1 domain error, 2 usage error, 3 budget guard.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .closepairs import (
    ClosePairQuery,
    QuadFormQ1,
    close_pair_scaling_study,
    count_close_pairs,
    count_shell_solutions,
)
from .diophantine import DiophQuery, linear_form_minimum, polynomial_minimum
from .ensemble import (
    EnsembleConfig,
    mean_decay_check,
    predicted_sigma_squared,
    report_from_values,
    sharp_smooth_difference_moment,
    sharp_statistic_series,
    spectral_sigma_squared,
)
from .errors import BudgetExceeded, DomainError, RelationDetected
from .geometry import (
    GeneralLattice,
    box_volume,
    count_box_points,
    stretch_determinant_check,
    successive_minima,
)
from .lattice import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    AnnulusQuery,
    LatticeSpec,
    count_annulus,
    count_disc,
    disc_error,
    sharp_statistic,
)
from .smoothing import (
    SmoothingParams,
    smooth_disc_count,
    smooth_statistic,
    smooth_statistic_from_counts,
)

SCHEMA = "annuli/1"


def _config_of(args: argparse.Namespace) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        if isinstance(v, tuple):
            v = list(v)
        cfg[k] = v
    return cfg


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _json_doc(payload: dict, cfg: dict) -> str:
    doc = {"schema": SCHEMA, "version": __version__, "config": cfg}
    doc.update(payload)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv_doc(columns, rows, cfg: dict) -> str:
    lines = [
        f"# config: {json.dumps(cfg, sort_keys=True)}",
        f"# version: {__version__}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(
            ",".join(
                f"{v:.17g}" if isinstance(v, float) else str(v) for v in row
            )
        )
    return "\n".join(lines) + "\n"


def _lattice(args) -> LatticeSpec:
    return LatticeSpec(args.alpha, args.beta)


def cmd_count(args) -> int:
    lattice = _lattice(args)
    payload: dict = {}
    if args.rho is None:
        payload["count"] = count_disc(lattice, args.t)
        payload["disc_error"] = disc_error(lattice, args.t)
        if args.t > 0:
            payload["normalized_error"] = payload["disc_error"] / math.sqrt(args.t)
    else:
        q = AnnulusQuery(args.t, args.rho)
        payload["count"] = count_annulus(lattice, q)
        payload["sharp_statistic"] = sharp_statistic(lattice, q)
        payload["expected_area"] = (
            math.pi / lattice.beta * (2 * args.t * args.rho + args.rho**2)
        )
    _write_text(args.out, _json_doc(payload, _config_of(args)))
    return 0


def cmd_distribution(args) -> int:
    lattice = _lattice(args)
    cfg = EnsembleConfig(
        T=args.T,
        samples=args.samples,
        weight=args.weight,
        seed=args.seed,
        rho=args.rho,
        rho_exponent=args.rho_exponent,
    )
    t, values, w = sharp_statistic_series(lattice, cfg, workers=args.threads)
    sigma2 = predicted_sigma_squared(lattice, cfg.rho_value())
    report = report_from_values(values, w, math.sqrt(sigma2))
    run_cfg = _config_of(args)
    payload = report.to_dict()
    payload["rho"] = cfg.rho_value()
    if args.out is None:
        _write_text(None, _json_doc(payload, run_cfg))
    else:
        _write_text(args.out + ".json", _json_doc(payload, run_cfg))
        rows = list(zip(t.tolist(), values.tolist(), w.tolist()))
        _write_text(args.out + ".csv", _csv_doc(("t", "value", "weight"), rows, run_cfg))
    return 0


def cmd_close_pairs(args) -> int:
    lattice = _lattice(args)
    run_cfg = _config_of(args)
    if args.grid:
        rows = close_pair_scaling_study(lattice, args.grid, args.delta)
        table = [(r, args.delta, c, norm) for r, c, norm in rows]
        _write_text(args.out, _csv_doc(("R", "delta", "count", "normalized"), table, run_cfg))
        return 0
    if args.shell_T is not None:
        form = QuadFormQ1.from_lattice(lattice)
        count = count_shell_solutions(form, 0.0, args.delta, args.shell_T)
        _write_text(args.out, _json_doc({"shell_count": count}, run_cfg))
        return 0
    count = count_close_pairs(lattice, ClosePairQuery(args.R, args.delta))
    payload = {
        "count": count,
        "normalized": count / (args.R * args.delta * math.log(args.R)),
    }
    _write_text(args.out, _json_doc(payload, run_cfg))
    return 0


def cmd_dioph(args) -> int:
    run_cfg = _config_of(args)
    try:
        if args.degree is not None:
            if len(args.tuple) != 2:
                raise DomainError("polynomial mode requires a tuple of length 2")
            fit = polynomial_minimum(tuple(args.tuple), args.degree, args.qmax)
        else:
            fit = linear_form_minimum(DiophQuery(tuple(args.tuple), args.qmax))
    except RelationDetected as exc:
        payload = {
            "relation_detected": True,
            "witness": list(exc.witness) if exc.witness else None,
            "message": str(exc),
        }
        _write_text(args.out, _json_doc(payload, run_cfg))
        return 0
    if args.format == "csv":
        rows = [(float(q), float(v)) for q, v in fit.per_height_minima]
        _write_text(args.out, _csv_doc(("q", "min_value"), rows, run_cfg))
    else:
        payload = {
            "relation_detected": False,
            "per_height_minima": [[q, v] for q, v in fit.per_height_minima],
            "fitted_exponent": fit.fitted_exponent,
            "fit_residual": fit.fit_residual,
        }
        _write_text(args.out, _json_doc(payload, run_cfg))
    return 0


def cmd_smooth(args) -> int:
    lattice = _lattice(args)
    sp = SmoothingParams(args.M, args.L)
    run_cfg = _config_of(args)
    if args.t is not None:
        payload = {
            "smooth_disc_count": smooth_disc_count(lattice, args.t, sp),
            "smooth_statistic": smooth_statistic(lattice, args.t, sp),
            "smooth_statistic_from_counts": smooth_statistic_from_counts(
                lattice, args.t, sp
            ),
        }
        _write_text(args.out, _json_doc(payload, run_cfg))
        return 0
    cfg = EnsembleConfig(
        T=args.T, samples=args.samples, weight="smooth_omega", seed=args.seed
    )
    payload = {
        "difference_second_moment": sharp_smooth_difference_moment(lattice, sp, cfg),
        "mean_abs": mean_decay_check(lattice, sp, cfg),
        "spectral_sigma_squared": spectral_sigma_squared(lattice, sp),
        "predicted_sigma_squared": predicted_sigma_squared(lattice, 1.0 / sp.L),
    }
    _write_text(args.out, _json_doc(payload, run_cfg))
    return 0


def _parse_basis(text: str) -> GeneralLattice:
    rows = tuple(
        tuple(float(x) for x in row.split(",")) for row in text.split(";")
    )
    return GeneralLattice(rows)


def cmd_geometry(args) -> int:
    run_cfg = _config_of(args)
    if args.mode == "stretch":
        rng = np.random.default_rng(args.seed)
        worst_ratio = 0.0
        equality_gap = 0.0
        for _ in range(args.trials):
            basis = rng.standard_normal((args.rank, args.dim))
            lat = GeneralLattice(tuple(map(tuple, basis)))
            before, after = stretch_determinant_check(lat, args.t)
            worst_ratio = max(worst_ratio, after / (args.t * before))
            if args.rank == args.dim:
                equality_gap = max(
                    equality_gap, abs(after - args.t * before) / (args.t * before)
                )
        payload = {
            "trials": args.trials,
            "worst_ratio_after_over_t_before": worst_ratio,
            "bound_holds": worst_ratio <= 1.0 + 1e-9,
        }
        if args.rank == args.dim:
            payload["max_relative_equality_gap"] = equality_gap
        _write_text(args.out, _json_doc(payload, run_cfg))
        return 0
    lat = _parse_basis(args.basis)
    if args.mode == "minima":
        values = successive_minima(lat, args.count or lat.dimension)
        _write_text(args.out, _json_doc({"successive_minima": values}, run_cfg))
        return 0
    # box
    count = count_box_points(lat, args.delta, args.tau)
    payload = {
        "count": count,
        "volume_over_covolume": box_volume(lat.dimension, args.delta, args.tau)
        / lat.covolume,
    }
    _write_text(args.out, _json_doc(payload, run_cfg))
    return 0


def _add_lattice_flags(p: argparse.ArgumentParser):
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="lattice parameter alpha (default: pi - 3)")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA,
                   help="lattice parameter beta > 0 (default: e/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annuli",
        description="Lattice points in thin annuli: counting and statistics experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="disc/annulus counts and the sharp statistic")
    _add_lattice_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("distribution", help="ensemble of sharp statistics over [T, 2T]")
    _add_lattice_flags(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--rho-exponent", type=float, default=0.1, dest="rho_exponent")
    p.add_argument("--weight", choices=("uniform", "smooth_omega"), default="uniform")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None, help="prefix for .csv/.json outputs")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("close-pairs", help="close-pair counts and scaling study")
    _add_lattice_flags(p)
    p.add_argument("--R", type=float, default=1000.0)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--grid", type=float, nargs="*", default=None,
                   help="R grid for the scaling study (CSV output)")
    p.add_argument("--shell-T", type=float, default=None, dest="shell_T",
                   help="count integer shell solutions of the quadratic form instead")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_close_pairs)

    p = sub.add_parser("dioph", help="Diophantine exponent probes")
    p.add_argument("--tuple", type=float, nargs="+", required=True)
    p.add_argument("--qmax", type=int, required=True)
    p.add_argument("--degree", type=int, default=None,
                   help="polynomial mode of this degree (tuple must be a pair)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("smooth", help="smoothed counts and the difference experiment")
    _add_lattice_flags(p)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--t", type=float, default=None,
                   help="single-point evaluation at this radius")
    p.add_argument("--T", type=float, default=None,
                   help="ensemble window for the difference experiment")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("geometry", help="successive minima, box counts, stretch lemma")
    geo = p.add_subparsers(dest="mode", required=True)

    g = geo.add_parser("stretch", help="sublattice covolume under diag(1,...,1,t)")
    g.add_argument("--t", type=float, required=True)
    g.add_argument("--dim", type=int, default=3)
    g.add_argument("--rank", type=int, default=2)
    g.add_argument("--trials", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_geometry)

    g = geo.add_parser("minima", help="successive minima of an explicit basis")
    g.add_argument("--basis", required=True,
                   help="rows separated by ';', coordinates by ',' e.g. '1,0;0,1'")
    g.add_argument("--count", type=int, default=None)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_geometry)

    g = geo.add_parser("box", help="lattice points in the stretched box")
    g.add_argument("--basis", required=True)
    g.add_argument("--delta", type=float, required=True)
    g.add_argument("--tau", type=float, default=1.0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_geometry)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is cmd_smooth and args.t is None and args.T is None:
        parser.error("smooth requires either --t or --T")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
