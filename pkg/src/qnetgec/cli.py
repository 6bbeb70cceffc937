"""Command-line entry point: reproducible experiments emitting CSV (results)
and JSON (lattices).

Every CSV starts with `#` comment lines carrying the tool version, the
experiment config as JSON, and the master seed.  Execution details (worker
count, output path) are excluded from the header so identical experiments
produce byte-identical files regardless of how they were parallelized.

Exit codes: 0 success, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__, analysis, gec, lattice, percolation, states


def parse_grid(text: str) -> list[float]:
    """Parse `start:stop:step`, comma lists, single values, or mixtures.

    Range segments are inclusive of `stop` up to half-step rounding.
    """
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError(f"empty grid segment in {text!r}")
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise ValueError(f"grid segment {part!r} is not start:stop:step")
            start, stop, step = (float(p) for p in pieces)
            if step <= 0:
                raise ValueError(f"grid step must be positive in {part!r}")
            n = int(math.floor((stop - start) / step + 0.5)) + 1
            if n < 1:
                raise ValueError(f"empty range {part!r}")
            values.extend(round(start + i * step, 12) for i in range(n))
        else:
            values.append(float(part))
    return values


def parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def parse_str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def parse_policy(text: str):
    """`random`, `core`, or `fixed:u,v` with integer node ids."""
    if text in ("random", "core"):
        return text
    if text.startswith("fixed:"):
        body = text[len("fixed:") :]
        parts = body.split(",")
        if len(parts) != 2:
            raise ValueError("fixed policy needs exactly two node ids: fixed:u,v")
        return ("fixed", int(parts[0]), int(parts[1]))
    raise ValueError(f"unknown pair policy {text!r}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(out: str | None, config: dict, seed, header: list[str], rows) -> None:
    """Emit one results file: comment preamble, column header, data rows."""
    text_rows = [[_fmt(v) for v in row] for row in rows]
    handle = sys.stdout if out in (None, "-") else open(out, "w", newline="")
    try:
        handle.write(f"# qnetgec {__version__}\n")
        handle.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        handle.write(f"# seed: {seed}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(text_rows)
    finally:
        if handle is not sys.stdout:
            handle.close()


def _critical_flag(P_c: float, p_x_prime: float) -> int:
    if not 0.0 <= p_x_prime <= 1.0 or math.isnan(p_x_prime):
        return 0
    return int(analysis.in_critical_region(P_c, p_x_prime))


def cmd_lattice(args) -> int:
    net = lattice.build_lattice(args.geometry, args.L, args.m)
    text = lattice.serialize(net)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def cmd_gec_sweep(args) -> int:
    geometries = parse_str_list(args.geometry)
    sizes = parse_int_list(args.L)
    px_grid = parse_grid(args.px)
    pz_grid = parse_grid(args.pz)
    pc_grid = parse_grid(args.Pc)
    policy = parse_policy(args.pair_policy)
    config = {
        "subcommand": "gec-sweep",
        "geometry": geometries,
        "L": sizes,
        "P_c": pc_grid,
        "p_x": px_grid,
        "p_z": pz_grid,
        "pair_policy": args.pair_policy,
        "trials": args.trials,
    }
    header = [
        "geometry", "L", "P_c", "p_x", "p_z", "trials", "void_trials",
        "mean_success", "se", "mean_defects", "mean_match_weight",
        "mean_minority", "mean_success_indep", "fidelity", "void_warning",
        "seed",
    ]
    rows = []
    idx = 0
    for g in geometries:
        for L in sizes:
            for P_c in pc_grid:
                for p_x in px_grid:
                    for p_z in pz_grid:
                        est = gec.estimate_gec(
                            g, L, P_c, p_x, p_z, args.trials, args.seed,
                            args.workers, policy, (idx,),
                        )
                        warn = int(est.void_trials > args.trials / 2)
                        rows.append([
                            g, L, P_c, p_x, p_z, est.trials, est.void_trials,
                            est.mean_success, est.se, est.mean_defects,
                            est.mean_match_weight, est.mean_minority,
                            est.mean_success_indep, est.fidelity, warn,
                            args.seed,
                        ])
                        idx += 1
    write_csv(args.out, config, args.seed, header, rows)
    return 0


def cmd_perc_sweep(args) -> int:
    """Fidelity grid over (P_c, p_x') at p_z = 0, one row per grid point."""
    pc_grid = parse_grid(args.Pc)
    pxp_grid = parse_grid(args.pxprime)
    policy = parse_policy(args.pair_policy)
    config = {
        "subcommand": "perc-sweep",
        "geometry": args.geometry,
        "L": args.L,
        "P_c": pc_grid,
        "p_x_prime": pxp_grid,
        "pair_policy": args.pair_policy,
        "trials": args.trials,
    }
    header = [
        "geometry", "L", "P_c", "p_x_prime", "trials", "void_trials",
        "F", "F_se", "in_critical_region", "seed",
    ]
    rows = []
    idx = 0
    for P_c in pc_grid:
        for pxp in pxp_grid:
            est = gec.estimate_gec(
                args.geometry, args.L, P_c, pxp, 0.0, args.trials,
                args.seed, args.workers, policy, (idx,),
            )
            rows.append([
                args.geometry, args.L, P_c, pxp, est.trials,
                est.void_trials, est.fidelity, est.se,
                _critical_flag(P_c, pxp), args.seed,
            ])
            idx += 1
    write_csv(args.out, config, args.seed, header, rows)
    return 0


def cmd_phi_psi(args) -> int:
    geometries = parse_str_list(args.geometry)
    sizes = parse_int_list(args.L)
    pc_grid = parse_grid(args.Pc)
    config = {
        "subcommand": "phi-psi",
        "geometry": geometries,
        "L": sizes,
        "P_c": pc_grid,
        "trials": args.trials,
    }
    header = [
        "geometry", "L", "P_c", "phi", "phi_se", "psi", "psi_se",
        "trials", "seed",
    ]
    rows = []
    idx = 0
    for g in geometries:
        for L in sizes:
            for P_c in pc_grid:
                est = percolation.estimate_phi_psi(
                    g, L, P_c, args.trials, args.seed, args.workers, (idx,)
                )
                rows.append([
                    g, L, P_c, est.phi, est.phi_se, est.psi, est.psi_se,
                    est.trials, args.seed,
                ])
                idx += 1
    write_csv(args.out, config, args.seed, header, rows)
    return 0


def cmd_perc_threshold(args) -> int:
    geometries = parse_str_list(args.geometry)
    pc_grid = parse_grid(args.Pc)
    config = {
        "subcommand": "perc-threshold",
        "geometry": geometries,
        "L": args.L,
        "P_c": pc_grid,
        "trials": args.trials,
    }
    header = ["geometry", "L_small", "L_large", "p_c_star", "trials", "seed"]
    rows = []
    for g in geometries:
        p_star = percolation.locate_threshold(
            g, args.L, pc_grid, args.trials, args.seed, args.workers
        )
        rows.append([g, args.L, 2 * args.L, p_star, args.trials, args.seed])
    write_csv(args.out, config, args.seed, header, rows)
    return 0


def cmd_pure_sweep(args) -> int:
    """Conversion strategy curves: one row per (alpha, alpha')."""
    alphas = parse_grid(args.alpha)
    config = {
        "subcommand": "pure-sweep",
        "alpha": alphas,
        "alpha_prime": args.alphaprime,
        "points": args.points,
    }
    header = ["alpha", "alpha_prime", "P_c", "p_x_prime", "in_critical_region"]
    rows = []
    for a in alphas:
        if args.alphaprime is None:
            grid = np.linspace(0.5, a, args.points)
        else:
            grid = parse_grid(args.alphaprime)
        for sp in states.strategy_curve(states.PureStateParam(a), grid):
            rows.append([
                a, sp.alpha_prime, sp.conversion_prob, sp.p_x_prime,
                _critical_flag(sp.conversion_prob, sp.p_x_prime),
            ])
    write_csv(args.out, config, None, header, rows)
    return 0


def cmd_threshold(args) -> int:
    """Entropic threshold table: p* solving H(p*) = plaquette/edge ratio."""
    geometries = parse_str_list(args.geometry)
    pc_grid = parse_grid(args.Pc)
    L = args.L
    config = {
        "subcommand": "threshold",
        "geometry": geometries,
        "L": L,
        "P_c": pc_grid,
    }
    header = ["geometry", "L", "P_c", "p_star", "in_critical_region"]
    rows = []
    for g in geometries:
        for P_c in pc_grid:
            try:
                p_star = analysis.entropic_threshold(
                    analysis.ThresholdQuery(g, L, P_c)
                )
            except analysis.AnalysisError:
                p_star = float("nan")
            rows.append([
                g, "inf" if L is None else L, P_c, p_star,
                _critical_flag(P_c, p_star),
            ])
    write_csv(args.out, config, None, header, rows)
    return 0


def cmd_tradeoff(args) -> int:
    if args.alphaprime is None:
        grid = np.linspace(0.5, args.alpha, args.points)
    else:
        grid = parse_grid(args.alphaprime)
    config = {
        "subcommand": "tradeoff",
        "alpha": args.alpha,
        "alpha_prime": [float(a) for a in grid],
        "geometry": args.geometry,
        "L": args.L,
        "trials": args.trials,
    }
    header = [
        "alpha", "alpha_prime", "P_c", "p_x_prime", "phi", "F", "F_se",
        "fom", "in_critical_region", "trials", "seed",
    ]
    rows = []
    for pt in analysis.tradeoff_curve(
        args.alpha, grid, args.geometry, args.L, args.trials, args.seed,
        args.workers,
    ):
        rows.append([
            pt.alpha, pt.alpha_prime, pt.P_c, pt.p_x_prime, pt.phi,
            pt.F, pt.F_se, pt.fom,
            _critical_flag(pt.P_c, pt.p_x_prime), args.trials, args.seed,
        ])
    write_csv(args.out, config, args.seed, header, rows)
    return 0


def cmd_css(args) -> int:
    ts = parse_int_list(args.t)
    px_grid = parse_grid(args.px)
    pz_grid = parse_grid(args.pz)
    config = {"subcommand": "css", "t": ts, "p_x": px_grid, "p_z": pz_grid}
    header = ["t", "p_x", "p_z", "p_z_eff", "p_x_eff", "clamped"]
    rows = []
    for t in ts:
        for p_x in px_grid:
            for p_z in pz_grid:
                est = analysis.css_tradeoff(t, p_x, p_z)
                rows.append([
                    t, p_x, p_z, est.p_z_eff, est.p_x_eff, int(est.clamped)
                ])
    write_csv(args.out, config, None, header, rows)
    return 0


def cmd_distill(args) -> int:
    """Rank-three distillation operating points: one row per (weights, m)."""
    lam_grid = parse_grid(args.lam)
    nu_grid = parse_grid(args.nu)
    ms = parse_int_list(args.m)
    config = {
        "subcommand": "distill",
        "singlet_weight": lam_grid,
        "flipped_weight": nu_grid,
        "m": ms,
    }
    header = [
        "singlet_weight", "flipped_weight", "m", "attempt_success",
        "P_c", "p_x_prime", "in_critical_region",
    ]
    rows = []
    for lam in lam_grid:
        for nu in nu_grid:
            res = states.pcm_distill(states.RankThreeParams(lam, nu))
            for m in ms:
                P_c = states.bond_conversion_prob(res.success_prob, m)
                rows.append([
                    lam, nu, m, res.success_prob, P_c,
                    res.binary.p_x_prime,
                    _critical_flag(P_c, res.binary.p_x_prime),
                ])
    write_csv(args.out, config, None, header, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnetgec",
        description="Monte Carlo experiments for entanglement distribution "
        "with global error correction on 2D lattices.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--trials", type=int, default=1000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--workers", type=int, default=1)
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("lattice", parents=[out], help="emit a lattice as JSON")
    p.add_argument("--geometry", required=True, choices=lattice.GEOMETRIES[:3])
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--m", type=int, default=1, help="bond multiplicity")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser(
        "gec-sweep", parents=[run, out],
        help="pair-success sweep over geometry/L/P_c/p_x/p_z grids",
    )
    p.add_argument("--geometry", required=True, help="comma list")
    p.add_argument("--L", required=True, help="comma list of sizes")
    p.add_argument("--px", required=True, help="grid: v, v1,v2, or start:stop:step")
    p.add_argument("--pz", default="0", help="grid (default 0)")
    p.add_argument("--Pc", default="1", help="grid (default 1)")
    p.add_argument("--pair-policy", default="random")
    p.set_defaults(func=cmd_gec_sweep)

    p = sub.add_parser(
        "perc-sweep", parents=[run, out],
        help="fidelity grid over (P_c, p_x') at p_z = 0",
    )
    p.add_argument("--geometry", default="square")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--Pc", required=True, help="grid")
    p.add_argument("--pxprime", required=True, help="grid")
    p.add_argument("--pair-policy", default="random")
    p.set_defaults(func=cmd_perc_sweep)

    p = sub.add_parser(
        "phi-psi", parents=[run, out],
        help="largest-cluster node and bond fractions vs P_c",
    )
    p.add_argument("--geometry", required=True, help="comma list")
    p.add_argument("--L", required=True, help="comma list of sizes")
    p.add_argument("--Pc", required=True, help="grid")
    p.set_defaults(func=cmd_phi_psi)

    p = sub.add_parser(
        "perc-threshold", parents=[run, out],
        help="percolation threshold from the phi(L) / phi(2L) crossing",
    )
    p.add_argument("--geometry", required=True, help="comma list")
    p.add_argument("--L", type=int, required=True, help="smaller lattice size")
    p.add_argument("--Pc", required=True, help="grid to scan for the crossing")
    p.set_defaults(func=cmd_perc_threshold)

    p = sub.add_parser(
        "pure-sweep", parents=[out],
        help="pure-state conversion strategy curves (alpha', P_c, p_x')",
    )
    p.add_argument("--alpha", required=True, help="grid of initial alphas")
    p.add_argument("--alphaprime", default=None,
                   help="grid (default: 0.5..alpha, --points values)")
    p.add_argument("--points", type=int, default=26)
    p.set_defaults(func=cmd_pure_sweep)

    p = sub.add_parser(
        "threshold", parents=[out],
        help="entropic bit-flip threshold table over P_c",
    )
    p.add_argument("--geometry", required=True, help="comma list")
    p.add_argument("--Pc", required=True, help="grid")
    p.add_argument("--L", type=int, default=None,
                   help="finite size (default: infinite-lattice limit)")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser(
        "tradeoff", parents=[run, out],
        help="conversion trade-off curve: F, phi, and F*phi^2 vs alpha'",
    )
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--alphaprime", default=None,
                   help="grid (default: 0.5..alpha, --points values)")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--geometry", default="square")
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser(
        "css", parents=[out],
        help="repetition-encoding error-rate estimates per distance",
    )
    p.add_argument("--t", required=True, help="comma list of t values")
    p.add_argument("--px", required=True, help="grid")
    p.add_argument("--pz", required=True, help="grid")
    p.set_defaults(func=cmd_css)

    p = sub.add_parser(
        "distill", parents=[out],
        help="rank-three distillation operating points (P_c, p_x')",
    )
    p.add_argument("--lam", required=True, help="grid of singlet weights")
    p.add_argument("--nu", default="0", help="grid of flipped weights")
    p.add_argument("--m", default="2", help="comma list of bond multiplicities")
    p.set_defaults(func=cmd_distill)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
