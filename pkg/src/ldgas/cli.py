"""Command-line front end.

Usage: ldgas <equilibrium|ldf|cumulants|transitions|verify-mc|joint> <config>
             [--out DIR] [--threads K]

The config is a TOML tree; unknown keys anywhere are an error.  All numeric
output is written with 17 significant digits so files round-trip doubles
exactly, and every command is deterministic given config + seed (the
LDGAS_SEED environment variable overrides the configured seed).

Exit codes: 0 success, 1 usage or config error, 2 solver infeasibility or
invalid run parameters, 3 consistency-check failure, 4 Monte Carlo
verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import duality, montecarlo, transitions
from .equilibrium import (
    euler_lagrange_residual,
    solve_one_cut,
    statistic_value,
)
from .errors import (
    ConfigError,
    FlatSegmentError,
    IllConfinedError,
    LdgasError,
    NoConvergenceError,
    NoOneCutError,
    NotAnalyticError,
    PathMismatchError,
)
from .model import ConfinementPotential, LinearStatistic, Polynomial, Walls, tilt

_LEGENDRE_TOL = 1e-5
_DENSITY_ROWS = 513

_SCHEMA = {
    "ensemble": {"potential": None, "beta": None, "walls": {"lower": None, "upper": None}},
    "statistic": {"f": None, "f2": None},
    "equilibrium": {"s": None},
    "ldf": {"s_min": None, "s_max": None, "n_points": None, "include": None},
    "cumulants": {"m_max": None, "h0": None, "n_particles": None},
    "transitions": {"s_min": None, "s_max": None, "n_points": None, "max_order": None},
    "mc": {
        "n_particles": None,
        "n_sweeps": None,
        "burn_in": None,
        "thin": None,
        "seed": None,
        "tilts": None,
        "z_threshold": None,
        "n_bins": None,
        "step0": None,
    },
    "joint": {
        "s1_min": None,
        "s1_max": None,
        "n1": None,
        "s2_min": None,
        "s2_max": None,
        "n2": None,
    },
}


def _check_keys(tree, schema, path=""):
    for key, val in tree.items():
        if key not in schema:
            raise ConfigError(f"unknown config key: {path}{key}")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path}{key} must be a table")
            _check_keys(val, sub, f"{path}{key}.")


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}")
    _check_keys(tree, _SCHEMA)
    if "ensemble" not in tree:
        raise ConfigError("config needs an [ensemble] table")
    return tree


def _ensemble(tree) -> tuple[ConfinementPotential, float]:
    ens = tree["ensemble"]
    if "potential" not in ens:
        raise ConfigError("ensemble.potential is required")
    coeffs = [float(c) for c in ens["potential"]]
    walls = ens.get("walls", {})
    w = Walls(
        lower=float(walls["lower"]) if "lower" in walls else None,
        upper=float(walls["upper"]) if "upper" in walls else None,
    )
    beta = float(ens.get("beta", 2.0))
    return ConfinementPotential(Polynomial(coeffs), w), beta


def _statistic(tree, key="f") -> LinearStatistic:
    stat = tree.get("statistic", {})
    if key not in stat:
        raise ConfigError(f"statistic.{key} is required for this command")
    return LinearStatistic(Polynomial([float(c) for c in stat[key]]))


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.floating)) else str(v) for v in row])


def _interior_nodes(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * (2 * k + 1) / (2 * n))[::-1]


def cmd_equilibrium(tree, out: Path, threads: int) -> int:
    potential, _ = _ensemble(tree)
    params = tree.get("equilibrium", {})
    s = float(params.get("s", 0.0))
    if s != 0.0:
        w = tilt(potential, _statistic(tree), s)
    else:
        w = potential
    measure = solve_one_cut(w)
    grid = _interior_nodes(measure.support.a, measure.support.b, _DENSITY_ROWS)
    rho = measure.density(grid)
    _write_csv(out / "density.csv", ["lambda", "rho"], zip(grid, rho))
    summary = {
        "a": float(measure.support.a),
        "b": float(measure.support.b),
        "edge_a": measure.support.edge_a.value,
        "edge_b": measure.support.edge_b.value,
        "euler_lagrange_residual": float(euler_lagrange_residual(measure)),
    }
    with open(out / "support.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _build_curve_from_config(tree, potential, statistic):
    params = tree.get("ldf")
    if params is None:
        raise ConfigError("an [ldf] table is required")
    for k in ("s_min", "s_max", "n_points"):
        if k not in params:
            raise ConfigError(f"ldf.{k} is required")
    n_points = int(params["n_points"])
    if n_points < 2:
        raise ValueError("ldf.n_points must be at least 2 (degenerate s-grid)")
    include = tuple(float(v) for v in params.get("include", ()))
    return duality.build_curve(
        potential,
        statistic,
        float(params["s_min"]),
        float(params["s_max"]),
        n_points,
        include=include,
    )


def cmd_ldf(tree, out: Path, threads: int) -> int:
    potential, _ = _ensemble(tree)
    statistic = _statistic(tree)
    curve = _build_curve_from_config(tree, potential, statistic)
    curve = duality.integrate_j(curve)
    table = duality.integrate_psi(duality.invert_curve(curve))
    residual = duality.legendre_check(curve, table)
    _write_csv(
        out / "duality.csv",
        ["s", "x_star", "J"],
        zip(curve.s_grid, curve.x_values, curve.j_values),
    )
    _write_csv(
        out / "rate.csv",
        ["x", "s_star", "Psi"],
        zip(table.x_grid, table.s_star_values, table.psi_values),
    )
    with open(out / "report.txt", "w") as fh:
        fh.write(f"legendre_residual = {_fmt(residual)}\n")
        fh.write(f"flag_left = {curve.flags[0].value}\n")
        fh.write(f"flag_right = {curve.flags[1].value}\n")
        fh.write(f"n_kink_brackets = {len(curve.kink_brackets)}\n")
        for lo, hi in curve.kink_brackets:
            fh.write(f"kink_bracket = {_fmt(lo)} {_fmt(hi)}\n")
    if residual > _LEGENDRE_TOL:
        print(f"ldgas: Legendre residual {residual:.3e} exceeds {_LEGENDRE_TOL:.1e}", file=sys.stderr)
        return 3
    return 0


def cmd_cumulants(tree, out: Path, threads: int) -> int:
    potential, beta = _ensemble(tree)
    statistic = _statistic(tree)
    params = tree.get("cumulants")
    if params is None or "m_max" not in params:
        raise ConfigError("cumulants.m_max is required")
    m_max = int(params["m_max"])
    if m_max < 1:
        raise ValueError("cumulants.m_max must be a positive integer")
    n_particles = int(params.get("n_particles", 1))
    kwargs = {}
    if "h0" in params:
        kwargs["h0"] = float(params["h0"])
    report = duality.cumulants(potential, statistic, m_max, **kwargs)
    scaled = report.finite_n_values(n_particles, beta)
    _write_csv(
        out / "cumulants.csv",
        ["order", "derivative", "scaled"],
        zip(report.orders, report.derivatives, scaled),
    )
    return 0


def cmd_transitions(tree, out: Path, threads: int) -> int:
    potential, _ = _ensemble(tree)
    statistic = _statistic(tree)
    params = tree.get("transitions")
    if params is None:
        raise ConfigError("a [transitions] table is required")
    for k in ("s_min", "s_max", "n_points"):
        if k not in params:
            raise ConfigError(f"transitions.{k} is required")
    n_points = int(params["n_points"])
    if n_points < 2:
        raise ValueError("transitions.n_points must be at least 2")
    curve = duality.build_curve(
        potential, statistic, float(params["s_min"]), float(params["s_max"]), n_points
    )
    max_order = int(params.get("max_order", 4))
    points = transitions.detect_transitions(curve, max_order=max_order)
    reports = transitions.check_steepness(curve)
    _write_csv(
        out / "transitions.csv",
        ["s_lower", "s_upper", "order", "jump"],
        [(p.s_lower, p.s_upper, p.order, p.jump) for p in points],
    )
    with open(out / "steepness.txt", "w") as fh:
        if not reports:
            fh.write("no truncated boundary inside the requested tilt range\n")
        for r in reports:
            fh.write(f"boundary_s = {_fmt(r.boundary_s)}\n")
            fh.write(f"boundary_slope = {_fmt(r.boundary_slope)}\n")
            fh.write(f"steep = {str(r.steep).lower()}\n")
            fh.write(f"note = {r.note}\n")
    return 0


def cmd_verify_mc(tree, out: Path, threads: int) -> int:
    potential, beta = _ensemble(tree)
    statistic = _statistic(tree)
    params = tree.get("mc")
    if params is None:
        raise ConfigError("an [mc] table is required")
    for k in ("n_particles", "n_sweeps", "burn_in"):
        if k not in params:
            raise ConfigError(f"mc.{k} is required")
    seed = int(params.get("seed", 0))
    env_seed = os.environ.get("LDGAS_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    tilts = [float(v) for v in params.get("tilts", [0.0])]
    z_threshold = float(params.get("z_threshold", 3.0))
    n_bins = int(params.get("n_bins", 60))

    def one(idx_s):
        idx, s = idx_s
        cfg = montecarlo.ChainConfig(
            n_particles=int(params["n_particles"]),
            beta=beta,
            n_sweeps=int(params["n_sweeps"]),
            burn_in=int(params["burn_in"]),
            thin=int(params.get("thin", 1)),
            seed=seed + idx,
            step0=float(params["step0"]) if "step0" in params else None,
        )
        return montecarlo.tilted_mean_check(potential, statistic, s, cfg)

    if threads > 1 and len(tilts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            checks = list(pool.map(one, enumerate(tilts)))
    else:
        checks = [one(pair) for pair in enumerate(tilts)]

    rows = []
    hist_rows = []
    n2 = float(int(params["n_particles"]) ** 2)
    for chk in checks:
        tag = _fmt(chk.s)
        rows += [
            (f"mean[s={tag}]", chk.empirical_mean, chk.stderr),
            (f"predicted[s={tag}]", chk.predicted_mean, 0.0),
            (f"z[s={tag}]", chk.z_score, 0.0),
            (f"tau_int[s={tag}]", chk.tau_int, 0.0),
            (f"n_eff[s={tag}]", chk.n_eff, 0.0),
            (f"variance[s={tag}]", chk.sample_variance, 0.0),
            (f"variance_scaled[s={tag}]", chk.sample_variance * beta * n2, 0.0),
            (f"acceptance[s={tag}]", chk.chain.acceptance_rate, 0.0),
        ]
        counts, edges = np.histogram(chk.chain.samples, bins=n_bins)
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            hist_rows.append((chk.s, lo, hi, int(c)))
    _write_csv(out / "mc_summary.csv", ["quantity", "estimate", "stderr"], rows)
    _write_csv(out / "mc_hist.csv", ["s", "bin_lo", "bin_hi", "count"], hist_rows)
    failed = [chk for chk in checks if abs(chk.z_score) >= z_threshold]
    with open(out / "verdict.txt", "w") as fh:
        for chk in checks:
            status = "PASS" if abs(chk.z_score) < z_threshold else "FAIL"
            fh.write(f"s = {_fmt(chk.s)}: z = {_fmt(chk.z_score)} -> {status}\n")
        fh.write("VERDICT: " + ("PASS" if not failed else "FAIL") + "\n")
    if failed:
        print(
            f"ldgas: {len(failed)} tilt(s) failed the z-test at threshold {z_threshold}",
            file=sys.stderr,
        )
        return 4
    return 0


def cmd_joint(tree, out: Path, threads: int) -> int:
    potential, _ = _ensemble(tree)
    f1 = _statistic(tree, "f")
    f2 = _statistic(tree, "f2")
    params = tree.get("joint")
    if params is None:
        raise ConfigError("a [joint] table is required")
    for k in ("s1_min", "s1_max", "n1", "s2_min", "s2_max", "n2"):
        if k not in params:
            raise ConfigError(f"joint.{k} is required")
    n1, n2 = int(params["n1"]), int(params["n2"])
    if n1 < 3 or n2 < 3:
        raise ValueError("joint grids need at least 3 points per axis")

    def axis(lo, hi, n):
        g = np.linspace(float(lo), float(hi), n)
        g[np.abs(g) < 1e-12 * (float(hi) - float(lo))] = 0.0
        if not np.any(g == 0.0):
            g = np.sort(np.append(g, 0.0))
        return g

    s1 = axis(params["s1_min"], params["s1_max"], n1)
    s2 = axis(params["s2_min"], params["s2_max"], n2)
    surface = duality.joint_build_surface(potential, f1, f2, s1, s2)
    ldf = duality.joint_integrate(surface)
    asym = duality.mixed_partial_asymmetry(surface)
    rows = []
    for i, a in enumerate(surface.s1_grid):
        for j, b in enumerate(surface.s2_grid):
            rows.append(
                (a, b, surface.x1[i, j], surface.x2[i, j], ldf.j_values[i, j], ldf.psi_values[i, j])
            )
    _write_csv(out / "joint.csv", ["s1", "s2", "x1_star", "x2_star", "J", "Psi"], rows)
    with open(out / "joint_report.txt", "w") as fh:
        fh.write(f"path_mismatch = {_fmt(ldf.path_mismatch)}\n")
        fh.write(f"mixed_partial_asymmetry = {_fmt(asym)}\n")
        fh.write(f"cropped = {str(surface.cropped).lower()}\n")
    return 0


_COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "ldf": cmd_ldf,
    "cumulants": cmd_cumulants,
    "transitions": cmd_transitions,
    "verify-mc": cmd_verify_mc,
    "joint": cmd_joint,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise ConfigError(message)


def main(argv=None) -> int:
    parser = _Parser(prog="ldgas", description="Large-deviation functions of linear spectral statistics")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    try:
        args = parser.parse_args(argv)
        tree = load_config(args.config)
    except ConfigError as exc:
        print(f"ldgas: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](tree, out, max(1, args.threads))
    except ConfigError as exc:
        print(f"ldgas: {exc}", file=sys.stderr)
        return 1
    except (IllConfinedError, NoOneCutError, NoConvergenceError, ValueError) as exc:
        print(f"ldgas: {exc}", file=sys.stderr)
        return 2
    except (NotAnalyticError, PathMismatchError, FlatSegmentError) as exc:
        print(f"ldgas: {exc}", file=sys.stderr)
        return 3
    except LdgasError as exc:
        print(f"ldgas: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
