"""Command-line front end: run simulations, generate and inspect point
sets, and measure quadrature quality.

Subcommands: run, points {gen-random, gen-equal-area, gen-gauss,
inspect}, mz, exactness.  Exit codes: 0 success, 1 usage/config error,
2 numerical blow-up (diagnostics are still written).

Config files are flat "key = value" text with dotted sections; '#'
starts a comment line.  Recognized keys:

    nu, tau, degree, steps | t_final,
    points.type (gauss | random | equal_area | file),
    points.exactness, points.m, points.seed, points.path,
    init_points.* (optional; enables the mixed scheme),
    energy.exactness, grid.nlat, grid.nlon, alpha0, snapshot_every,
    output.dir
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

from . import __version__
from .harmonics import dim_pn
from .quadrature import (
    QuadratureFileError,
    equal_area_rule,
    exactness_error,
    gauss_product_rule,
    load_rule,
    mesh_norm,
    mz_constant,
    random_rule,
)
from .solver import (
    BlowUpError,
    SolverConfig,
    benchmark_initial_condition,
    run,
)

DIAGNOSTICS_HEADER = (
    "n,time,uniform_norm,discrete_energy,continuous_energy,envelope,l2_norm"
)


class ConfigError(Exception):
    """Bad config file or bad argument combination (exit code 1)."""


_CONFIG_KEYS = {
    "nu": float,
    "tau": float,
    "degree": int,
    "steps": int,
    "t_final": float,
    "points.type": str,
    "points.exactness": int,
    "points.m": int,
    "points.seed": int,
    "points.path": str,
    "init_points.type": str,
    "init_points.exactness": int,
    "init_points.m": int,
    "init_points.seed": int,
    "init_points.path": str,
    "energy.exactness": int,
    "grid.nlat": int,
    "grid.nlon": int,
    "alpha0": float,
    "snapshot_every": int,
    "output.dir": str,
}


def parse_config(path) -> dict:
    """Parse and type-check a config file; unknown or duplicate keys and
    bad values are errors naming the offending line."""
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            if key in cfg:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            try:
                cfg[key] = _CONFIG_KEYS[key](value)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for '{key}': {value!r}"
                ) from None
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing required key '{key}'")
    return cfg[key]


def _rule_from_config(cfg: dict, prefix: str, degree: int):
    kind = _require(cfg, f"{prefix}.type")
    if kind == "gauss":
        t = cfg.get(f"{prefix}.exactness")
        if t is None:
            t = 2 * degree
        return gauss_product_rule(t)
    if kind == "random":
        m = _require(cfg, f"{prefix}.m")
        seed = _require(cfg, f"{prefix}.seed")
        return random_rule(m, seed)
    if kind == "equal_area":
        return equal_area_rule(_require(cfg, f"{prefix}.m"))
    if kind == "file":
        path = _require(cfg, f"{prefix}.path")
        try:
            return load_rule(path)
        except (QuadratureFileError, OSError) as exc:
            raise ConfigError(f"{prefix}.path: {exc}") from None
    raise ConfigError(
        f"{prefix}.type must be gauss, random, equal_area, or file, "
        f"got '{kind}'"
    )


def _format_row(diag) -> str:
    vals = (
        diag.n,
        diag.time,
        diag.uniform_norm,
        diag.discrete_energy,
        diag.continuous_energy,
        diag.envelope,
        diag.l2_norm,
    )
    return "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g" % vals


def _write_diagnostics(path, diagnostics):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(DIAGNOSTICS_HEADER + "\n")
        for diag in diagnostics:
            fh.write(_format_row(diag) + "\n")


def _write_snapshot(path, time_value, grid):
    n_lat, n_lon = grid.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# t=%.17g nlat=%d nlon=%d\n" % (time_value, n_lat, n_lon))
        for row in grid:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def _git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            cwd=os.path.dirname(os.path.abspath(__file__)),
            timeout=5,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    nu = _require(cfg, "nu")
    tau = _require(cfg, "tau")
    degree = _require(cfg, "degree")
    out_dir = _require(cfg, "output.dir")
    if ("steps" in cfg) == ("t_final" in cfg):
        raise ConfigError("exactly one of 'steps' or 't_final' is required")
    steps = cfg.get("steps")
    if steps is None:
        steps = math.ceil(cfg["t_final"] / tau)

    evolution_rule = _rule_from_config(cfg, "points", degree)
    init_rule = None
    if any(k.startswith("init_points.") for k in cfg):
        init_rule = _rule_from_config(cfg, "init_points", degree)
    energy_t = cfg.get("energy.exactness", 4 * degree)
    n_lat = cfg.get("grid.nlat", 4 * degree + 4)
    n_lon = cfg.get("grid.nlon", 8 * degree + 8)

    if tau >= 2.0:
        print(
            "warning: tau >= 2 is outside the provable stability range; "
            "proceeding anyway",
            file=sys.stderr,
        )

    try:
        config = SolverConfig(
            nu=nu,
            tau=tau,
            N=degree,
            steps=steps,
            evolution_rule=evolution_rule,
            init_rule=init_rule,
            energy_rule=gauss_product_rule(energy_t),
            probe_grid=(n_lat, n_lon),
            alpha0=cfg.get("alpha0"),
            snapshot_every=cfg.get("snapshot_every", 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    os.makedirs(out_dir, exist_ok=True)
    started = time.perf_counter()
    status = "completed"
    exit_code = 0
    try:
        result = run(config, benchmark_initial_condition)
        diagnostics, snapshots = result.diagnostics, result.snapshots
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        diagnostics, snapshots = exc.diagnostics, exc.snapshots
        status = f"blow_up_at_step_{exc.step}"
        exit_code = 2

    diag_path = os.path.join(out_dir, "diagnostics.csv")
    _write_diagnostics(diag_path, diagnostics)
    artifacts = [diag_path]
    for n, t_val, grid in snapshots:
        snap_path = os.path.join(out_dir, f"snapshot_n{n:06d}.txt")
        _write_snapshot(snap_path, t_val, grid)
        artifacts.append(snap_path)

    manifest = {
        "version": __version__,
        "git_revision": _git_revision(),
        "status": status,
        "duration_seconds": time.perf_counter() - started,
        "config": {
            "nu": nu,
            "tau": tau,
            "degree": degree,
            "steps": steps,
            "evolution_rule": evolution_rule.label,
            "init_rule": init_rule.label if init_rule is not None else None,
            "energy_rule": config.energy_rule.label,
            "grid": [n_lat, n_lon],
            "alpha0": cfg.get("alpha0"),
            "snapshot_every": cfg.get("snapshot_every", 0),
            "output_dir": out_dir,
        },
        "artifacts": artifacts,
        # The maximum-principle envelope omits a degree-dependent
        # correction whose constant is not computable.
        "envelope_correction": "unquantified",
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {diag_path} ({len(diagnostics)} rows), {manifest_path}")
    return exit_code


def _write_points(path, rule):
    with open(path, "w", encoding="utf-8") as fh:
        for (x, y, z), w in zip(rule.points, rule.weights):
            fh.write("%.17g %.17g %.17g %.17g\n" % (x, y, z, w))


def cmd_points(args) -> int:
    if args.points_command == "gen-gauss":
        rule = gauss_product_rule(args.exactness)
    elif args.points_command == "gen-random":
        rule = random_rule(args.m, args.seed)
    elif args.points_command == "gen-equal-area":
        rule = equal_area_rule(args.m)
    else:  # inspect
        rule = load_rule(args.file)
        print(f"label: {rule.label}")
        print(f"m: {rule.m}")
        print("weight_sum: %.17g (4*pi = %.17g)" % (rule.weight_sum, 4 * math.pi))
        print("mesh_norm: %.6g" % mesh_norm(rule, resolution=args.resolution))
        for t in range(args.max_degree + 1):
            print("exactness_error(t=%d): %.6g" % (t, exactness_error(rule, t)))
        return 0
    _write_points(args.out, rule)
    print(f"wrote {rule.m} points to {args.out}")
    return 0


def cmd_mz(args) -> int:
    rule = load_rule(args.file)
    report = mz_constant(rule, args.degree)
    dim = dim_pn(args.degree)
    verdict = "pass (eta < 1)" if report.eta < 1.0 else "fail (eta >= 1)"
    print(f"m: {rule.m}")
    print(f"dim P_N: {dim}")
    print("eta: %.12g" % report.eta)
    print(f"converged: {report.converged} ({report.iterations} iterations)")
    print(f"verdict: {verdict}")
    return 0


def cmd_exactness(args) -> int:
    rule = load_rule(args.file)
    worst = 0.0
    for t in range(args.degree + 1):
        err = exactness_error(rule, t)
        worst = max(worst, err)
        print("t=%d error=%.6g" % (t, err))
    print(f"max error up to degree {args.degree}: %.6g" % worst)
    return 0


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the contract reserves
    # 2 for blow-up, so raise and let main() map usage errors to 1.
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="acsphere",
        description="Spectral Allen-Cahn solver on the unit sphere",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", help="path to a key = value config file")

    p_points = sub.add_parser("points", help="generate or inspect point sets")
    points_sub = p_points.add_subparsers(dest="points_command", required=True)
    p_gg = points_sub.add_parser("gen-gauss")
    p_gg.add_argument("--exactness", type=int, required=True)
    p_gg.add_argument("--out", required=True)
    p_gr = points_sub.add_parser("gen-random")
    p_gr.add_argument("--m", type=int, required=True)
    p_gr.add_argument("--seed", type=int, required=True)
    p_gr.add_argument("--out", required=True)
    p_ge = points_sub.add_parser("gen-equal-area")
    p_ge.add_argument("--m", type=int, required=True)
    p_ge.add_argument("--out", required=True)
    p_pi = points_sub.add_parser("inspect")
    p_pi.add_argument("file")
    p_pi.add_argument("--max-degree", type=int, default=5)
    p_pi.add_argument("--resolution", type=int, default=64)

    p_mz = sub.add_parser("mz", help="Marcinkiewicz-Zygmund constant of a point file")
    p_mz.add_argument("file")
    p_mz.add_argument("--degree", type=int, required=True)

    p_ex = sub.add_parser("exactness", help="exactness sweep of a point file")
    p_ex.add_argument("file")
    p_ex.add_argument("--degree", type=int, required=True)

    return parser


_DISPATCH = {
    "run": cmd_run,
    "points": cmd_points,
    "mz": cmd_mz,
    "exactness": cmd_exactness,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except (ConfigError, QuadratureFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
