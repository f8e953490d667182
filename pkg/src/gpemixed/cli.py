"""Command-line front end: single solves, convergence and bound studies.

Configuration is a flat INI file with sections [domain], [potential],
[study], [solver], [output]; every key has a default that reproduces the
harmonic headline experiment.  Values from the file override the preset
defaults, and command-line flags override both.  The environment variable
GPE_THREADS caps worker concurrency (the conforming-bound chain runs
alongside the mixed chain when it is 2 or more).
"""

import argparse
import configparser
import sys

from .errors import ConfigurationError, GpeError, SolverError
from .mesh import mesh_size
from .solver import SolverConfig
from .study import (
    CSV_HEADER,
    ExperimentConfig,
    dump_state,
    observed_orders,
    run_convergence,
    run_lowerbound,
    run_solve,
    write_csv,
)

_SECTIONS = {
    "domain": {"l", "n", "symmetric"},
    "potential": {"preset", "kappa", "constant_value", "epsilon", "grid_file"},
    "study": {"levels", "reference_extra", "seed"},
    "solver": {
        "tol_residual",
        "max_iters",
        "damping_threshold",
        "backtrack_factor",
        "backtrack_floor",
        "diag_floor",
        "shift_enabled",
        "init_noise",
        "linear_presolve",
    },
    "output": {"csv", "state_dump"},
}


def parse_levels(text):
    """Accept 'a..b' ranges or comma-separated lists."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _get(cp, section, key, conv, default=None):
    if cp is not None and cp.has_option(section, key):
        raw = cp.get(section, key)
        if conv is bool:
            return cp.getboolean(section, key)
        return conv(raw)
    return default


def load_config(path=None, overrides=None):
    """Build an ExperimentConfig from an INI file plus CLI overrides."""
    cp = None
    if path is not None:
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise ConfigurationError(f"config file {path} not found")
        for section in cp.sections():
            if section not in _SECTIONS:
                raise ConfigurationError(f"unknown config section [{section}]")
            unknown = set(cp.options(section)) - _SECTIONS[section]
            if unknown:
                raise ConfigurationError(
                    f"unknown keys in [{section}]: {', '.join(sorted(unknown))}"
                )

    overrides = overrides or {}
    preset = overrides.get("preset") or _get(cp, "potential", "preset", str, "harmonic")
    seed = overrides.get("seed")
    if seed is None:
        seed = _get(cp, "study", "seed", int, 0)
    levels = overrides.get("levels")
    if levels is None:
        raw = _get(cp, "study", "levels", str, None)
        levels = parse_levels(raw) if raw is not None else None

    solver_kwargs = dict(
        tol_residual=_get(cp, "solver", "tol_residual", float, 1e-10),
        max_iters=_get(cp, "solver", "max_iters", int, 500),
        damping_threshold=_get(cp, "solver", "damping_threshold", float, 1e-2),
        backtrack_factor=_get(cp, "solver", "backtrack_factor", float, 0.5),
        backtrack_floor=_get(cp, "solver", "backtrack_floor", float, 2.0**-20),
        diag_floor=_get(cp, "solver", "diag_floor", float, 1e-12),
        shift_enabled=_get(cp, "solver", "shift_enabled", bool, False),
        seed=seed,
    )
    from .study import PRESET_DEFAULTS

    preset_defaults = PRESET_DEFAULTS.get(preset, {})
    init_noise = _get(cp, "solver", "init_noise", float, None)
    if init_noise is None:
        init_noise = preset_defaults.get("init_noise", 0.0)
    linear_presolve = _get(cp, "solver", "linear_presolve", bool, None)
    if linear_presolve is None:
        linear_presolve = preset_defaults.get("linear_presolve", False)
    solver = SolverConfig(
        init_noise=init_noise, linear_presolve=linear_presolve, **solver_kwargs
    )

    return ExperimentConfig(
        preset=preset,
        L=_get(cp, "domain", "l", float, None),
        n=_get(cp, "domain", "n", int, None),
        symmetric=_get(cp, "domain", "symmetric", bool, None),
        kappa=_get(cp, "potential", "kappa", float, None),
        constant_value=_get(cp, "potential", "constant_value", float, 1.0),
        epsilon=_get(cp, "potential", "epsilon", float, 2.0**-6),
        grid_file=_get(cp, "potential", "grid_file", str, None),
        levels=levels,
        reference_extra=_get(cp, "study", "reference_extra", int, 2),
        solver=solver,
        seed=seed,
        csv_path=overrides.get("out") or _get(cp, "output", "csv", str, None),
        state_dump=overrides.get("dump") or _get(cp, "output", "state_dump", str, None),
    )


def _cmd_solve(cfg):
    record, report, ops = run_solve(cfg)
    print(
        f"level {record.level}: h={record.h:.6g} elements={record.n_elements}\n"
        f"  E_h      = {record.E_h:.12g}\n"
        f"  E_h_pp   = {record.E_h_pp:.12g}\n"
        f"  E_upper  = {record.E_upper:.12g}\n"
        f"  lambda_h = {record.lambda_h:.12g}\n"
        f"  residual = {report.state.residual_l2:.3e}  iterations = {report.iterations}"
    )
    if cfg.state_dump:
        dump_state(record, ops, report.state, cfg.state_dump)
        print(f"state dumped to {cfg.state_dump}")
    if cfg.csv_path:
        write_csv([record], cfg.csv_path)
        print(f"wrote {cfg.csv_path}")
    return 0


def _cmd_convergence(cfg):
    records, orders, ref = run_convergence(cfg)
    if cfg.csv_path:
        write_csv(records, cfg.csv_path)
    print(CSV_HEADER)
    for rec in records:
        print(",".join(str(v) for v in rec.values()))
    print(f"reference: level {ref.level}, E_h={ref.E_h:.12g}, lambda_h={ref.lambda_h:.12g}")
    for field, vals in orders.items():
        pretty = ", ".join(f"{v:.2f}" for v in vals)
        print(f"observed order {field}: {pretty}")
    if cfg.csv_path:
        print(f"wrote {cfg.csv_path}")
    return 0


def _cmd_lowerbound(cfg):
    records, flags = run_lowerbound(cfg)
    if cfg.csv_path:
        write_csv(records, cfg.csv_path)
    print(CSV_HEADER)
    for rec in records:
        print(",".join(str(v) for v in rec.values()))
    midpoint = 0.5 * (records[-1].E_h_pp + records[-1].E_upper)
    for rec in records:
        print(
            f"level {rec.level}: E_h {flags[rec.level]} the finest bracket midpoint "
            f"{midpoint:.12g}; bracket [{rec.E_h_pp:.12g}, {rec.E_upper:.12g}]"
        )
    if cfg.csv_path:
        print(f"wrote {cfg.csv_path}")
    return 0


def _cmd_mesh_info(cfg, export_path=None):
    meshes = cfg.mesh_hierarchy(cfg.levels[-1])
    print("level  vertices  triangles  facets  h")
    for level in range(len(meshes)):
        m = meshes[level]
        print(
            f"{level:>5}  {m.n_vertices:>8}  {m.n_triangles:>9}  "
            f"{m.n_facets:>6}  {mesh_size(m):.6g}"
        )
    if export_path:
        with open(export_path, "w") as fh:
            meshes[-1].export_text(fh)
        print(f"exported finest mesh to {export_path}")
    return 0


def main(argv=None):
    # shared flags are valid before or after the subcommand
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    shared.add_argument("--config", help="INI configuration file")
    shared.add_argument("--out", help="CSV output path")
    shared.add_argument("--seed", type=int, help="seed for initial guesses and disorder")
    shared.add_argument("--levels", help="refinement levels, e.g. 1..5 or 0,2,4")
    shared.add_argument(
        "--preset", choices=["harmonic", "constant", "disorder", "linear"],
        help="potential preset",
    )

    parser = argparse.ArgumentParser(
        prog="gpemixed",
        description="Mixed finite element ground states with two-sided energy brackets",
        parents=[shared],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", help="solve the finest configured level", parents=[shared])
    sub.add_parser(
        "convergence", help="convergence study against a fine reference", parents=[shared]
    )
    sub.add_parser("lowerbound", help="two-sided energy bounds per level", parents=[shared])
    info = sub.add_parser("mesh-info", help="print the mesh hierarchy", parents=[shared])
    info.add_argument("--export", help="dump the finest mesh as plain text")

    args = parser.parse_args(argv)
    levels_raw = getattr(args, "levels", None)
    overrides = {
        "preset": getattr(args, "preset", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "levels": parse_levels(levels_raw) if levels_raw else None,
    }
    try:
        cfg = load_config(getattr(args, "config", None), overrides)
        if args.command == "solve":
            return _cmd_solve(cfg)
        if args.command == "convergence":
            return _cmd_convergence(cfg)
        if args.command == "lowerbound":
            return _cmd_lowerbound(cfg)
        return _cmd_mesh_info(cfg, getattr(args, "export", None))
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 2
    except (GpeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
