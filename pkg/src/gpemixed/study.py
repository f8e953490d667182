"""Experiment driver: mesh hierarchies, per-level solves, CSV records.

A study solves the ground state on every requested refinement level (warm
starting each level from the prolonged previous solution), optionally solves
a finer reference for error measurement, computes the post-processed lower
bound and the conforming P1 upper bound per level, and emits one CSV row per
level.  Given the same configuration and seed the CSV is byte-identical
except for the wall-clock column.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import fem, potentials, transfer
from .errors import ConfigurationError
from .mesh import friedrichs_keller, mesh_size, red_refine
from .p1 import p1_assemble, p1_ground_state
from .solver import SolverConfig, ground_state, lower_bound

__all__ = [
    "ExperimentConfig",
    "ConvergenceRecord",
    "CSV_HEADER",
    "PRESET_DEFAULTS",
    "run_solve",
    "run_convergence",
    "run_lowerbound",
    "observed_orders",
    "write_csv",
    "read_csv",
]

CSV_HEADER = (
    "level,h,n_elements,E_h,E_h_pp,E_upper,lambda_h,"
    "err_u_L2,err_sigma_L2,err_E,err_lambda,iters,wall_ms"
)

# Per-preset defaults: the harmonic entry reproduces the headline experiment
# out of the box; the disorder coarse mesh is aligned with the eps-cells.
PRESET_DEFAULTS = {
    "harmonic": dict(L=8.0, n=2, symmetric=True, kappa=1000.0, levels=(1, 2, 3, 4, 5)),
    "linear": dict(L=8.0, n=2, symmetric=True, kappa=0.0, levels=(1, 2, 3, 4, 5)),
    "constant": dict(L=8.0, n=1, symmetric=False, kappa=1.0, levels=(1, 2, 3, 4, 5)),
    "disorder": dict(
        L=1.0, n=128, symmetric=False, kappa=1.0, levels=(0, 1),
        init_noise=0.1, linear_presolve=True,
    ),
}


class ExperimentConfig:
    """Everything one study needs; validated on construction."""

    def __init__(
        self,
        preset="harmonic",
        L=None,
        n=None,
        symmetric=None,
        kappa=None,
        constant_value=1.0,
        epsilon=2.0**-6,
        grid_file=None,
        levels=None,
        reference_extra=2,
        solver=None,
        seed=0,
        csv_path=None,
        state_dump=None,
    ):
        if preset not in PRESET_DEFAULTS and preset != "custom":
            raise ConfigurationError(f"unknown preset {preset!r}")
        defaults = PRESET_DEFAULTS.get(preset, PRESET_DEFAULTS["constant"])
        self.preset = preset
        self.L = float(L if L is not None else defaults["L"])
        self.n = int(n if n is not None else defaults["n"])
        self.symmetric = bool(symmetric if symmetric is not None else defaults["symmetric"])
        self.kappa = float(kappa if kappa is not None else defaults["kappa"])
        self.constant_value = float(constant_value)
        self.epsilon = float(epsilon)
        self.grid_file = grid_file
        self.levels = [int(x) for x in (levels if levels is not None else defaults["levels"])]
        self.reference_extra = int(reference_extra)
        self.seed = int(seed)
        if solver is None:
            solver = SolverConfig(
                seed=self.seed,
                init_noise=defaults.get("init_noise", 0.0),
                linear_presolve=defaults.get("linear_presolve", False),
            )
        self.solver = solver
        self.csv_path = csv_path
        self.state_dump = state_dump

        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigurationError(f"levels must be strictly increasing, got {self.levels}")
        if min(self.levels) < 0:
            raise ConfigurationError("levels must be nonnegative")
        if self.reference_extra < 1:
            raise ConfigurationError("reference policy must be at least 1 extra refinement")

    def potential(self):
        if self.preset == "harmonic":
            return potentials.harmonic(self.kappa)
        if self.preset == "linear":
            return potentials.constant(0.0, self.kappa)
        if self.preset == "constant":
            return potentials.constant(self.constant_value, self.kappa)
        if self.preset == "disorder":
            return potentials.disorder(self.epsilon, self.L, self.seed, self.kappa)
        if self.grid_file is None:
            raise ConfigurationError("custom preset requires a grid file")
        return potentials.load_grid(self.grid_file, self.kappa)

    def mesh_hierarchy(self, max_level):
        meshes = [friedrichs_keller(self.L, self.n, self.symmetric)]
        for _ in range(max_level):
            meshes.append(red_refine(meshes[-1]))
        return meshes


class ConvergenceRecord:
    """One CSV row; the column order is fixed by CSV_HEADER."""

    FIELDS = CSV_HEADER.split(",")

    def __init__(self, level, h, n_elements, E_h, E_h_pp, E_upper, lambda_h,
                 err_u_L2=math.nan, err_sigma_L2=math.nan, err_E=math.nan,
                 err_lambda=math.nan, iters=0, wall_ms=0.0):
        self.level = level
        self.h = h
        self.n_elements = n_elements
        self.E_h = E_h
        self.E_h_pp = E_h_pp
        self.E_upper = E_upper
        self.lambda_h = lambda_h
        self.err_u_L2 = err_u_L2
        self.err_sigma_L2 = err_sigma_L2
        self.err_E = err_E
        self.err_lambda = err_lambda
        self.iters = iters
        self.wall_ms = wall_ms

    def values(self):
        return [getattr(self, name) for name in self.FIELDS]


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ""
        return repr(value)
    return str(int(value))


def write_csv(records, path):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(",".join(_fmt(v) for v in rec.values()) + "\n")


def read_csv(path):
    """Parse a study CSV back into ConvergenceRecords (empty cells -> nan)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ConfigurationError(f"unexpected CSV header {header!r}")
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            vals = {}
            for name, cell in zip(ConvergenceRecord.FIELDS, cells):
                if name in ("level", "n_elements", "iters"):
                    vals[name] = int(cell)
                else:
                    vals[name] = float(cell) if cell else math.nan
            records.append(ConvergenceRecord(**vals))
    return records


def observed_orders(records, field):
    """log(err ratio) / log(h ratio) between consecutive records."""
    orders = []
    for prev, cur in zip(records, records[1:]):
        e0, e1 = getattr(prev, field), getattr(cur, field)
        if e0 > 0 and e1 > 0:
            orders.append(math.log(e0 / e1) / math.log(prev.h / cur.h))
        else:
            orders.append(math.nan)
    return orders


def _n_threads():
    try:
        return max(1, int(os.environ.get("GPE_THREADS", "1")))
    except ValueError:
        return 1


def _solve_mixed_chain(cfg, meshes, pot, solve_levels):
    """Solve the given levels in ascending order with prolonged warm starts.

    Returns {level: (ops, report)}.
    """
    results = {}
    u_carry = None
    carry_level = None
    for level in solve_levels:
        ops = fem.assemble(meshes[level], pot)
        u0 = None
        if u_carry is not None:
            u0 = u_carry
            for k in range(carry_level + 1, level + 1):
                u0 = transfer.prolong_p0(u0, meshes[k])
        report = ground_state(ops, cfg.solver, u0=u0)
        results[level] = (ops, report)
        u_carry = report.state.u
        carry_level = level
    return results


def _solve_p1_chain(cfg, meshes, pot, solve_levels):
    """Conforming upper-bound solves, warm-started by P1 interpolation."""
    results = {}
    v_carry = None
    carry_level = None
    for level in solve_levels:
        mesh_l = meshes[level]
        pot_elem = fem.l2_project_potential(mesh_l, pot)
        p1ops = p1_assemble(mesh_l, pot_elem)
        v0 = None
        if v_carry is not None:
            v0 = v_carry
            for k in range(carry_level + 1, level + 1):
                v0 = transfer.prolong_p1(v0, meshes[k])
        vec, e_up, lam_up = p1_ground_state(p1ops, pot.kappa, cfg.solver, v0=v0)
        results[level] = (vec, e_up, lam_up)
        v_carry = vec
        carry_level = level
    return results


def _records_from(levels, meshes, mixed, p1_results, errors=None):
    records = []
    for level in levels:
        ops, report = mixed[level]
        state = report.state
        h = mesh_size(meshes[level])
        err = errors.get(level) if errors else None
        records.append(
            ConvergenceRecord(
                level=level,
                h=h,
                n_elements=meshes[level].n_triangles,
                E_h=state.energy_h,
                E_h_pp=lower_bound(state.energy_h, h),
                E_upper=p1_results[level][1],
                lambda_h=state.lambda_h,
                err_u_L2=err.err_u_l2 if err else math.nan,
                err_sigma_L2=err.err_sigma_l2 if err else math.nan,
                err_E=err.err_E if err else math.nan,
                err_lambda=err.err_lambda if err else math.nan,
                iters=report.iterations,
                wall_ms=report.wall_time_s * 1000.0,
            )
        )
    return records


def _run_chains(cfg, meshes, pot, mixed_levels, p1_levels):
    """Run the mixed and P1 chains, concurrently when GPE_THREADS > 1."""
    if _n_threads() > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fut = pool.submit(_solve_p1_chain, cfg, meshes, pot, p1_levels)
            mixed = _solve_mixed_chain(cfg, meshes, pot, mixed_levels)
            p1_results = fut.result()
    else:
        mixed = _solve_mixed_chain(cfg, meshes, pot, mixed_levels)
        p1_results = _solve_p1_chain(cfg, meshes, pot, p1_levels)
    return mixed, p1_results


def run_solve(cfg):
    """Solve the finest configured level only; returns (record, report, ops)."""
    level = cfg.levels[-1]
    meshes = cfg.mesh_hierarchy(level)
    pot = cfg.potential()
    mixed, p1_results = _run_chains(cfg, meshes, pot, [level], [level])
    records = _records_from([level], meshes, mixed, p1_results)
    return records[0], mixed[level][1], mixed[level][0]


def run_convergence(cfg):
    """Solve all levels plus a reference finer by cfg.reference_extra.

    Returns (records, orders, reference_record).
    """
    ref_level = cfg.levels[-1] + cfg.reference_extra
    meshes = cfg.mesh_hierarchy(ref_level)
    pot = cfg.potential()
    mixed, p1_results = _run_chains(
        cfg, meshes, pot, cfg.levels + [ref_level], cfg.levels
    )
    ops_ref, report_ref = mixed[ref_level]
    ref_state = report_ref.state

    errors = {}
    for level in cfg.levels:
        _, report = mixed[level]
        errors[level] = transfer.error_vs_reference(
            report.state, ref_state, meshes[level : ref_level + 1], ops_ref
        )

    records = _records_from(cfg.levels, meshes, mixed, p1_results, errors)
    orders = {
        field: observed_orders(records, field)
        for field in ("err_u_L2", "err_sigma_L2", "err_E", "err_lambda")
    }
    ref_record = ConvergenceRecord(
        level=ref_level,
        h=mesh_size(meshes[ref_level]),
        n_elements=meshes[ref_level].n_triangles,
        E_h=ref_state.energy_h,
        E_h_pp=lower_bound(ref_state.energy_h, mesh_size(meshes[ref_level])),
        E_upper=math.nan,
        lambda_h=ref_state.lambda_h,
        iters=report_ref.iterations,
        wall_ms=report_ref.wall_time_s * 1000.0,
    )
    return records, orders, ref_record


def run_lowerbound(cfg):
    """Per-level energies and bounds only (no reference errors).

    Returns (records, flags) where flags[level] marks whether E_h lies above
    or below the finest level's bracket midpoint (E_h_pp + E_upper) / 2.
    """
    meshes = cfg.mesh_hierarchy(cfg.levels[-1])
    pot = cfg.potential()
    mixed, p1_results = _run_chains(cfg, meshes, pot, cfg.levels, cfg.levels)
    records = _records_from(cfg.levels, meshes, mixed, p1_results)
    midpoint = 0.5 * (records[-1].E_h_pp + records[-1].E_upper)
    flags = {
        rec.level: ("above" if rec.E_h > midpoint else "below") for rec in records
    }
    return records, flags


def dump_state(record, ops, state, path):
    """Plain-text element dump for plotting: centroid_x centroid_y value."""
    mesh = ops.mesh
    with open(path, "w") as fh:
        fh.write(f"elements {mesh.n_triangles} level {record.level}\n")
        for (cx, cy), val in zip(mesh.centroids, state.u):
            fh.write(f"{float(cx)!r} {float(cy)!r} {float(val)!r}\n")
