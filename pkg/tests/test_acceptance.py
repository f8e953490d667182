"""Acceptance suite: one criterion per test, one PASS/FAIL line printed each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the heavyweight studies are shared across criteria via module-scoped
fixtures.
"""

import numpy as np
import pytest

from oracles import dense_schur, sphere_minimize_restarts
from gpemixed import (
    SolverConfig,
    assemble,
    constant,
    disorder,
    discrete_gradient,
    friedrichs_keller,
    ground_state,
    harmonic,
    l4_norm4,
    lower_bound,
    mesh_size,
    prolong_p0,
    red_refine,
    rt0_l2_project,
)
from gpemixed.fem import p0_project
from gpemixed.linalg import chol, schur_complement, woodbury_apply
from gpemixed.study import ExperimentConfig, observed_orders, run_convergence, run_lowerbound

TARGET_LAMBDA = np.pi**2 / 128.0


def report(criterion, ok, detail):
    print(f"{criterion} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


def accel_solver(**kw):
    return SolverConfig(shift_enabled=True, **kw)


@pytest.fixture(scope="module")
def harmonic_studies():
    """Convergence studies for kappa in {10, 100, 1000}: 5 levels, reference
    two refinements finer, accelerated solver."""
    out = {}
    for kappa in (10.0, 100.0, 1000.0):
        cfg = ExperimentConfig(
            preset="harmonic", kappa=kappa, levels=[1, 2, 3, 4, 5],
            reference_extra=2, solver=accel_solver(),
        )
        out[kappa] = run_convergence(cfg)
    return out


@pytest.fixture(scope="module")
def disorder_study():
    cfg = ExperimentConfig(preset="disorder", solver=accel_solver(
        init_noise=0.1, linear_presolve=True))
    return run_lowerbound(cfg)


@pytest.fixture(scope="module")
def constant_study():
    cfg = ExperimentConfig(
        preset="constant", levels=[1, 2, 3, 4, 5, 6], solver=accel_solver()
    )
    return run_lowerbound(cfg)


def test_a1_commuting_identity():
    L = 8.0

    def w(p):
        return (L**2 - p[:, 0] ** 2) * (L**2 - p[:, 1] ** 2)

    def grad_w(p):
        return np.column_stack(
            [-2.0 * p[:, 0] * (L**2 - p[:, 1] ** 2), -2.0 * p[:, 1] * (L**2 - p[:, 0] ** 2)]
        )

    mesh = friedrichs_keller(L, 2, symmetric=True)
    worst = 0.0
    for _ in range(4):
        mesh = red_refine(mesh)
        ops = assemble(mesh, constant(0.0, 0.0))
        bfac = chol(ops.B)
        lhs = discrete_gradient(ops, p0_project(mesh, w, degree=4), bfac)
        rhs = rt0_l2_project(ops, grad_w, bfac, quad_degree=4)
        diff = lhs - rhs
        rel = np.sqrt(diff @ (ops.B @ diff)) / np.sqrt(rhs @ (ops.B @ rhs))
        worst = max(worst, rel)
    ok = worst <= 1e-9
    assert report("A1", ok, f"commuting identity, worst relative flux-norm error {worst:.2e}")


def test_a2_linear_oracle():
    meshes = [friedrichs_keller(8.0, 2, symmetric=True)]
    for _ in range(6):
        meshes.append(red_refine(meshes[-1]))
    lams, bounds = [], []
    u = None
    for level in range(1, 7):
        ops = assemble(meshes[level], constant(0.0, 0.0))
        u0 = prolong_p0(u, meshes[level]) if u is not None else None
        rep = ground_state(ops, SolverConfig(), u0=u0)
        u = rep.state.u
        lams.append(rep.state.lambda_h)
        bounds.append(2.0 * lower_bound(rep.state.energy_h, mesh_size(meshes[level])))
    errs = [abs(l - TARGET_LAMBDA) for l in lams]
    order = np.log2(errs[-2] / errs[-1])
    increasing = all(a < b for a, b in zip(lams, lams[1:])) and lams[-1] <= TARGET_LAMBDA
    certified = all(b <= TARGET_LAMBDA + 1e-15 for b in bounds)
    ok = increasing and order >= 1.8 and certified
    detail = (
        f"lambda sequence {['%.7f' % l for l in lams]} vs pi^2/128 = {TARGET_LAMBDA:.7f} "
        f"(monotone increase: {increasing}), |lambda err| order {order:.2f}, "
        f"certified bounds below target: {certified}"
    )
    assert report("A2", ok, detail)


def test_a3_brute_force_equivalence():
    mesh = friedrichs_keller(8.0, 2, symmetric=True)
    ops = assemble(mesh, harmonic(10.0))
    rep = ground_state(ops, SolverConfig())
    best = sphere_minimize_restarts(ops, n_restarts=100, seed=2024)
    gap = abs(best - rep.state.energy_h)
    ok = gap <= 1e-8
    assert report("A3", ok, f"dense 100-restart sphere minimum vs solver energy, gap {gap:.2e}")


def test_a4_convergence_rates(harmonic_studies):
    ok = True
    details = []
    for kappa, (records, orders, _) in harmonic_studies.items():
        o_u = orders["err_u_L2"][-1]
        o_s = orders["err_sigma_L2"][-1]
        o_e = orders["err_E"][-1]
        o_l = orders["err_lambda"][-1]
        ok_k = 0.8 <= o_u <= 1.2 and 0.8 <= o_s <= 1.2
        ok_k = ok_k and 1.75 <= o_e <= 2.3 and 1.75 <= o_l <= 2.3
        ok = ok and ok_k
        details.append(
            f"kappa={kappa:g}: u {o_u:.2f}, sigma {o_s:.2f}, E {o_e:.2f}, lambda {o_l:.2f}"
        )
    assert report("A4", ok, "observed orders " + "; ".join(details))


def test_a5_guaranteed_bracket(harmonic_studies, disorder_study, constant_study):
    ok = True
    details = []
    cases = {
        "harmonic(kappa=1000)": harmonic_studies[1000.0][0],
        "disorder": disorder_study[0],
        "constant": constant_study[0],
    }
    for name, records in cases.items():
        bracket = all(r.E_h_pp <= r.E_upper for r in records)
        increasing = all(a.E_h_pp < b.E_h_pp for a, b in zip(records, records[1:]))
        ok = ok and bracket and increasing
        details.append(f"{name}: bracket {bracket}, E_h_pp strictly increasing {increasing}")
    assert report("A5", ok, "; ".join(details))


def test_a6_constant_potential_anomaly(constant_study):
    # the reference upper bound lives on the finest mesh of the experiment,
    # two refinements past the last study level (the reference policy), so it
    # certifies a value tighter than every studied E_h
    records, _ = constant_study
    from gpemixed.p1 import p1_assemble, p1_ground_state
    from gpemixed.fem import l2_project_potential
    from gpemixed import prolong_p1

    top = records[-1].level + 2
    meshes = [friedrichs_keller(8.0, 1)]
    for _ in range(top):
        meshes.append(red_refine(meshes[-1]))
    pot = constant(1.0, 1.0)
    vec = None
    for level in (records[-1].level, top - 1, top):
        v0 = None
        if vec is not None:
            v0 = vec
            for k in range(prev_level + 1, level + 1):
                v0 = prolong_p1(v0, meshes[k])
        p1ops = p1_assemble(meshes[level], l2_project_potential(meshes[level], pot))
        vec, e_up_ref, _ = p1_ground_state(p1ops, 1.0, accel_solver(), v0=v0)
        prev_level = level
    decreasing = all(a.E_h > b.E_h for a, b in zip(records, records[1:]))
    above = all(r.E_h > e_up_ref for r in records)
    below = all(r.E_h_pp < e_up_ref for r in records)
    ok = decreasing and above and below
    assert report(
        "A6",
        ok,
        f"E_h strictly decreasing ({decreasing}) and above the reference upper bound "
        f"{e_up_ref:.9f} at every level ({above}); post-processed stays below ({below})",
    )


def test_a7_structural_residuals():
    solves = [
        ("linear", friedrichs_keller(8.0, 2, symmetric=True), constant(0.0, 0.0), 3, SolverConfig()),
        ("harmonic", friedrichs_keller(8.0, 2, symmetric=True), harmonic(1000.0), 3, accel_solver()),
        ("constant", friedrichs_keller(8.0, 1), constant(1.0, 1.0), 3, SolverConfig()),
        ("disorder", friedrichs_keller(1.0, 8), disorder(0.25, 1.0, 0, 1.0), 1, accel_solver(init_noise=0.1)),
    ]
    ok = True
    details = []
    for name, mesh, pot, levels, cfg in solves:
        for _ in range(levels):
            mesh = red_refine(mesh)
        ops = assemble(mesh, pot)
        s = ground_state(ops, cfg).state
        r1 = np.linalg.norm(ops.B @ s.sigma + ops.C @ s.u)
        r2 = np.linalg.norm(
            ops.C.T @ s.sigma
            - ops.M0 * (ops.kappa * s.u**3 + ops.pot * s.u)
            + s.lambda_h * ops.M0 * s.u
        )
        ident = abs(s.lambda_h - (2.0 * s.energy_h + 0.5 * ops.kappa * l4_norm4(ops, s.u)))
        norm1 = abs(s.u @ (ops.M0 * s.u) - 1.0)
        case_ok = (
            r1 <= 1e-9
            and r2 <= 1e-8 * max(s.lambda_h, 1.0)
            and ident <= 1e-10
            and norm1 <= 1e-12
        )
        ok = ok and case_ok
        details.append(f"{name}: rows ({r1:.1e}, {r2:.1e}), identity {ident:.1e}, norm {norm1:.1e}")
    assert report("A7", ok, "; ".join(details))


def test_a8_woodbury_correctness():
    mesh = red_refine(friedrichs_keller(8.0, 2, symmetric=True))
    ops = assemble(mesh, constant(0.0, 0.0))
    a_dense = dense_schur(ops)
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(50):
        d = rng.uniform(0.1, 10.0, ops.n_elements)
        rhs = rng.standard_normal(ops.n_elements)
        sfac = chol(schur_complement(ops.B, ops.C, d))
        x = woodbury_apply(d, ops.C, sfac, rhs)
        x_dense = np.linalg.solve(a_dense + np.diag(d), rhs)
        worst = max(worst, np.linalg.norm(x - x_dense) / np.linalg.norm(x_dense))
    ok = worst <= 1e-10
    assert report("A8", ok, f"50 randomized instances vs dense solves, worst relative error {worst:.2e}")
