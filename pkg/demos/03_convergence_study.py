"""Convergence study against a fine reference, reproducing the expected rates.

First-order convergence for the primal and flux variables in L2, second
order for the energy and the eigenvalue.

Run:  python3 demos/03_convergence_study.py
"""

from gpemixed import ExperimentConfig, SolverConfig
from gpemixed.study import observed_orders, run_convergence, write_csv

cfg = ExperimentConfig(
    preset="harmonic",
    kappa=100.0,
    levels=[1, 2, 3, 4],
    reference_extra=2,
    solver=SolverConfig(shift_enabled=True),
    csv_path="harmonic_convergence.csv",
)
records, orders, ref = run_convergence(cfg)
write_csv(records, cfg.csv_path)

print("level   h         err_u      err_sigma  err_E      err_lambda")
for r in records:
    print(f"{r.level:>5}   {r.h:<8.4f}  {r.err_u_L2:.3e}  {r.err_sigma_L2:.3e}  "
          f"{r.err_E:.3e}  {r.err_lambda:.3e}")

print("\nobserved orders between consecutive levels:")
for field in ("err_u_L2", "err_sigma_L2", "err_E", "err_lambda"):
    pretty = ", ".join(f"{o:.2f}" for o in orders[field])
    print(f"  {field}: {pretty}")
print(f"\nreference level {ref.level} with {ref.n_elements} elements; "
      f"CSV written to {cfg.csv_path}")
