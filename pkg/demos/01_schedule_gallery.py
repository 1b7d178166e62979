"""Gallery of the seven learning-rate schedules and the phase plans behind them.

Builds one small table per kind, prints the per-phase picture, and shows the
growth constant c that the admissibility condition c < 1/beta^2 cares about.
Run:  python3 demos/01_schedule_gallery.py
"""

import numpy as np

from sgdm_sched import (
    LrSchedule,
    PhasePlan,
    build_constant_bs_table,
    build_increasing_bs_table,
    table_to_csv,
    validate_admissible,
)


def show(name, table, max_rows=8):
    head = ", ".join(f"{x:.4g}" for x in table.lr[:max_rows])
    tail = "" if table.T <= max_rows else f", ... ({table.T} steps)"
    print(f"{name:20s} c={table.growth_constant_c:6.3f}  lr = [{head}{tail}]")
    print(f"{'':20s}          batch = {np.unique(table.batch).tolist()}")


# ---- fixed batch, decaying rate -------------------------------------------
print("== fixed batch size, decaying learning rate ==")
b, n = 16, 80  # K = ceil(80/16) = 5 steps per epoch
show("constant", build_constant_bs_table(LrSchedule("constant", lambda_max=0.1), b, 15))
show("diminishing", build_constant_bs_table(LrSchedule("diminishing", lambda_max=0.1), b, 15))
show("cosine (E=3)", build_constant_bs_table(
    LrSchedule("cosine", lambda_max=0.1), b, 15, dataset_size=n))
show("polynomial (p=2)", build_constant_bs_table(
    LrSchedule("polynomial", lambda_max=0.1, p=2.0), b, 15))

# ---- growing batch ----------------------------------------------------------
print("\n== batch doubling per phase (b0=8, n=64, 2 epochs each) ==")
plan = PhasePlan(b0=8, delta=2.0, epochs_per_phase=(2, 2, 2, 2), dataset_size=64)
print(f"phases m=0..{plan.M}: batches {plan.batch_sizes}, steps/epoch "
      f"{plan.steps_per_epoch_all}, boundaries {plan.phase_starts}")

show("decaying + growth", build_increasing_bs_table(
    LrSchedule("cosine", lambda_max=0.1), plan))
show("joint growth", build_increasing_bs_table(
    LrSchedule("exp_growth", gamma=1.5, lambda0=0.02), plan))
show("warm-up constant", build_increasing_bs_table(
    LrSchedule("warmup_constant", gamma=1.5, lambda0=0.02, warmup_phases=1), plan))
show("warm-up cosine", build_increasing_bs_table(
    LrSchedule("warmup_cosine", gamma=1.5, lambda0=0.02, warmup_phases=1), plan))

# ---- admissibility ----------------------------------------------------------
print("\n== admissible-rate check (L = 1) ==")
joint = build_increasing_bs_table(LrSchedule("exp_growth", gamma=1.5, lambda0=0.02), plan)
for beta in (0.0, 0.5, 0.8):
    rep = validate_admissible(joint, beta=beta, L=1.0, alg="nshb")
    print(f"beta={beta}: lr_max={rep.lr_max:.4g} vs bound {rep.lr_bound:.4g} "
          f"-> {'admissible' if rep.admissible else 'NOT admissible'}")

print("\nCSV export (first lines):")
print("\n".join(table_to_csv(joint).splitlines()[:4]))
