"""Giant component emergence on the hypercube
=============================================

Site percolation on Q^d at p = (1+eps)/d has a phase transition at
p = 1/d. This demo sweeps eps at fixed d and watches the largest
component detach from the rest of the size distribution.

The 2*eps*n/d yardstick is an asymptotic (d -> infinity) prediction for
small eps. At d that fits in memory, small eps sits inside the critical
window and the giant is nowhere near its limiting size; the detachment
becomes clean once eps is pushed well past the window. Both regimes are
shown side by side so the finite-size effect is visible rather than
hidden.
"""

from cubeperc import TrialConfig, giant_statistics, make_grid, run_trial, sweep

D = 18
TRIALS = 10

print(f"Q^{D}: n = {1 << D} vertices, p = (1+eps)/{D}\n")
print(f"{'eps':>5} {'mean giant':>11} {'predicted':>10} {'ratio':>6} "
      f"{'unique':>6} {'mean 2nd':>9}")

for eps in (0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8):
    configs, _ = make_grid([D], [eps], trials=TRIALS, master_seed=1)
    records = list(sweep(configs))
    stats = giant_statistics(records)
    mean_second = sum(r.second for r in records) / len(records)
    print(f"{eps:>5g} {stats['mean_giant']:>11.0f} "
          f"{stats['giant_predicted']:>10.0f} "
          f"{stats['ratio_to_predicted']:>6.3f} "
          f"{stats['uniqueness_rate']:>6.2f} {mean_second:>9.0f}")

print("""
Reading the table: below eps ~ 0.2 the largest and second-largest
components are comparable (no unique giant, ratio far under 1); past
eps ~ 0.3 the largest component pulls away and the ratio climbs toward
the asymptotic yardstick. The small-eps rows are inside the critical
window at this dimension, not evidence against the limit statement.
""")

# one fully detailed trial in the clean regime
record = run_trial(TrialConfig(d=D, epsilon=0.5, seed=7))
print(f"one trial at eps=0.5: retained={record.retained} "
      f"giant={record.giant} second={record.second} "
      f"components={record.components_total}")
print(f"top sizes: {list(record.top_sizes)}")
