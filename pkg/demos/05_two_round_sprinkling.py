"""Two-round exposure and sprinkling
===================================

Retention probability p = (1+eps)/d splits into two independent rounds
p1 = (1+eps/2)/d and p2 = eps/(2d-2-eps) with (1-p1)(1-p2) = 1-p held
exactly. Round one builds a giant candidate; the cube is then
partitioned around it:

  T = the giant plus its neighborhood,
  M = outside T but with many (>= eps^2 d/200) neighbors in T,
  S = everything else.

Round two "sprinkles" extra vertices. A component B of (S u M) in the
combined sample merges into the giant exactly when one of its
T-neighbors came up in round two. The analysis stages this reveal and
verifies, per component, that the merge flag agrees with the final
labeling, and that the staged labeling equals what direct sampling at
the full p would give.
"""

import numpy as np

from cubeperc import (
    Hypercube,
    classify_tms,
    components,
    merge_analysis,
    sample_sites,
    survival_census,
    two_round_plan,
    union_samples,
)
from cubeperc.rng import derive_seed

D, EPS, SEED = 14, 0.3, 5

plan = two_round_plan(EPS, D)
print(f"Q^{D}, eps={EPS}: p={plan.p:.5f} p1={plan.p1:.5f} p2={plan.p2:.5f}")
print(f"identity (1-p1)(1-p2)=1-p exact in rationals: {plan.identity_exact()}\n")

q = Hypercube(D)
r1 = sample_sites(D, plan.p1, derive_seed(SEED, 1))
r2 = sample_sites(D, plan.p2, derive_seed(SEED, 2))

part = classify_tms(q, components(q, r1), EPS)
sizes = part.sizes()
print(f"round one: {r1.retained_count()} retained, giant candidate {part.l1_size}")
print(f"T/M/S partition: T={sizes['T']} M={sizes['M']} S={sizes['S']} "
      f"(n={q.n})\n")

analysis = merge_analysis(q, part, r1, r2)
summary = analysis.summary()
print(f"candidate components outside T: {summary['candidates']}")
print(f"merged into the giant by round two: {summary['merged']}")
print(f"per-component flags consistent with final labels: {summary['consistent']}")

print("\nmerge rate by round-one contact (|B cap M| >= c*d):")
for row in analysis.rate_table([0.5, 1.0, 2.0], D):
    rate = "n/a" if row["rate"] is None else f"{row['rate']:.2f}"
    print(f"  c={row['c']:g}: {row['merged']}/{row['eligible']} merged ({rate})")

direct = components(q, union_samples(r1, r2))
same = np.array_equal(analysis.final_labeling.labels, direct.labels) and np.array_equal(
    analysis.final_labeling.vertices, direct.vertices
)
print(f"\nstaged labeling == direct labeling at full p: {same}")

census = survival_census(analysis.final_labeling, D)
print(f"final census: giant={census.giant_size} "
      f"max_nongiant={census.max_nongiant} (ratio to d: {census.ratio:.2f}) "
      f"components={census.component_count}")
print(f"non-giant size histogram: {census.nongiant_size_histogram}")
