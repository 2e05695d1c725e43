"""
How many labels does the active learner ask for?
================================================

Active-ILESS only queries points in the disagreement region of its last
low-error set. The request rate per round falls as the set tightens, so
labels grow much more slowly than the number of examples seen.
"""

from pcslearn import label_complexity_curve
from pcslearn.active import StreamSource, run_active_iless
from pcslearn.worlds import example1_world, threshold_world

world = threshold_world()
grid = [2**k for k in range(6, 15, 2)]
for row in label_complexity_curve(world.space, world, 0.1, grid, trials=10, seed=0):
    print(f"m={row.m:6d}  median labels {row.labels_median:7.1f}  last-round request rate {row.rate_median:.3f}")

# with two equally good predictors the rate settles at their disagreement mass
world = example1_world(0.1)
rep = run_active_iless(world.space, StreamSource(world, 1), 0.1, m=2**14)
for r in rep.per_round[-4:]:
    print(f"t={r.t:6d}  sigma {r.sigma:.3f}  request rate {r.labels_in_round / r.batch_size:.3f}")
print("per-step trace head:")
print(rep.trace_csv().splitlines()[:5])
