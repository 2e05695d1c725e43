"""
Abstaining where two equally good predictors split
==================================================

Two hypotheses share the same true risk but disagree on the two tails of
[0, 1]. Any selective classifier that must agree with both of them has to
abstain on the tails, which costs exactly their combined mass.
"""
import numpy as np

from pcslearn import exact_abstain_mass, train_iless, train_less
from pcslearn.worlds import example1_world

world = example1_world(epsilon=0.1)
f1, f2 = world.space.hypotheses()
hyps, r_star = world.all_true_minimizers()
print(f"both predictors have true risk {r_star:.3f}; minimizers: {[world.space.name(h) for h in hyps]}")

# one sample, both learners
sample = world.sample(2000, seed=0)
for name, trainer in (("LESS", train_less), ("ILESS", train_iless)):
    sc = trainer(world.space, sample, delta=0.1)
    kept = sc.low_error_set.contains(f1) and sc.low_error_set.contains(f2)
    mass = exact_abstain_mass(world.space, sc, world)
    print(f"{name:5s} radius {sc.low_error_set.radius:.4f}  keeps both: {kept}  abstain mass {mass:.3f}")

# where does it abstain?
x = np.array([0.05, 0.3, 0.7, 0.95])
print("abstains at", x, "->", sc.abstains(x))
