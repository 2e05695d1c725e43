"""
Rejection mass shrinks as the sample grows
==========================================

In a realizable threshold world the ILESS radius is 3A/m, so the abstain
region is a band of mass about twice that around the learned threshold.
The theoretical cap theta * R0 is printed next to the measured medians.
"""
import numpy as np

from pcslearn import bounds, exact_abstain_mass, train_iless, train_less
from pcslearn.disagreement import theta_star
from pcslearn.worlds import threshold_world

world = threshold_world(0.37)
delta = 0.1
print(f"{'m':>6} {'ILESS':>8} {'LESS':>8} {'cap':>8}")
for m in (128, 512, 2048, 8192):
    iless, less = [], []
    for seed in range(20):
        s = world.sample(m, np.random.default_rng([m, seed]))
        iless.append(exact_abstain_mass(world.space, train_iless(world.space, s, delta), world))
        less.append(exact_abstain_mass(world.space, train_less(world.space, s, delta), world))
    r0 = bounds.r0_radius(m, delta, 1, 0.0)
    cap = min(theta_star(world, min(r0, 1.0)) * r0, 1.0)
    print(f"{m:6d} {np.median(iless):8.4f} {np.median(less):8.4f} {cap:8.4f}")
