"""
Disagreement coefficients, exact and sampled
============================================

For a threshold in the interior of the uniform marginal, a ball of radius
r disagrees on mass 2r, so the coefficient is 2. For an interval the ball
mass jumps to 1 once the radius reaches the interval's own mass, so a
narrow interval has a large coefficient.
"""
from pcslearn import theta_f
from pcslearn.disagreement import MONTE_CARLO
from pcslearn.worlds import interval_world, threshold_world

w = threshold_world()
exact = theta_f(w.space, w, w.target, 0.01)
mc = theta_f(w.space, w, w.target, 0.01, method=MONTE_CARLO, n=100_000, seed=0)
print(f"threshold: analytic {exact.value}, Monte Carlo {mc.value:.4f}")

w = interval_world(0.45, 0.55)
est = theta_f(w.space, w, w.target, 0.01)
print(f"interval of width 0.1: theta = {est.value:.2f}")
print(est.to_csv().splitlines()[:6])
