"""The exact algebra connecting cleaning errors to metric estimation bias.

On a finite world every probability is a count ratio, so the identities
can be verified in rational arithmetic with no tolerance at all.  The
four-example world below is small enough to check by hand and large
enough to show the one subtlety: the FPR gap is the joint error contrast
divided by p(y=0), and collapsing it to p(c=1) times the conditional
contrast is wrong unless errors are independent of the true label.
"""

from fractions import Fraction

import numpy as np

import cleanval as cv

world = cv.EmpiricalWorld(
    scores=np.array([0.9, 0.8, 0.7, 0.1]),
    y_true=[1, 1, 1, 0],
    y_observed=[1, 1, 0, 0],
    c=[1, 1, 0, 1],
)
t = 0.5
print("world:", world.to_dict())
print(f"calibrated: {world.is_calibrated()}  (#e1={world.count('e1')}, #e2={world.count('e2')})")

fpr = cv.check_fpr_gap(world, t)
tpr = cv.check_tpr_gap(world, t)
print(f"\nFPR gap at t={t}: actual - estimate = {fpr.lhs:+.4f}, identity rhs = {fpr.rhs:+.4f}")
print(f"TPR gap at t={t}: actual - estimate = {tpr.lhs:+.4f}, identity rhs = {tpr.rhs:+.4f}")

# the tempting shortcut: scale the conditional contrast by p(c=1).
# here it predicts -3/4 while the actual gap is -1.
bracket = world.prob_above_given("e1", t) - world.prob_above_given("e2", t)
naive = world.prob("c=1") * bracket
exact = (world.prob("e1") / world.prob("y=0")) * bracket
print(f"\nconditional contrast p(f>t|e1) - p(f>t|e2) = {bracket}")
print(f"p(c=1) * contrast        = {naive}   (wrong)")
print(f"p(e1)/p(y=0) * contrast  = {exact}   (matches the gap)")
assert Fraction(fpr.lhs) == exact != naive

tpr_gap = world.prob_above_given("y=1", t) - world.prob_above_given("c=1", t)
fpr_gap = world.prob_above_given("y=0", t) - world.prob_above_given("c=0", t)
print(f"\nTPR gap / FPR gap = {tpr_gap / fpr_gap} "
      f"= -p(c=0)/p(c=1) = {-world.prob('c=0') / world.prob('c=1')}")
assert cv.check_gap_ratio(world, t).passed

# the same identities hold on every calibrated world at every threshold
rng = np.random.default_rng(42)
checks = 0
for _ in range(300):
    w = cv.random_world(rng, n=int(rng.integers(4, 40)))
    for cut in w.distinct_scores():
        assert cv.check_fpr_gap(w, float(cut)).gap == 0.0
        assert cv.check_tpr_gap(w, float(cut)).gap == 0.0
        assert cv.check_covariance_form(w, float(cut)).gap == 0.0
        checks += 3
print(f"\nrandomized sweep: {checks} identity checks, every one exact")
