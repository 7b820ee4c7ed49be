"""Balance conditions for three comparison constellations.

Balanced from above: eta_w >= 0 and eta_W non-increasing.
Balanced from below: q_W (eta_w - h) >= 1/m.
Failed verdicts come with a witness radius.
"""

from cheegerlab import iso_comparison as ic
from cheegerlab import model_space as ms

grid = ms.log_grid(1e-3, 50.0, 1000)
Z = ic.BoundingFunction.zero()

cases = {
    "hyperbolic ambient, mean curvature <= 1.5": ic.construct_W(2, ms.SpaceForm(-1.0), ic.BoundingFunction.constant(1.5)),
    "w = exp(r^2) + r - 1, minimal": ic.construct_W(2, ms.analytic_profile("exp-r2"), Z),
    "Euclidean, minimal": ic.construct_W(2, ms.SpaceForm(0.0), Z),
}

for name, space in cases.items():
    v = ic.check_balance(space, grid)
    print(f"{name}\n  above={v.balanced_above} below={v.balanced_below}")
    if v.witness_above:
        print("  above fails first at r =", round(v.witness_above["first_violation_r"], 4))
    if v.witness_below:
        print("  below fails first at r =", round(v.witness_below["first_violation_r"], 4))

# the hab family mixes two curvature bounds and recovers w_b exactly
space = ic.construct_W(3, ms.SpaceForm(-4.0), ic.BoundingFunction.hab(-4.0, -1.0))
r = ms.log_grid(0.01, 20, 5)
print("\nhab(-4,-1) on w_-4 gives W = w_-1:")
print("  W   ", space.W.w(r))
print("  w_-1", ms.SpaceForm(-1.0).w(r))
