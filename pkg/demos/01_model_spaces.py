"""Model spaces and their isoperimetric quotients.

For a space form of curvature b < 0 the quotient Vol(B_r)/Vol(S_r) tends to
1/((m-1) sqrt(-b)); in flat space it grows like r/m.  A warping with
super-exponential growth (exp(r^2) + r - 1) drives it to zero.
"""

import numpy as np

from cheegerlab import model_space as ms

r = np.array([0.5, 1.0, 2.0, 5.0, 10.0, 20.0])

print("q_w(r) = Vol(B_r)/Vol(S_r)")
print(f"{'r':>6} " + " ".join(f"{name:>14}" for name in ("b=0,m=2", "b=-1,m=2", "b=-1,m=3", "exp-r2,m=2")))
spaces = [
    ms.ModelSpace(2, ms.SpaceForm(0.0)),
    ms.ModelSpace(2, ms.SpaceForm(-1.0)),
    ms.ModelSpace(3, ms.SpaceForm(-1.0)),
    ms.ModelSpace(2, ms.analytic_profile("exp-r2")),
]
q = [ms.isoperimetric_quotient(M, r) for M in spaces]
for i, ri in enumerate(r):
    print(f"{ri:6.1f} " + " ".join(f"{col[i]:14.8g}" for col in q))

print("\nlimits: flat q/r -> 1/m, hyperbolic q -> 1/(m-1)")
print("  b=0,m=2  q(20)/20 =", q[0][-1] / 20)
print("  b=-1,m=3 q(20)    =", q[2][-1])

# large radii stay finite because quadrature runs in log space
w = ms.analytic_profile("exp-r2")
print("\nexp-r2 at r=30: log w =", float(w.log_w(30.0)), " eta_w =", float(ms.eta_w(w, 30.0)))
