"""Cheeger bounds from comparison spaces.

Upper bound: lim Vol(S^W_t)/Vol(B^W_t).  Lower bound: (m-1) lim eta_W.
For space forms both equal (m-1) sqrt(-b).  Negative lower bounds are
reported as they are, with a warning.
"""

import json

from cheegerlab import iso_comparison as ic
from cheegerlab import model_space as ms

Z = ic.BoundingFunction.zero()
for m, b in [(2, -1.0), (3, -1.0), (2, -4.0), (4, -0.25)]:
    s = ic.construct_W(m, ms.SpaceForm(b), Z)
    up, lo = ic.cheeger_upper_value(s), ic.cheeger_lower_value(s)
    print(f"m={m} b={b:5}: upper={up.value:.10f} lower={lo.value:.10f} expected={(m - 1) * (-b) ** 0.5:.10f}")

# mean curvature bounded by 1 in H^3: W grows like e^{-r}, the lower bound is vacuous
s = ic.construct_W(2, ms.SpaceForm(-1.0), ic.BoundingFunction.constant(1.0))
lo = ic.cheeger_lower_value(s)
print("\nh = 1 in H^3:", json.dumps(lo.to_dict(), indent=1)[:400], "...")
