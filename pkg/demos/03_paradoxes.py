"""
Where the methods disagree
==========================

Success regions in terms of the relative effect estimate d, the
replication paradox (success with an estimate of the opposite sign) and
the shrinkage paradox (success for arbitrarily small positive d).
"""
import numpy as np

from repsuccess.frequentist import METHODS, d_min_limit, paradox_thresholds, success_region
from repsuccess.normal_model import z_from_min_bf

gamma = 1 / 3
z_o = z_from_min_bf(1 / 10)   # original study with minBF_o = 1/10
for method in METHODS:
    region = success_region(method, z_o, 1.0, gamma)
    print(f"{method:15s}", [(round(a, 3), round(b, 3)) for a, b in region.intervals])

# Bayes factors can flag success when the replication points the other way
print(paradox_thresholds(z_o, 1.0, gamma))
# ...but not once the advocacy prior is truncated to the original sign
print(paradox_thresholds(z_o, 1.0, gamma, truncate=True))

# d_min as the replication grows (c) and as the original gets stronger (z_o)
z_o = 3.0
print("\nc        " + "".join(f"{m:>16s}" for m in METHODS))
for c in (1.0, 10.0, 1e2, 1e4, 1e6):
    print(f"{c:<9g}" + "".join(f"{success_region(m, z_o, c, gamma).d_min:16.5f}" for m in METHODS))
print("limit    " + "".join(f"{d_min_limit(m, 'c_to_infinity', gamma, z_o=z_o):16.5f}" for m in METHODS))

print("\nz_o      " + "".join(f"{m:>16s}" for m in METHODS))
for z in np.array([3.0, 10.0, 30.0, 100.0]):
    print(f"{z:<9g}" + "".join(f"{success_region(m, z, 1.0, gamma).d_min:16.5f}" for m in METHODS))
print("limit    " + "".join(f"{d_min_limit(m, 'zo2_to_infinity', gamma, c=1.0):16.5f}" for m in METHODS))
