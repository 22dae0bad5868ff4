"""
A sceptical Bayes factor by hand
================================

One original study with z = 3 and one replication with z = 2.5, both of
the same precision.  We walk from the sceptical prior to the sceptical
Bayes factor.
"""
import numpy as np

from repsuccess import normal_model as nm

pair = nm.ReplicationPair.from_z(3.0, 2.5, c=1.0)
print(pair)

# How strongly can the original study speak against the null at most?
print("minBF_o =", nm.min_bf(pair.z_o).format(), " minBF_r =", nm.min_bf(pair.z_r).format())

# The sceptic picks the prior variance g that just reduces the original
# evidence to the level gamma.  Then the replication decides between the
# sceptic and the advocate.
for gamma in (1 / 10, 1 / 3):
    g = nm.sufficiently_sceptical_g(pair.z_o, gamma)
    print(f"gamma = 1/{1 / gamma:.0f}: g = {g:.3f}, BF_SA = {nm.bf_sa(pair, g).format()}")

# BF_0S and BF_SA as functions of g; they cross at the sceptical Bayes factor
g = np.geomspace(1e-2, 1e2, 9)
for gi in g:
    print(f"g={gi:8.3f}  BF_0S={nm.bf_0s(pair.z_o, gi).value:8.4f}  BF_SA={nm.bf_sa(pair, gi).value:8.4f}")

bfs = nm.sceptical_bf(pair)
print("BF_S =", bfs.format(), f"({bfs.value:.5f})")
print("replication BF =", nm.replication_bf(pair).format())
print("recalibrated sceptical p =", nm.format_p(nm.sceptical_p(pair, recalibrate=True)))
