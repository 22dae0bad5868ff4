"""
Exact likelihoods
=================

For standardised mean differences and log odds ratios the Bayes factors
can use the exact likelihood instead of the normal approximation.  With
small samples the two differ; with large samples they agree.
"""
from repsuccess import exact_models as em
from repsuccess import normal_model as nm


def compare(model, orig, rep):
    pair = nm.derive_pair(nm.StudySummary(*em.normal_summary(orig)),
                          nm.StudySummary(*em.normal_summary(rep)))
    exact_s = em.exact_sceptical_bf(model, orig, rep)
    exact_r = em.exact_replication_bf(model, orig, rep)
    print(f"{model:6s} z_o={pair.z_o:5.2f} d={pair.d:5.2f}  "
          f"BF_S {nm.sceptical_bf(pair).format():>7s} (exact {exact_s.format():>7s})  "
          f"BF_R {nm.replication_bf(pair).format():>7s} (exact {exact_r.format():>7s})")


# two-sample t statistics with 20 and 500 per arm
compare("smd", em.SmdData(3.0, 20, 20), em.SmdData(2.6, 30, 30))
compare("smd", em.SmdData(3.9, 500, 500), em.SmdData(3.2, 500, 500))

# event counts: x1 of n1 treated, x2 of n2 controls
compare("logor", em.BinomialData(20, 40, 9, 40), em.BinomialData(30, 80, 18, 80))
compare("logor", em.BinomialData(200, 500, 150, 500), em.BinomialData(195, 500, 160, 500))
