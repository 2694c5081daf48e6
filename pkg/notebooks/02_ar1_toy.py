"""
Annealing an AR(1) autocorrelation
==================================

Shuffled i.i.d. draws carry no memory. Swapping pairs of them under
simulated annealing recovers the autocorrelation of an AR(1) series,
here p = 0.6 up to lag 10.
"""
# %%
import numpy as np

from surrogate_mc import (AnnealConfig, FeatureSpec, anneal_run, ar1_generate, fit_empirical_cdf,
                          rho, sample_iid, theoretical_ar1_acf)

x = ar1_generate(0.6, 10_000, seed=1)
spec = FeatureSpec.acf(10)
target = rho(x, spec)
draw = sample_iid(fit_empirical_cdf(x), x.size, seed=2)
print("lag-1 autocorrelation: data %.3f, draw %.3f" % (target.entries[0], rho(draw.values, spec).entries[0]))

# %%
rep = anneal_run(draw, target, spec, AnnealConfig(seed=3, log_every=100_000))
print(rep.terminated_by, "after", rep.iterations, "iterations,", rep.accepted, "accepted")
for it, delta, temp in rep.trajectory:
    print(f"  {int(it):>8d}  delta {delta:.4f}  T {temp:.2e}")

# %%
table = np.column_stack([np.arange(1, 11), theoretical_ar1_acf(0.6, 10), target.entries,
                         rho(rep.final_series, spec).entries])
print("lag  theory  data  surrogate")
print(np.array2string(table, precision=3, suppress_small=True))
