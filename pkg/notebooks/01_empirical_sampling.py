"""
Sampling from an empirical return distribution
===============================================

Fit the CDF table of a return series, draw i.i.d. values from it by
interpolated inverse transform, and compare the folded CDFs.
"""
# %%
import numpy as np

from surrogate_mc import fit_empirical_cdf, folded_cdf, ks_at_knots, sample_iid, sv_generate

# a heavy-tailed stand-in for daily index returns
x = sv_generate(6930, seed=0)
d = fit_empirical_cdf(x)
print(f"{len(d)} knots, range [{d.x_min:.4f}, {d.x_max:.4f}]")

# %%
# draws never leave the historical range: the tails are truncated
draw = sample_iid(d, 100_000, seed=1)
print("draw range inside data range:", d.x_min <= draw.values.min() <= draw.values.max() <= d.x_max)
for n in (1_000, 100_000):
    print(f"KS at knots, n={n}: {ks_at_knots(d, sample_iid(d, n, seed=2).values):.4f}")

# %%
# folded CDF ("mountain plot"): CDF below zero, 1 - CDF above
fold = folded_cdf(d)
peak = fold[np.argmax(fold[:, 1])]
print(f"peak of the folded curve at x={peak[0]:.5f}, p={peak[1]:.3f}")
print("tails:", fold[:3].round(5).tolist(), "...", fold[-3:].round(5).tolist())
