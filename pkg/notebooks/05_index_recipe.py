"""
Index surrogates with the full preset
=====================================

The full recipe reorders draws of ~6930 daily returns until four
correlation terms match, to lag 40 for returns and leverage and lag 200
for volatility. That takes up to 1e8 steps. From the shell::

    smc fit --input spy.csv --out dist.txt
    smc surrogate --input spy.csv --preset sp500 --n-real 3 --seed 7 --out-dir run
    smc diagnose --target run/target.txt --surrogate run/realization_0.txt --out-dir diag

This script runs the same pipeline in-process on a synthetic price file
with a small step budget, so it finishes in seconds. Pass a price file and
a budget to run it for real: ``python 05_index_recipe.py spy.csv 100000000``.
"""
# %%
import sys
import tempfile
from pathlib import Path

import numpy as np

from surrogate_mc import (AnnealConfig, FeatureSpec, fit_empirical_cdf, log_returns,
                          parse_price_csv, rho, run_realizations, sv_generate)

work = Path(tempfile.mkdtemp())
if len(sys.argv) > 1:
    prices = Path(sys.argv[1])
else:
    p = 100 * np.exp(np.concatenate([[0.0], np.cumsum(sv_generate(6930, seed=0))]))
    prices = work / "synthetic.csv"
    prices.write_text("Close\n" + "\n".join(repr(float(v)) for v in p) + "\n")
budget = int(sys.argv[2]) if len(sys.argv) > 2 else 200_000

# %%
x = log_returns(parse_price_csv(prices)).values
spec = FeatureSpec.preset("sp500")
print(f"{x.size} returns, {spec.n_entries} feature entries")
reps = run_realizations(3, 7, fit_empirical_cdf(x), rho(x, spec), spec,
                        AnnealConfig(max_iterations=budget, log_every=budget), n=x.size)

# %%
# price paths from the surrogate returns, all starting at the first price
p0 = parse_price_csv(prices).prices[0]
for k, rep in enumerate(reps):
    path = p0 * np.exp(np.cumsum(rep.final_series))
    print(f"realization {k}: {rep.terminated_by}, delta {rep.final_delta:.3f}, "
          f"{rep.n_outside} entries outside band, final price {path[-1]:.1f}")
