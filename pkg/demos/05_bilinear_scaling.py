# %% [markdown]
# # Bilinear Strichartz scaling
#
# Free waves at frequencies ``M << N`` interact weakly: the ``L^2_{t,x}`` norm
# of their product decays like ``(M/N)^{1/2}``. This takes about 20 seconds.

# %%
import numpy as np

from resonant_nls.diagnostics import bilinear_probe

fit = bilinear_probe(6, [3, 2, 1, 0], p=2.0)
for r, v in zip(fit.ratios, fit.values):
    print(f"M/N = {r:.4f}   normalised norm = {v:.5f}")
print(f"slope {fit.slope:.3f} +- {fit.slope_stderr:.3f} (expected 0.5), R^2 = {fit.r2:.4f}")
print("log-log residuals:", np.round(np.log(fit.values) - (fit.slope * np.log(fit.ratios) + fit.intercept), 4))
