# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # A BCM curve from pair STDP
#
# Pair each presynaptic spike with the nearest postsynaptic spikes on either
# side, drive both neurons with Poisson trains, and the mean weight change per
# presynaptic spike becomes a function of the postsynaptic rate alone. Below a
# threshold rate it is negative, above it positive.

# %%
import numpy as np

from stdp_bcm import ExperimentConfig, PairParams, bcm_sweep, extract_threshold, pair_bcm_curve, pair_threshold

params = PairParams(a_plus=1.0, a_minus=0.7, tau_plus=0.0168, tau_minus=0.0337)
print(f"closed-form threshold: {pair_threshold(params):.2f} Hz")

# %% [markdown]
# The closed form, tabulated. Note the curve saturates at `A+ + A-` for large
# rates instead of growing without bound.

# %%
for r in (5, 20, 40, 60, 120, 1000):
    print(f"{r:6d} Hz  {pair_bcm_curve(params, r):+.4f}")

# %% [markdown]
# Now a short Monte-Carlo sweep. Fewer trials than a full run, so expect the
# estimate to wobble by a couple of Hz.

# %%
config = ExperimentConfig(params=params, rho_y=tuple(np.linspace(10, 100, 10)), duration=50.0, n_trials=10)
points = bcm_sweep(config)
for p in points:
    print(f"{p.rho_y:6.1f} Hz  mc {p.mean_drift:+.4f} ± {p.std_error:.4f}   theory {pair_bcm_curve(params, p.rho_y):+.4f}")
print("estimated threshold:", extract_threshold(points).theta_hat)
