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
# # Moving the threshold
#
# Scaling the potentiation amplitude shifts where the curve crosses zero.
# Bigger `a_plus` means potentiation wins earlier, so the threshold drops.

# %%
import dataclasses

from stdp_bcm import ExperimentConfig, PairParams, pair_threshold, threshold_modulation

base = PairParams()
for a in (0.85, 1.0, 1.15):
    print(f"a_plus={a}: theta = {pair_threshold(dataclasses.replace(base, a_plus=a)):.1f} Hz")

# %% [markdown]
# The same thing measured by simulation.

# %%
result = threshold_modulation(
    ExperimentConfig(duration=50.0, n_trials=10),
    [{"a_plus": 0.85}, {"a_plus": 1.0}, {"a_plus": 1.15}],
)
for label, est in zip(result.labels, result.thresholds):
    print(label, est.theta_hat)
print("ordering:", result.strictly_ordered)

# %% [markdown]
# With triplet rules the threshold also depends on the recent postsynaptic
# rate. Doubling the recent rate quadruples it here, since p = 2.

# %%
from stdp_bcm import BcmThresholdModel, TripletParams, triplet_threshold_alltoall

trip = TripletParams()
rho0 = 10.0
for rate in (5.0, 10.0, 20.0):
    model = BcmThresholdModel(mean_rho_p=rate**2, rho0_p=rho0**2)
    print(f"<rho_y> = {rate:4.1f} Hz  theta = {triplet_threshold_alltoall(trip, model):.2f} Hz")
