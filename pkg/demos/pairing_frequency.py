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
# # Pairing frequency
#
# Pre-before-post pairs at 10 ms, repeated 60 times. As the repetition rate
# rises, each post spike also lands shortly before the next pre spike. Pair
# STDP counts that as depression, so its net change falls. The triplet rule
# goes the other way: post spikes start to see each other and potentiation
# grows. The two columns use different amplitude scales.

# %%
from stdp_bcm import PairParams, TripletParams, pairing_frequency_sweep

freqs = [1, 5, 10, 20, 40]
pair = pairing_frequency_sweep(PairParams(), 0.01, freqs, 60)
trip = pairing_frequency_sweep(TripletParams(), 0.01, freqs, 60)
for (f, a), (_, b) in zip(pair, trip):
    print(f"{f:4.0f} Hz  pair {a:+.3f}  triplet {b:+.3f}")
