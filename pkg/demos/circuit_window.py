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
# # The circuit learning window
#
# The synapse circuit replaces exponentials with voltage ramps that hit a rail.
# The result is a triangular window with finite support. Times are in the
# circuit's accelerated clock (1000x faster than biology by default).

# %%
import numpy as np

from stdp_bcm import PairCircuitParams, PairParams, circuit_learning_window, pair_window

circ = PairCircuitParams()
grid = np.linspace(-1.2 * circ.dep_window, 1.2 * circ.pot_window, 13)
for dt, dw in circuit_learning_window(circ, grid):
    bio = dt * circ.accel
    print(f"{bio * 1e3:+7.2f} ms (bio)  circuit {dw:+.3e}   exponential {pair_window(bio, PairParams()):+.3f}")

# %% [markdown]
# Signs agree with the exponential rule everywhere inside the window.
# Outside it the circuit is exactly zero.

# %%
from stdp_bcm.circuit import pair_circuit_drift

for r in (5, 20, 40, 80):
    print(f"{r:3d} Hz  drift {pair_circuit_drift(circ, 10.0, r):+.3e} V/s")
