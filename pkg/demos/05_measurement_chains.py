"""Repeated non-selective measurements turn unitary dynamics into a
doubly stochastic Markov chain."""
# %%
import math

import numpy as np

from dstoch import ChainSchedule, state_at
from dstoch.quantum import fourier_matrix, markov_vs_quantum_gap, position_state, random_unitary
from dstoch.scenarios import maximally_mixed_run, momentum_state_run, position_state_run

rng = np.random.default_rng(4)
d = 3
evolutions = [random_unitary(d, rng) for _ in range(5)]

# %% [markdown]
# Position state: the first measurement is certain, then the record spreads
# out.  The entropies form a staircase, flat across unitary steps and rising
# at measurements.

# %%
rec = position_state_run(d, 0, evolutions)
print("staircase:", np.round(rec.staircase, 4).tolist())
replay = ChainSchedule(rec.vectors[0], rec.kernels)
err = max(np.max(np.abs(v.data - state_at(replay, s).data)) for s, v in enumerate(rec.vectors, start=1))
print("classical replay error:", err)

# %% [markdown]
# A Fourier-basis state looks uniform in position from the start, and so
# does the maximally mixed state.  Neither can change.

# %%
for name, rec in [("momentum", momentum_state_run(d, 1, evolutions)), ("mixed", maximally_mixed_run(d, evolutions))]:
    worst = max(np.max(np.abs(v.data - 1 / d)) for v in rec.vectors)
    print(f"{name}: max |x - u| = {worst:.1e}, entropy/ln d = {rec.entropies[-1] / math.log(d):.6f}")

# %% [markdown]
# Skipping the middle measurement keeps the interference terms, so the
# two-step transfer is no longer the product of one-step kernels.

# %%
F = fourier_matrix(2)
gap = markov_vs_quantum_gap(position_state(2, 0), F, F)
print("with measurement:\n", gap.D_with_meas.data.round(3))
print("without:\n", gap.D_without.data.round(3))
print("max gap:", gap.max_gap)
