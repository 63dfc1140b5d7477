"""Splitting a doubly stochastic matrix into weighted permutations."""
# %%
import numpy as np

from dstoch import decompose, recombine
from dstoch.birkhoff import max_terms
from dstoch.scenarios import WORKED_KERNEL
from dstoch.stochastic import random_doubly_stochastic

# %%
dec = decompose(WORKED_KERNEL)
for perm, w in dec.terms:
    print(f"{w:.3f} x permutation {perm.image}")
print("terms:", len(dec), "bound:", max_terms(3))
print("max reconstruction error:", np.max(np.abs(recombine(dec).data - WORKED_KERNEL.data)))

# %% [markdown]
# A random 6x6 example.  The greedy peel never needs more than (d-1)^2 + 1
# permutations.

# %%
rng = np.random.default_rng(1)
D = random_doubly_stochastic(6, rng)
dec = decompose(D)
print("6x6:", len(dec), "terms, weights sum to", sum(dec.weights))
