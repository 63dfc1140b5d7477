"""A single doubly stochastic step and what it does to entropy.

Run with ``python demos/01_worked_chain.py``.
"""
# %%
import numpy as np

from dstoch import ChainSchedule, entropy_trace, state_at
from dstoch.scenarios import WORKED_KERNEL, WORKED_VECTOR

# %% [markdown]
# Start from x = (0.2, 0.3, 0.5) and apply one kernel whose rows and columns
# all sum to one.  States are row vectors, so the update is x @ D.

# %%
schedule = ChainSchedule(WORKED_VECTOR, (WORKED_KERNEL,))
print("D =\n", np.asarray(WORKED_KERNEL))
print("x(1) =", state_at(schedule, 1).tolist())
print("x(2) =", np.round(state_at(schedule, 2).data, 12).tolist())

# %% [markdown]
# Doubly stochastic steps can only push the state toward uniform: entropy
# goes up and the relative entropy to u goes down.

# %%
trace = entropy_trace(schedule)
for s, (e, kl) in enumerate(zip(trace.entropies, trace.kl), start=1):
    print(f"s={s}  E={e:.4f}  KL(x||u)={kl:.4f}")
print("entropy produced:", f"{trace.production(1, 2):.4f}")
