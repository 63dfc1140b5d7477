"""Distributions over whole trajectories, exact and sampled."""
# %%
import math

import numpy as np

from dstoch import ChainSchedule, path_distribution, path_entropy, schedule_path_entropy
from dstoch.scenarios import WORKED_KERNEL, WORKED_VECTOR
from dstoch.stochastic import uniform_matrix

# %% [markdown]
# With the uniform kernel every path after the first state is equally
# likely.  Starting from a certain state the normalised path entropy is
# ((s-1)/s) ln d, which approaches ln d.

# %%
d = 3
start = np.eye(d)[0]
for s in (1, 2, 4, 8):
    dist = path_distribution(ChainSchedule.homogeneous(start, uniform_matrix(d), s - 1))
    print(f"s={s}: path entropy {path_entropy(dist):.4f}  closed form {(s - 1) / s * math.log(d):.4f}")

# %% [markdown]
# Sampling gives the same marginals up to noise.  The exact path entropy is
# still available without enumerating paths.

# %%
schedule = ChainSchedule.homogeneous(WORKED_VECTOR, WORKED_KERNEL, 4)
mc = path_distribution(schedule, "monte_carlo", n_samples=50_000, seed=3)
print("final marginal, sampled:", np.round(mc.marginal([5]), 3).tolist())
print("final marginal, exact:  ", np.round(schedule.states[-1].data, 3).tolist())
print("exact path entropy:", round(schedule_path_entropy(schedule), 4))
