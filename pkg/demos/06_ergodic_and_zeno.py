"""One qutrit Hamiltonian, two regimes: measured once per unit time the
chain mixes, measured every millisecond it freezes."""
# %%
import numpy as np

from dstoch import ergodicity_report, mixing_time_estimate, spectral_analysis
from dstoch.scenarios import ERGODIC_HAMILTONIAN, ergodic_kernel, ergodic_run, zeno_run

# %%
print("h =\n", ERGODIC_HAMILTONIAN.data)
D = ergodic_kernel(1.0)
print("kernel at t=1:\n", D.data.round(4))
spectrum = spectral_analysis(D)
print("eigenvalues:", np.round(spectrum.eigenvalues.real, 4).tolist())
print("mixing time:", round(mixing_time_estimate(D), 3))

rec = ergodic_run(n_steps=8)
rep = ergodicity_report(rec.schedule, 0.01)
# deviation of the composite kernel from time 1 to time n, i.e. D^(n-1)
for n, dev in enumerate(rep.max_deviation, start=1):
    print(f"n={n}: max|D_1,n - 1/3| = {dev:.2e}")
print("within 0.01 of uniform from n =", rep.ergodic_at)

# %% [markdown]
# Shrinking the interval makes each step a near-identity kernel.  The
# transfer probabilities scale with the square of the interval, so many
# quick measurements barely move the state.

# %%
zeno = zeno_run(t_step=1e-3, s_max=100)
print("epsilon_max:", f"{zeno.epsilon_max:.2e}")
print("drift after 100 steps:", f"{zeno.drift[-1]:.2e}")
print("probability of never moving:", round(zeno.frozen_mass[-1], 6))
print("path entropy at horizons 2, 11, 101:", [round(zeno.path_entropies[i], 4) for i in (0, 9, 99)])
