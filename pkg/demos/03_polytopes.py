"""Universal polytopes: every future state lies in the permutation hull of
the current one, and the hulls shrink as the chain runs."""
# %%
import numpy as np

from dstoch import contains, export_hat_vertices, is_nested, min_entropy, orbit_vertices, propagate
from dstoch.scenarios import UNREACHABLE_VECTOR, WORKED_KERNEL, WORKED_VECTOR, WORKED_VECTOR_D4

# %%
outer = orbit_vertices(WORKED_VECTOR)
print("vertices of the outer hexagon (last coordinate dropped):")
print(export_hat_vertices(outer))

x2 = propagate(WORKED_VECTOR, WORKED_KERNEL)
inner = orbit_vertices(x2)
print("x(2) inside:", contains(outer, x2))
print("inner hexagon nested in outer:", is_nested(inner, outer))
print("(0.4, 0.5, 0.1) reachable:", contains(outer, UNREACHABLE_VECTOR))

# %% [markdown]
# The vertices all share the generator's entropy, which bounds from below
# anything the chain can reach.

# %%
print("entropy floor:", round(min_entropy(outer), 4), "->", round(min_entropy(inner), 4))

# %%
p4 = orbit_vertices(WORKED_VECTOR_D4)
print("d=4 polytope:", len(p4), "vertices in", p4.d - 1, "coordinates")
print(np.round(export_hat_vertices(p4)[:5], 3), "...")
