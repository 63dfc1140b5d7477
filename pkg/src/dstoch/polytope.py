"""Universal convex polytopes: convex hulls of permutation orbits.

The hull of all coordinate permutations of ``x`` contains every state a
doubly stochastic chain started at ``x`` can ever reach.  Membership is
decided by majorization (Rado's theorem), in ``O(d log d)``.  A linear
feasibility oracle over the explicit vertex list is kept alongside as an
independent check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionMismatch, DimensionTooLarge, SolverFailure, ValidationError
from .stochastic import (
    DoublyStochasticMatrix,
    Permutation,
    ProbabilityVector,
    majorizes,
    shannon_entropy,
    validate_doubly_stochastic,
    validate_probability_vector,
)

MAX_ORBIT_DIM = 8
MAX_ORACLE_VERTICES = 5000
TOL_DEDUP = 1e-12
TOL_MEMBER = 1e-9


@dataclass(frozen=True, eq=False)
class UniversalPolytope:
    """Convex hull of the distinct permutations of ``generator``.

    ``vertices[i] == generator @ M_p`` for ``p = permutations[i]``; vertices
    are stored with all ``d`` coordinates.
    """

    generator: ProbabilityVector
    vertices: np.ndarray
    permutations: tuple[Permutation, ...]

    @property
    def d(self) -> int:
        return self.generator.d

    def __len__(self):
        return self.vertices.shape[0]


def _value_labels(x: np.ndarray, tol: float) -> np.ndarray:
    """Integer label per component; components within ``tol`` share a label."""
    order = np.argsort(x, kind="stable")
    labels = np.empty(x.shape[0], dtype=np.int64)
    current = 0
    for rank, i in enumerate(order):
        if rank and x[i] - x[order[rank - 1]] > tol:
            current += 1
        labels[i] = current
    return labels


def orbit_vertices(x) -> UniversalPolytope:
    """Enumerate the distinct permuted copies of ``x`` (at most ``d!``)."""
    x = validate_probability_vector(x)
    d = x.d
    if d > MAX_ORBIT_DIM:
        raise DimensionTooLarge(f"orbit enumeration is limited to d <= {MAX_ORBIT_DIM}, got {d}")
    labels = _value_labels(x.data, TOL_DEDUP)
    seen = set()
    verts, perms = [], []
    for image in itertools.permutations(range(d)):
        # (x M_p)[image[a]] = x[a]
        key = [0] * d
        for a, b in enumerate(image):
            key[b] = labels[a]
        key = tuple(key)
        if key in seen:
            continue
        seen.add(key)
        v = np.empty(d)
        v[list(image)] = x.data
        verts.append(v)
        perms.append(Permutation(image))
    vertices = np.array(verts)
    vertices.setflags(write=False)
    return UniversalPolytope(x, vertices, tuple(perms))


def _same_dim(p: UniversalPolytope, y: ProbabilityVector):
    if p.d != y.d:
        raise DimensionMismatch(f"polytope has d={p.d}, vector has d={y.d}")


def contains(p: UniversalPolytope, y) -> bool:
    """Whether ``y`` lies in the polytope, i.e. the generator majorizes ``y``."""
    y = validate_probability_vector(y)
    _same_dim(p, y)
    return majorizes(p.generator.data, y.data, TOL_MEMBER)


def is_nested(inner: UniversalPolytope, outer: UniversalPolytope) -> bool:
    """Whether ``inner`` is a subset of ``outer``.

    Majorization is permutation invariant, so checking the generator is the
    same as checking every vertex.
    """
    if inner.d != outer.d:
        raise DimensionMismatch(f"polytopes have d={inner.d} and d={outer.d}")
    return contains(outer, inner.generator)


def min_entropy(p: UniversalPolytope) -> float:
    """Smallest entropy over the polytope.

    Entropy is concave and constant on the orbit, so the minimum over the
    hull is attained at the vertices and equals the generator's entropy.
    """
    return shannon_entropy(p.generator)


def _feasibility_weights(p: UniversalPolytope, y: np.ndarray):
    n = len(p)
    if n > MAX_ORACLE_VERTICES:
        raise DimensionTooLarge(f"oracle is limited to {MAX_ORACLE_VERTICES} vertices, got {n}")
    a_eq = np.vstack([p.vertices.T, np.ones((1, n))])
    b_eq = np.concatenate([y, [1.0]])
    res = linprog(
        np.zeros(n),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    if res.status == 0:
        return np.clip(res.x, 0.0, None)
    if res.status == 2:
        return None
    raise SolverFailure(f"linprog status {res.status}: {res.message}")


def membership_oracle(p: UniversalPolytope, y) -> bool:
    """Decide membership by solving the convex-combination feasibility
    problem over the vertex list.  Slow; meant for cross-checking
    :func:`contains`."""
    y = validate_probability_vector(y)
    _same_dim(p, y)
    return _feasibility_weights(p, y.data) is not None


def realizing_kernel(p: UniversalPolytope, y) -> DoublyStochasticMatrix:
    """A doubly stochastic ``D`` with ``generator @ D == y``.

    Built as ``sum(lambda_p M_p)`` from the oracle's convex weights, so
    every point of the polytope is reachable in one step.
    """
    y = validate_probability_vector(y)
    _same_dim(p, y)
    w = _feasibility_weights(p, y.data)
    if w is None:
        raise ValidationError("vector is not in the polytope")
    w = w / w.sum()
    d = p.d
    m = np.zeros((d, d))
    rows = np.arange(d)
    for weight, perm in zip(w, p.permutations):
        if weight > 0.0:
            m[rows, list(perm.image)] += weight
    return validate_doubly_stochastic(m)


def export_hat_vertices(p: UniversalPolytope) -> np.ndarray:
    """Vertices with the last (dependent) coordinate dropped, rows sorted
    lexicographically.  For ``d == 1`` the result has zero columns."""
    hat = p.vertices[:, :-1]
    if hat.shape[1] == 0:
        return hat.copy()
    order = np.lexsort(hat.T[::-1])
    return hat[order]
