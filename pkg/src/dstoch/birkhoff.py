"""Birkhoff-von Neumann decomposition by greedy peeling.

Each round finds a permutation inside the support of the residual with
Hopcroft-Karp, removes the largest multiple of that permutation matrix that
keeps the residual nonnegative, and stops once nothing is left.  Adjacency
lists are scanned in increasing column order, so the output is a
deterministic function of the input.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoPerfectMatching, TermBoundExceeded, ValidationError
from .stochastic import (
    DoublyStochasticMatrix,
    Permutation,
    validate_doubly_stochastic,
)

TOL_SUPPORT = 1e-10
TOL_RESIDUAL = 1e-9

_NIL = -1


def hopcroft_karp(adj: list[list[int]], n_right: int) -> list[int]:
    """Maximum matching of a bipartite graph.

    ``adj[u]`` lists the right vertices adjacent to left vertex ``u``.
    Returns ``match[u]`` (right partner or -1) for every left vertex.
    """
    n_left = len(adj)
    match_l = [_NIL] * n_left
    match_r = [_NIL] * n_right
    dist = [0] * n_left
    inf = n_left + 1

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == _NIL:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = inf
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == _NIL:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        # iterative would be overkill: depth is bounded by d
        for v in adj[u]:
            w = match_r[v]
            if w == _NIL or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = inf
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == _NIL:
                dfs(u)
    return match_l


def support_permutation(m: np.ndarray, tol: float = TOL_SUPPORT) -> Permutation | None:
    """A permutation ``p`` with ``m[i, p(i)] > tol`` for all ``i``, or None."""
    d = m.shape[0]
    adj = [np.flatnonzero(m[i] > tol).tolist() for i in range(d)]
    match = hopcroft_karp(adj, d)
    if _NIL in match:
        return None
    return Permutation(tuple(match))


def max_terms(d: int) -> int:
    return (d - 1) ** 2 + 1


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Convex combination ``sum(w * M_p)`` of permutation matrices."""

    terms: tuple[tuple[Permutation, float], ...]
    d: int

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("decomposition needs at least one term")
        for perm, w in self.terms:
            if perm.d != self.d:
                raise DimensionMismatch(f"term permutation has d={perm.d}, expected {self.d}")
            if not w > 0.0:
                raise ValidationError(f"non-positive weight {w!r}")
        if abs(sum(w for _, w in self.terms) - 1.0) > 1e-9:
            raise ValidationError("weights do not sum to 1")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.terms])

    @property
    def permutations(self) -> list[Permutation]:
        return [p for p, _ in self.terms]

    def __len__(self):
        return len(self.terms)


def decompose(D) -> BirkhoffDecomposition:
    """Greedy Birkhoff-von Neumann decomposition of ``D``.

    Raises:
        NoPerfectMatching: the residual support has no permutation, which for
            valid input means round-off corrupted the residual.
        TermBoundExceeded: more than ``(d-1)**2 + 1`` rounds were needed.
    """
    D = validate_doubly_stochastic(D)
    d = D.d
    residual = np.array(D.data)
    rows = np.arange(d)
    terms: list[tuple[Permutation, float]] = []
    while residual.max() >= TOL_RESIDUAL:
        if len(terms) >= max_terms(d):
            raise TermBoundExceeded(
                f"peeling needed more than {max_terms(d)} terms; residual max {residual.max():.3e}"
            )
        perm = support_permutation(residual)
        if perm is None:
            raise NoPerfectMatching(
                f"residual support has no perfect matching after {len(terms)} terms"
            )
        cols = list(perm.image)
        entries = residual[rows, cols]
        w = float(entries.min())
        residual[rows, cols] -= w
        # the minimising entries are structural zeros from now on
        residual[rows[entries == w], np.asarray(cols)[entries == w]] = 0.0
        residual[residual < TOL_SUPPORT] = 0.0
        terms.append((perm, w))
    total = sum(w for _, w in terms)
    return BirkhoffDecomposition(tuple((p, w / total) for p, w in terms), d)


def recombine(dec: BirkhoffDecomposition) -> DoublyStochasticMatrix:
    m = np.zeros((dec.d, dec.d))
    rows = np.arange(dec.d)
    for perm, w in dec.terms:
        m[rows, list(perm.image)] += w
    return validate_doubly_stochastic(m)


def reconstruction_error(dec: BirkhoffDecomposition, D) -> float:
    """Largest entrywise deviation between ``recombine(dec)`` and ``D``."""
    D = validate_doubly_stochastic(D)
    return float(np.max(np.abs(recombine(dec).data - D.data)))
