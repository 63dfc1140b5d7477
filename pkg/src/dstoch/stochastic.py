"""Probability vectors, doubly stochastic matrices and permutations.

Vectors are row vectors and act on matrices from the left, ``x @ D``, which
is the usual Markov-chain convention.  All validated objects wrap a read-only
``numpy`` array and support ``np.asarray``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ColSumMismatch,
    DimensionMismatch,
    EigenSolverFailure,
    NegativeComponent,
    NegativeEntry,
    NotSquare,
    RowSumMismatch,
    SumMismatch,
    ValidationError,
)

TOL_NEG = 1e-12
TOL_SUM = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class ProbabilityVector:
    """A validated probability vector.  Build with
    :func:`validate_probability_vector`; the constructor does not check."""

    __slots__ = ("_data",)

    def __init__(self, data):
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def d(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def __len__(self):
        return self.d

    def __getitem__(self, i):
        return self._data[i]

    def __iter__(self):
        return iter(self._data.tolist())

    def tolist(self) -> list[float]:
        return self._data.tolist()

    def __repr__(self):
        return f"ProbabilityVector({self._data.tolist()!r})"


class DoublyStochasticMatrix:
    """A validated doubly stochastic matrix (see
    :func:`validate_doubly_stochastic`)."""

    __slots__ = ("_data",)

    def __init__(self, data):
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def d(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, DoublyStochasticMatrix):
            return validate_doubly_stochastic(self._data @ other.data)
        return NotImplemented

    def tolist(self) -> list[list[float]]:
        return self._data.tolist()

    def __repr__(self):
        return f"{type(self).__name__}({self._data.tolist()!r})"


@dataclass(frozen=True)
class Permutation:
    """Bijection ``i -> image[i]`` of ``{0, ..., d-1}``."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise ValidationError(f"{image!r} is not a permutation of 0..{len(image) - 1}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(tuple(range(d)))

    @property
    def d(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        if other.d != self.d:
            raise DimensionMismatch(f"cannot compose permutations of size {self.d} and {other.d}")
        return Permutation(tuple(self.image[other.image[i]] for i in range(self.d)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.d
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def matrix(self) -> "PermutationMatrix":
        return PermutationMatrix(self)


class PermutationMatrix(DoublyStochasticMatrix):
    """``M[a, b] = 1`` iff ``b == perm(a)``.

    With this convention ``M_p2 @ M_p1 == M_(p1 ∘ p2)`` and
    ``(x @ M_p)[b] == x[p^-1(b)]``.
    """

    __slots__ = ("permutation",)

    def __init__(self, permutation: Permutation | Sequence[int]):
        if not isinstance(permutation, Permutation):
            permutation = Permutation(tuple(permutation))
        d = permutation.d
        m = np.zeros((d, d))
        m[np.arange(d), list(permutation.image)] = 1.0
        super().__init__(m)
        self.permutation = permutation


def validate_probability_vector(raw) -> ProbabilityVector:
    """Check nonnegativity and unit sum; clamp round-off negatives to zero.

    Raises:
        NegativeComponent: an entry is below ``-1e-12``.
        SumMismatch: the components do not sum to 1 within ``1e-9``.
    """
    if isinstance(raw, ProbabilityVector):
        return raw
    x = np.array(raw, dtype=float).reshape(-1) if np.ndim(raw) else np.array([raw], dtype=float)
    if x.size == 0:
        raise ValidationError("probability vector must be nonempty")
    if not np.all(np.isfinite(x)):
        raise ValidationError("probability vector has non-finite components")
    bad = np.flatnonzero(x < -TOL_NEG)
    if bad.size:
        raise NegativeComponent(int(bad[0]), float(x[bad[0]]))
    x = np.where(x < 0.0, 0.0, x)
    total = float(math.fsum(x))
    if abs(total - 1.0) > TOL_SUM:
        raise SumMismatch(total)
    return ProbabilityVector(x)


def validate_doubly_stochastic(raw) -> DoublyStochasticMatrix:
    """Check a square nonnegative matrix has unit row and column sums.

    Raises:
        NotSquare, NegativeEntry, RowSumMismatch, ColSumMismatch
    """
    if isinstance(raw, DoublyStochasticMatrix):
        return raw
    m = np.array(raw, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NotSquare(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    bad = np.argwhere(m < -TOL_NEG)
    if bad.size:
        r, c = (int(v) for v in bad[0])
        raise NegativeEntry(r, c, float(m[r, c]))
    m = np.where(m < 0.0, 0.0, m)
    rows = m.sum(axis=1) - 1.0
    bad = np.flatnonzero(np.abs(rows) > TOL_SUM)
    if bad.size:
        raise RowSumMismatch(int(bad[0]), float(rows[bad[0]]))
    cols = m.sum(axis=0) - 1.0
    bad = np.flatnonzero(np.abs(cols) > TOL_SUM)
    if bad.size:
        raise ColSumMismatch(int(bad[0]), float(cols[bad[0]]))
    return DoublyStochasticMatrix(m)


def uniform_vector(d: int) -> ProbabilityVector:
    if d < 1:
        raise ValidationError("dimension must be at least 1")
    return ProbabilityVector(np.full(d, 1.0 / d))


def uniform_matrix(d: int) -> DoublyStochasticMatrix:
    if d < 1:
        raise ValidationError("dimension must be at least 1")
    return DoublyStochasticMatrix(np.full((d, d), 1.0 / d))


def identity_matrix(d: int) -> PermutationMatrix:
    return PermutationMatrix(Permutation.identity(d))


def propagate(x, D) -> ProbabilityVector:
    """One chain step ``x @ D``."""
    x = validate_probability_vector(x)
    D = validate_doubly_stochastic(D)
    if x.d != D.d:
        raise DimensionMismatch(f"vector has d={x.d} but matrix has d={D.d}")
    return validate_probability_vector(x.data @ D.data)


def shannon_entropy(x) -> float:
    """Shannon entropy in nats, with ``0 log 0 = 0``."""
    p = np.asarray(validate_probability_vector(x))
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p))) + 0.0  # no -0.0


def kl_to_uniform(x) -> float:
    """Relative entropy ``S(x || u) = log d - E(x)`` in nats."""
    x = validate_probability_vector(x)
    return max(math.log(x.d) - shannon_entropy(x), 0.0)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending modulus.

    ``e_max`` is the largest modulus once a single unit eigenvalue has been
    removed; it is 0 for ``d == 1``.
    """

    eigenvalues: np.ndarray
    e_max: float


def spectral_analysis(D) -> Spectrum:
    D = validate_doubly_stochastic(D)
    try:
        ev = np.linalg.eigvals(D.data)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    order = np.lexsort((-ev.imag, -ev.real, -np.round(np.abs(ev), 12)))
    ev = ev[order]
    unit = int(np.argmin(np.abs(ev - 1.0)))
    if abs(ev[unit] - 1.0) > 1e-9:
        raise EigenSolverFailure(f"no unit eigenvalue found (closest {ev[unit]!r})")
    if np.any(np.abs(ev) > 1.0 + 1e-9):
        raise EigenSolverFailure("eigenvalue modulus exceeds 1")
    rest = np.delete(ev, unit)
    e_max = float(np.max(np.abs(rest))) if rest.size else 0.0
    ev.setflags(write=False)
    return Spectrum(ev, e_max)


def random_permutation(d: int, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(rng.permutation(d).tolist()))


def random_doubly_stochastic(d: int, rng: np.random.Generator, k: int | None = None) -> DoublyStochasticMatrix:
    """Convex mixture of ``k`` (default ``d**2``) random permutation matrices
    with weights drawn uniformly from the simplex."""
    k = d * d if k is None else k
    weights = rng.dirichlet(np.ones(k))
    m = np.zeros((d, d))
    rows = np.arange(d)
    for w in weights:
        m[rows, rng.permutation(d)] += w
    return validate_doubly_stochastic(m)


def random_probability_vector(d: int, rng: np.random.Generator) -> ProbabilityVector:
    x = rng.dirichlet(np.ones(d))
    return validate_probability_vector(x / x.sum())


def majorizes(x, y, slack: float = TOL_SUM) -> bool:
    """True when every descending partial sum of ``x`` dominates that of ``y``."""
    xs = np.cumsum(np.sort(np.asarray(x, dtype=float))[::-1])
    ys = np.cumsum(np.sort(np.asarray(y, dtype=float))[::-1])
    if xs.shape != ys.shape:
        raise DimensionMismatch("vectors differ in dimension")
    return bool(np.all(ys <= xs + slack))
