"""Time-dependent Markov chains with doubly stochastic kernels.

Times are 1-based as in the usual notation ``x(1), x(2), ...``; the step
``steps[k - 1]`` carries the chain from time ``k`` to time ``k + 1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    ExplosionGuard,
    IndexOutOfRange,
    MonteCarloUnsupported,
    NotMixing,
    ValidationError,
)
from .stochastic import (
    DoublyStochasticMatrix,
    ProbabilityVector,
    identity_matrix,
    shannon_entropy,
    kl_to_uniform,
    spectral_analysis,
    validate_doubly_stochastic,
    validate_probability_vector,
)

MAX_EXACT_PATHS = 10**7


@dataclass(frozen=True, eq=False)
class ChainSchedule:
    """Initial state ``x(1)`` plus the ordered kernels ``D_{12}, D_{23}, ...``."""

    initial: ProbabilityVector
    steps: tuple[DoublyStochasticMatrix, ...] = ()

    def __post_init__(self):
        initial = validate_probability_vector(self.initial)
        steps = tuple(validate_doubly_stochastic(m) for m in self.steps)
        for i, m in enumerate(steps):
            if m.d != initial.d:
                raise DimensionMismatch(f"step {i + 1} has d={m.d}, initial state has d={initial.d}")
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def homogeneous(cls, initial, D, n_steps: int) -> "ChainSchedule":
        D = validate_doubly_stochastic(D)
        return cls(initial, (D,) * n_steps)

    @property
    def d(self) -> int:
        return self.initial.d

    @property
    def horizon(self) -> int:
        """Number of times covered, ``len(steps) + 1``."""
        return len(self.steps) + 1

    @property
    def homogeneous_flag(self) -> bool:
        if not self.steps:
            return True
        first = self.steps[0].data
        return all(np.array_equal(first, m.data) for m in self.steps[1:])

    @cached_property
    def states(self) -> tuple[ProbabilityVector, ...]:
        out = [self.initial]
        x = self.initial.data
        for m in self.steps:
            x = x @ m.data
            out.append(validate_probability_vector(x))
        return tuple(out)


def _check_time(schedule: ChainSchedule, t: int, name: str):
    if not 1 <= t <= schedule.horizon:
        raise IndexOutOfRange(f"{name}={t} outside 1..{schedule.horizon}")


def composite_kernel(schedule: ChainSchedule, k: int, l: int) -> DoublyStochasticMatrix:
    """``D_{kl} = D_{k,k+1} D_{k+1,k+2} ... D_{l-1,l}`` for ``k < l``."""
    _check_time(schedule, k, "k")
    _check_time(schedule, l, "l")
    if k >= l:
        raise IndexOutOfRange(f"need k < l, got k={k}, l={l}")
    out = schedule.steps[k - 1].data
    for m in schedule.steps[k:l - 1]:
        out = out @ m.data
    return validate_doubly_stochastic(out)


def state_at(schedule: ChainSchedule, s: int) -> ProbabilityVector:
    _check_time(schedule, s, "s")
    return schedule.states[s - 1]


@dataclass(frozen=True)
class EntropyTrace:
    """Entropies and distances to uniform of ``x(1), ..., x(horizon)``."""

    entropies: tuple[float, ...]
    kl: tuple[float, ...]

    def production(self, s: int, t: int) -> float:
        """Entropy produced between times ``s <= t``."""
        if not 1 <= s <= t <= len(self.entropies):
            raise IndexOutOfRange(f"need 1 <= s <= t <= {len(self.entropies)}")
        return self.entropies[t - 1] - self.entropies[s - 1]

    def productions(self) -> tuple[float, ...]:
        """Per-step productions ``E(s+1) - E(s)``."""
        e = self.entropies
        return tuple(e[i + 1] - e[i] for i in range(len(e) - 1))


def entropy_trace(schedule: ChainSchedule) -> EntropyTrace:
    states = schedule.states
    return EntropyTrace(
        tuple(shannon_entropy(x) for x in states),
        tuple(kl_to_uniform(x) for x in states),
    )


@dataclass(frozen=True, eq=False)
class PathDistribution:
    """Distribution over discrete paths ``(a_1, ..., a_s)``.

    In exact mode ``probabilities`` is a tensor of shape ``(d,) * s``.  In
    Monte Carlo mode ``samples`` is an ``(n, s)`` integer array and
    probabilities are empirical frequencies.
    """

    horizon: int
    d: int
    probabilities: np.ndarray | None = None
    samples: np.ndarray | None = None
    seed: int | None = field(default=None)

    @property
    def mode(self) -> str:
        return "exact" if self.probabilities is not None else "monte_carlo"

    @property
    def is_exact(self) -> bool:
        return self.probabilities is not None

    def probability(self, path: Sequence[int]) -> float:
        path = tuple(int(a) for a in path)
        if len(path) != self.horizon:
            raise DimensionMismatch(f"path has length {len(path)}, horizon is {self.horizon}")
        if self.is_exact:
            return float(self.probabilities[path])
        hits = np.all(self.samples == np.asarray(path), axis=1)
        return float(hits.mean())

    def subset_probability(self, paths: Iterable[Sequence[int]]) -> float:
        """``q(A)`` for a set ``A`` of paths (duplicates counted once)."""
        unique = {tuple(int(a) for a in p) for p in paths}
        return math.fsum(self.probability(p) for p in unique)

    def marginal(self, times: Sequence[int]) -> np.ndarray:
        """Joint distribution of the states at the given 1-based times."""
        times = list(times)
        if len(set(times)) != len(times) or not all(1 <= t <= self.horizon for t in times):
            raise IndexOutOfRange(f"times must be distinct and within 1..{self.horizon}")
        if self.is_exact:
            return np.einsum(self.probabilities, list(range(self.horizon)), [t - 1 for t in times])
        cols = self.samples[:, [t - 1 for t in times]]
        m = np.zeros((self.d,) * len(times))
        np.add.at(m, tuple(cols.T), 1.0)
        return m / self.samples.shape[0]

    def items(self) -> Iterator[tuple[tuple[int, ...], float]]:
        """``(path, q)`` pairs in lexicographic path order.

        Exact mode yields every path (including zero-probability ones);
        Monte Carlo mode yields only observed paths.
        """
        if self.is_exact:
            flat = self.probabilities.reshape(-1)
            for i, path in enumerate(itertools.product(range(self.d), repeat=self.horizon)):
                yield path, float(flat[i])
        else:
            paths, counts = np.unique(self.samples, axis=0, return_counts=True)
            n = self.samples.shape[0]
            for p, c in zip(paths, counts):
                yield tuple(int(a) for a in p), float(c / n)


def _horizon(schedule: ChainSchedule, horizon: int | None) -> int:
    if horizon is None:
        return schedule.horizon
    _check_time(schedule, horizon, "horizon")
    return horizon


def path_distribution(
    schedule: ChainSchedule,
    mode: str = "exact",
    n_samples: int | None = None,
    seed: int | None = None,
    horizon: int | None = None,
) -> PathDistribution:
    """Path probabilities ``q(a_1..a_s) = x(1)[a_1] D_12[a_1,a_2] ...``.

    ``mode="exact"`` enumerates all ``d**s`` paths and refuses beyond
    ``10**7`` of them; ``mode="monte_carlo"`` draws ``n_samples`` paths by
    ancestral sampling from ``np.random.default_rng(seed)``.
    """
    s = _horizon(schedule, horizon)
    d = schedule.d
    if mode == "exact":
        if d**s > MAX_EXACT_PATHS:
            raise ExplosionGuard(f"{d}**{s} paths exceed the exact-mode cap of {MAX_EXACT_PATHS}")
        q = np.array(schedule.initial.data)
        for m in schedule.steps[: s - 1]:
            q = q[..., :, None] * m.data
        q.setflags(write=False)
        return PathDistribution(s, d, probabilities=q)
    if mode == "monte_carlo":
        if n_samples is None or n_samples < 1:
            raise ValidationError("monte_carlo mode needs n_samples >= 1")
        rng = np.random.default_rng(seed)
        out = np.empty((n_samples, s), dtype=np.int64)
        out[:, 0] = _draw(rng, np.broadcast_to(np.cumsum(schedule.initial.data), (n_samples, d)))
        for t, m in enumerate(schedule.steps[: s - 1], start=1):
            cdf = np.cumsum(m.data, axis=1)
            out[:, t] = _draw(rng, cdf[out[:, t - 1]])
        out.setflags(write=False)
        return PathDistribution(s, d, samples=out, seed=seed)
    raise ValidationError(f"unknown mode {mode!r}")


def _draw(rng: np.random.Generator, cdf: np.ndarray) -> np.ndarray:
    u = rng.random(cdf.shape[0]) * cdf[:, -1]
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, cdf.shape[1] - 1)


def _xlogx_sum(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p))) + 0.0  # no -0.0


def path_entropy(dist: PathDistribution) -> float:
    """``-(1/s) sum q log q`` over all paths of an exact distribution."""
    if not dist.is_exact:
        raise MonteCarloUnsupported("plug-in entropy from samples is biased; use exact mode")
    return _xlogx_sum(dist.probabilities.reshape(-1)) / dist.horizon


def schedule_path_entropy(schedule: ChainSchedule, horizon: int | None = None) -> float:
    """Exact path entropy without enumerating paths.

    Uses the chain rule for Markov processes: the joint entropy is the
    entropy of ``x(1)`` plus, for each step, the row entropies of the kernel
    averaged over the current state.  Cost is linear in the horizon.
    """
    s = _horizon(schedule, horizon)
    total = shannon_entropy(schedule.initial)
    for t, m in enumerate(schedule.steps[: s - 1]):
        row_h = np.array([_xlogx_sum(row) for row in m.data])
        total += float(schedule.states[t].data @ row_h)
    return total / s


@dataclass(frozen=True)
class ErgodicityReport:
    """``max_deviation[n - 1] = max |D_{1n} - 1/d|`` for ``n = 1..horizon``
    (``D_{11}`` is the identity)."""

    ergodic_at: int | None
    max_deviation: tuple[float, ...]
    epsilon: float


def ergodicity_report(schedule: ChainSchedule, epsilon: float) -> ErgodicityReport:
    """Smallest ``n0`` such that ``D_{1n}`` is within ``epsilon`` of the
    uniform matrix for every computed ``n >= n0``; None if the last kernel
    is still too far.  Nothing is claimed beyond the schedule."""
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    d = schedule.d
    kernel = identity_matrix(d).data
    devs = [float(np.max(np.abs(kernel - 1.0 / d)))]
    for m in schedule.steps:
        kernel = kernel @ m.data
        devs.append(float(np.max(np.abs(kernel - 1.0 / d))))
    ergodic_at = None
    for n in range(len(devs), 0, -1):
        if devs[n - 1] < epsilon:
            ergodic_at = n
        else:
            break
    return ErgodicityReport(ergodic_at, tuple(devs), epsilon)


def mixing_time_estimate(D) -> float:
    """Time scale ``1 / (-log e_max)`` after which ``D**s`` is near uniform.

    Returns 0 when ``e_max`` is zero up to round-off (the uniform matrix
    mixes in one step).
    """
    e_max = spectral_analysis(D).e_max
    if e_max >= 1.0 - 1e-12:
        raise NotMixing(f"second-largest eigenvalue modulus is {e_max!r}")
    if e_max <= 1e-12:
        return 0.0
    return 1.0 / (-math.log(e_max))
