"""Qudit density matrices under unitary evolution and non-selective
measurements.

Conventions: a unitary ``V`` acts on states as ``rho -> V^dagger rho V`` and
the measurement in frame ``W`` uses the rank-one projectors
``W |f><f| W^dagger``.  With these, one evolve-then-measure step moves the
measured populations by the doubly stochastic kernel
``|W_prev^dagger V W_next|**2`` (entrywise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenSolverFailure,
    NonDiagonalInput,
    NotHermitian,
    NotPositive,
    NotSquare,
    NotUnitary,
    RegimeViolation,
    TraceMismatch,
    ValidationError,
)
from .markov import ChainSchedule, schedule_path_entropy
from .stochastic import (
    DoublyStochasticMatrix,
    ProbabilityVector,
    validate_doubly_stochastic,
    validate_probability_vector,
)

TOL_HERMITIAN = 1e-10
TOL_TRACE = 1e-9
TOL_PSD = 1e-9
TOL_UNITARY = 1e-9
ZENO_REGIME_LIMIT = 0.1


class _ComplexMatrix:
    __slots__ = ("_data",)

    def __init__(self, data):
        a = np.array(data, dtype=complex, copy=True)
        a.setflags(write=False)
        self._data = a

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

    def __repr__(self):
        return f"{type(self).__name__}({self._data.tolist()!r})"


class DensityMatrix(_ComplexMatrix):
    __slots__ = ()


class UnitaryMatrix(_ComplexMatrix):
    __slots__ = ()

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self._data.conj().T)


class HermitianHamiltonian(_ComplexMatrix):
    __slots__ = ()


def _square(raw) -> np.ndarray:
    m = np.array(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise NotSquare(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def validate_density_matrix(raw) -> DensityMatrix:
    if isinstance(raw, DensityMatrix):
        return raw
    m = _square(raw)
    if np.max(np.abs(m - m.conj().T)) > TOL_HERMITIAN:
        raise NotHermitian("density matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TOL_TRACE:
        raise TraceMismatch(f"trace is {tr!r}, expected 1")
    lo = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
    if lo < -TOL_PSD:
        raise NotPositive(f"minimum eigenvalue {lo!r} is negative")
    return DensityMatrix(m)


def validate_unitary(raw) -> UnitaryMatrix:
    if isinstance(raw, UnitaryMatrix):
        return raw
    m = _square(raw)
    err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    if err > TOL_UNITARY:
        raise NotUnitary(f"U^dagger U deviates from identity by {err:.3e}")
    return UnitaryMatrix(m)


def validate_hamiltonian(raw) -> HermitianHamiltonian:
    if isinstance(raw, HermitianHamiltonian):
        return raw
    m = _square(raw)
    if np.max(np.abs(m - m.conj().T)) > TOL_HERMITIAN:
        raise NotHermitian("Hamiltonian is not Hermitian")
    return HermitianHamiltonian(m)


def _match(*mats):
    dims = {m.d for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions disagree: {sorted(dims)}")


def identity_unitary(d: int) -> UnitaryMatrix:
    return UnitaryMatrix(np.eye(d))


def fourier_matrix(d: int) -> UnitaryMatrix:
    """``F[f, g] = exp(2 pi i f g / d) / sqrt(d)``."""
    if d < 1:
        raise ValidationError("dimension must be at least 1")
    f = np.arange(d)
    return UnitaryMatrix(np.exp(2j * np.pi * np.outer(f, f) / d) / math.sqrt(d))


def position_state(d: int, r: int) -> DensityMatrix:
    """``|r><r|`` in the computational (position) basis."""
    if not 0 <= r < d:
        raise ValidationError(f"r={r} outside 0..{d - 1}")
    m = np.zeros((d, d), dtype=complex)
    m[r, r] = 1.0
    return DensityMatrix(m)


def momentum_state(d: int, r: int) -> DensityMatrix:
    """``F|r><r|F^dagger``: the projector onto the r-th Fourier vector."""
    if not 0 <= r < d:
        raise ValidationError(f"r={r} outside 0..{d - 1}")
    col = fourier_matrix(d).data[:, r]
    return DensityMatrix(np.outer(col, col.conj()))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d)


def diagonal_state(x) -> DensityMatrix:
    x = validate_probability_vector(x)
    return DensityMatrix(np.diag(x.data).astype(complex))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log rho)`` in nats."""
    rho = validate_density_matrix(rho)
    w = np.linalg.eigvalsh(rho.data)
    w = w[w > 1e-15]
    return max(0.0, float(-np.sum(w * np.log(w))))


def random_unitary(d: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-distributed unitary from the QR decomposition of a complex
    Gaussian matrix, with the phases of ``R``'s diagonal folded back in."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return UnitaryMatrix(q * phases)


def evolve_unitary(rho, V) -> DensityMatrix:
    """``V^dagger rho V``."""
    rho = validate_density_matrix(rho)
    V = validate_unitary(V)
    _match(rho, V)
    out = V.data.conj().T @ rho.data @ V.data
    return DensityMatrix((out + out.conj().T) / 2)


def nonselective_measure(rho, frame=None) -> tuple[DensityMatrix, ProbabilityVector]:
    """Measure in the basis given by the columns of ``frame`` and forget
    the outcome.

    Returns the post-measurement state ``sum_f P_f rho P_f`` and the outcome
    probabilities ``x_f = Tr(rho P_f)``, where ``P_f = W|f><f|W^dagger``.
    """
    rho = validate_density_matrix(rho)
    W = identity_unitary(rho.d) if frame is None else validate_unitary(frame)
    _match(rho, W)
    in_frame = W.data.conj().T @ rho.data @ W.data
    x = validate_probability_vector(np.clip(np.diag(in_frame).real, 0.0, None))
    out = (W.data * x.data) @ W.data.conj().T
    return DensityMatrix((out + out.conj().T) / 2), x


def induced_kernel(V, W_prev=None, W_next=None) -> DoublyStochasticMatrix:
    """``|W_prev^dagger V W_next|**2`` entrywise: the population transfer
    between two measurements separated by the evolution ``V``."""
    V = validate_unitary(V)
    W_prev = identity_unitary(V.d) if W_prev is None else validate_unitary(W_prev)
    W_next = identity_unitary(V.d) if W_next is None else validate_unitary(W_next)
    _match(V, W_prev, W_next)
    u = W_prev.data.conj().T @ V.data @ W_next.data
    try:
        return validate_doubly_stochastic(np.abs(u) ** 2)
    except ValidationError as exc:
        raise NotUnitary(f"kernel is not doubly stochastic: {exc}") from exc


def hamiltonian_evolution(h, t: float) -> UnitaryMatrix:
    """``exp(i t h)`` through the eigendecomposition of ``h``."""
    h = validate_hamiltonian(h)
    if t == 0:
        return identity_unitary(h.d)
    try:
        w, q = np.linalg.eigh(h.data)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    return validate_unitary((q * np.exp(1j * t * w)) @ q.conj().T)


@dataclass(frozen=True, eq=False)
class MeasurementChainConfig:
    """``rho -meas-> rho_1 -V12-> ~rho_2 -meas-> rho_2 -V23-> ...``

    ``projector_frames`` may list one frame per evolution (``W_2, W_3, ...``,
    with the first measurement in the position basis) or one more
    (``W_1, W_2, ...``).  ``None`` means every measurement uses the position
    basis.
    """

    initial_rho: DensityMatrix
    evolutions: tuple[UnitaryMatrix, ...] = ()
    projector_frames: tuple[UnitaryMatrix, ...] | None = None

    def __post_init__(self):
        rho = validate_density_matrix(self.initial_rho)
        evolutions = tuple(validate_unitary(v) for v in self.evolutions)
        frames = self.projector_frames
        if frames is not None:
            frames = tuple(validate_unitary(w) for w in frames)
            if len(frames) not in (len(evolutions), len(evolutions) + 1):
                raise ValidationError(
                    f"{len(frames)} frames for {len(evolutions)} evolutions; "
                    "expected one per evolution, optionally plus the initial frame"
                )
        _match(rho, *evolutions, *(frames or ()))
        object.__setattr__(self, "initial_rho", rho)
        object.__setattr__(self, "evolutions", evolutions)
        object.__setattr__(self, "projector_frames", frames)

    @property
    def d(self) -> int:
        return self.initial_rho.d

    def frames(self) -> tuple[UnitaryMatrix, ...]:
        """All measurement frames ``W_1, ..., W_{n+1}``."""
        n = len(self.evolutions)
        eye = identity_unitary(self.d)
        if self.projector_frames is None:
            return (eye,) * (n + 1)
        if len(self.projector_frames) == n:
            return (eye, *self.projector_frames)
        return self.projector_frames


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Stroboscopic record of a measurement chain.

    ``vectors[s - 1]`` and ``rhos[s - 1]`` belong to the s-th measurement;
    ``evolved[s - 2]`` is the state just before it (``s >= 2``).
    ``staircase`` lists ``E(rho), E(rho_1), E(~rho_2), E(rho_2), ...``.
    """

    vectors: tuple[ProbabilityVector, ...]
    rhos: tuple[DensityMatrix, ...]
    evolved: tuple[DensityMatrix, ...]
    kernels: tuple[DoublyStochasticMatrix, ...]
    schedule: ChainSchedule
    staircase: tuple[float, ...]

    @property
    def entropies(self) -> tuple[float, ...]:
        """Entropies of the post-measurement states."""
        return self.staircase[1::2]


def run_measurement_chain(config: MeasurementChainConfig) -> MeasurementRecord:
    frames = config.frames()
    rho, x = nonselective_measure(config.initial_rho, frames[0])
    vectors, rhos, evolved, kernels = [x], [rho], [], []
    staircase = [von_neumann_entropy(config.initial_rho), von_neumann_entropy(rho)]
    for i, V in enumerate(config.evolutions):
        tilde = evolve_unitary(rho, V)
        rho, x = nonselective_measure(tilde, frames[i + 1])
        kernels.append(induced_kernel(V, frames[i], frames[i + 1]))
        evolved.append(tilde)
        rhos.append(rho)
        vectors.append(x)
        staircase += [von_neumann_entropy(tilde), von_neumann_entropy(rho)]
    schedule = ChainSchedule(vectors[0], tuple(kernels))
    return MeasurementRecord(
        tuple(vectors), tuple(rhos), tuple(evolved), tuple(kernels), schedule, tuple(staircase)
    )


@dataclass(frozen=True)
class GapReport:
    """Transfer from time 1 to 3 with (``D_with_meas``) and without
    (``D_without``) the intermediate measurement."""

    D_with_meas: DoublyStochasticMatrix
    D_without: DoublyStochasticMatrix
    max_gap: float
    x_with_meas: ProbabilityVector
    x_without: ProbabilityVector


def markov_vs_quantum_gap(rho1, V12, V23) -> GapReport:
    """Compare the measured two-step kernel ``|V12|**2 @ |V23|**2`` with the
    unmeasured ``|V12 V23|**2``; the difference is the interference the
    skipped measurement would have destroyed."""
    rho1 = validate_density_matrix(rho1)
    V12 = validate_unitary(V12)
    V23 = validate_unitary(V23)
    _match(rho1, V12, V23)
    off = rho1.data - np.diag(np.diag(rho1.data))
    if np.max(np.abs(off), initial=0.0) > 1e-12:
        raise NonDiagonalInput("rho1 must be diagonal in the measurement basis")
    with_meas = validate_doubly_stochastic((np.abs(V12.data) ** 2) @ (np.abs(V23.data) ** 2))
    without = validate_doubly_stochastic(np.abs(V12.data @ V23.data) ** 2)
    x1 = validate_probability_vector(np.diag(rho1.data).real)
    return GapReport(
        with_meas,
        without,
        float(np.max(np.abs(with_meas.data - without.data))),
        validate_probability_vector(x1.data @ with_meas.data),
        validate_probability_vector(x1.data @ without.data),
    )


@dataclass(frozen=True)
class ZenoReport:
    """Rapid-measurement diagnostics for ``s = 1..s_max`` steps.

    ``drift[s-1] = max|x(s+1) - x(1)|``; ``frozen_path_probs[a]`` is the
    probability of the constant path ``(a, ..., a)`` over ``s_max`` steps;
    ``frozen_mass[s-1]`` sums those over ``a`` after ``s`` steps;
    ``path_entropies[s-1]`` is the exact path entropy over ``s + 1`` times.
    ``linear_prediction[s-1]`` is the first-order estimate
    ``x(1) (1 + s E)`` with ``D = 1 + E``.
    """

    kernel: DoublyStochasticMatrix
    epsilon: np.ndarray
    epsilon_max: float
    drift: tuple[float, ...]
    frozen_path_probs: tuple[float, ...]
    frozen_mass: tuple[float, ...]
    path_entropies: tuple[float, ...]
    linear_prediction: tuple[np.ndarray, ...]


def zeno_epsilon(D) -> np.ndarray:
    """Off-diagonal transfer probabilities and diagonal deficits
    ``1 - D(a, a)`` of a near-identity kernel."""
    D = validate_doubly_stochastic(D)
    eps = np.array(D.data)
    np.fill_diagonal(eps, 1.0 - np.diag(D.data))
    return eps


def zeno_report(h, t_step: float, s_max: int, x1) -> ZenoReport:
    """Repeated measurements spaced ``t_step`` apart under ``exp(i t h)``.

    Raises:
        RegimeViolation: ``s_max * epsilon_max > 0.1``, outside the regime
            where the chain is close to frozen.
    """
    if s_max < 1:
        raise ValidationError("s_max must be at least 1")
    x1 = validate_probability_vector(x1)
    D = induced_kernel(hamiltonian_evolution(h, t_step))
    if D.d != x1.d:
        raise DimensionMismatch(f"Hamiltonian has d={D.d}, vector has d={x1.d}")
    eps = zeno_epsilon(D)
    eps_max = float(eps.max())
    if s_max * eps_max > ZENO_REGIME_LIMIT:
        raise RegimeViolation(
            f"s_max * epsilon_max = {s_max * eps_max:.3g} exceeds {ZENO_REGIME_LIMIT}"
        )
    schedule = ChainSchedule.homogeneous(x1, D, s_max)
    states = schedule.states
    diag = np.diag(D.data)
    generator = D.data - np.eye(D.d)
    drift = tuple(float(np.max(np.abs(states[s].data - x1.data))) for s in range(1, s_max + 1))
    frozen_mass = tuple(float(x1.data @ diag**s) for s in range(1, s_max + 1))
    entropies = tuple(schedule_path_entropy(schedule, s + 1) for s in range(1, s_max + 1))
    linear = tuple(x1.data + s * (x1.data @ generator) for s in range(1, s_max + 1))
    eps.setflags(write=False)
    return ZenoReport(
        D,
        eps,
        eps_max,
        drift,
        tuple((x1.data * diag**s_max).tolist()),
        frozen_mass,
        entropies,
        linear,
    )


def evolutions_from_hamiltonian(h, t: float, n_steps: int) -> tuple[UnitaryMatrix, ...]:
    """The homogeneous evolution list ``V_12 = V_23 = ... = exp(i t h)``."""
    return (hamiltonian_evolution(h, t),) * n_steps


def measurement_chain(
    initial_rho,
    evolutions: Sequence,
    projector_frames: Sequence | None = None,
) -> MeasurementRecord:
    """Shorthand for building a config and running it."""
    frames = None if projector_frames is None else tuple(projector_frames)
    return run_measurement_chain(MeasurementChainConfig(initial_rho, tuple(evolutions), frames))
