"""Worked examples: fixed inputs and ready-made runs of the special cases.

The constants are the published example data (a three-state chain step, a
four-state orbit and a qutrit Hamiltonian); the functions wire them into
the library so demos, tests and the command line share one definition.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .markov import ChainSchedule
from .quantum import (
    MeasurementRecord,
    ZenoReport,
    diagonal_state,
    evolutions_from_hamiltonian,
    induced_kernel,
    hamiltonian_evolution,
    maximally_mixed,
    measurement_chain,
    momentum_state,
    position_state,
    validate_hamiltonian,
    zeno_report,
)
from .stochastic import DoublyStochasticMatrix, validate_doubly_stochastic, validate_probability_vector

WORKED_VECTOR = validate_probability_vector([0.2, 0.3, 0.5])
WORKED_KERNEL = validate_doubly_stochastic([[0.1, 0.3, 0.6], [0.4, 0.2, 0.4], [0.5, 0.5, 0.0]])
WORKED_VECTOR_D4 = validate_probability_vector([0.1, 0.2, 0.3, 0.4])
UNREACHABLE_VECTOR = validate_probability_vector([0.4, 0.5, 0.1])

ERGODIC_HAMILTONIAN = validate_hamiltonian(
    np.array([[1, 2, -1j], [2, 2, 1j], [1j, -1j, 1]], dtype=complex)
)
# rounded to three decimals as published
ERGODIC_KERNEL_PUBLISHED = np.array(
    [[0.232, 0.223, 0.545], [0.223, 0.551, 0.226], [0.545, 0.226, 0.229]]
)
ERGODIC_EIGENVALUES_PUBLISHED = (1.0, 0.325, -0.315)


def worked_chain() -> ChainSchedule:
    """``x(1) = (0.2, 0.3, 0.5)`` followed by one step of the worked kernel."""
    return ChainSchedule(WORKED_VECTOR, (WORKED_KERNEL,))


def position_state_run(d: int, r: int, evolutions: Sequence) -> MeasurementRecord:
    return measurement_chain(position_state(d, r), evolutions)


def momentum_state_run(d: int, r: int, evolutions: Sequence) -> MeasurementRecord:
    return measurement_chain(momentum_state(d, r), evolutions)


def maximally_mixed_run(d: int, evolutions: Sequence) -> MeasurementRecord:
    return measurement_chain(maximally_mixed(d), evolutions)


def ergodic_kernel(t: float = 1.0, h=ERGODIC_HAMILTONIAN) -> DoublyStochasticMatrix:
    return induced_kernel(hamiltonian_evolution(h, t))


def ergodic_run(x1=WORKED_VECTOR, n_steps: int = 8, t: float = 1.0, h=ERGODIC_HAMILTONIAN) -> MeasurementRecord:
    """Homogeneous chain ``V = exp(i t h)`` with the first measurement
    producing ``x1`` (prepared as a diagonal state)."""
    return measurement_chain(diagonal_state(x1), evolutions_from_hamiltonian(h, t, n_steps))


def zeno_run(x1=WORKED_VECTOR, t_step: float = 1e-3, s_max: int = 100, h=ERGODIC_HAMILTONIAN) -> ZenoReport:
    return zeno_report(h, t_step, s_max, x1)
