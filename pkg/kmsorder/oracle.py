# Copyright (c) 2026 The kmsorder authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Exact reference for the perturbative engine: a detector coupled to finitely many bosonic modes on truncated Fock spaces.

A leg with observable μ = Σ_e e·P_e couples as λχ(τ)·μ⊗φ(τ). Its propagator factors exactly as
U = Σ_e P_e ⊗ (⊗_k V_k(e)), where V_k(e) is the time-ordered exponential of λeχ(τ)g_k(a e^{−iω_kτ} + a† e^{iω_kτ}) on
mode k alone, since different modes commute at all times. Only these single-mode propagators are time-stepped; the
joint state lives on the full 2·(n_max+1)^K space.
"""

from concurrent.futures import ThreadPoolExecutor
import logging
import math
import time
from typing import (
    List,
    NamedTuple,
    Sequence,
    Tuple,
    Union,
)

import click
import numpy as np
from scipy.stats import linregress

from .algebra import (
    DensityMatrix,
    hermitian_eigh,
    trace_norm,
)
from .correlations import (
    DiscreteModeSet,
    SpectralModel,
)
from .errors import (
    ConvergenceError,
    InsufficientPointsError,
    InvalidInputError,
    TruncationLeakageError,
)
from .perturbative import (
    Ordering,
    delta_rho_frequency,
)
from .switching import (
    Leg,
    Protocol,
    evaluate,
)
from .types import ComplexMatrix2

__all__ = (
    'EvolutionSpec',
    'TruncatedField',
    'evolve_protocol',
    'field_leakage',
    'ordering_asymmetry_exact',
    'perturbative_delta',
    'scaling_fit',
    'thermal_field_state',
)

log = logging.getLogger(__name__)

MIN_SCALING_POINTS = 3
MIN_SCALING_DECADES = 1.5
MIN_R_SQUARED = 0.99


class TruncatedField:
    __slots__ = ('modes', 'n_max')

    def __init__(self, modes: DiscreteModeSet, n_max: int):
        if n_max < 1:
            raise InvalidInputError(f"Fock truncation must keep at least one excitation, got n_max={n_max}")
        self.modes = modes
        self.n_max = int(n_max)

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def field_dimension(self) -> int:
        return self.levels ** len(self.modes)

    @property
    def dimension(self) -> int:
        return 2 * self.field_dimension

    def annihilation(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.levels, dtype=float)), k=1).astype(complex)

    def field_operator(self, t: float = 0.0) -> np.ndarray:
        """φ(t) = Σ_k g_k(a_k e^{−iω_k t} + a_k† e^{iω_k t}) on the truncated field space."""
        a = self.annihilation()
        eye = np.eye(self.levels)
        total = np.zeros((self.field_dimension, self.field_dimension), dtype=complex)
        for k, (omega, g) in enumerate(self.modes):
            local = g * (a * np.exp(-1j * omega * t) + a.conj().T * np.exp(1j * omega * t))
            factors = [eye] * len(self.modes)
            factors[k] = local
            total += _kron(factors)
        return total

    def with_n_max(self, n_max: int) -> "TruncatedField":
        return TruncatedField(self.modes, n_max)

    def __repr__(self):
        return f"TruncatedField({self.modes!r}, n_max={self.n_max})"


def _kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for factor in factors:
        out = np.kron(out, factor)
    return out


class EvolutionSpec(NamedTuple):
    step: float = 0.005
    order: int = 4
    couplings: Tuple[float, ...] = ()
    leakage_threshold: float = 1e-6
    drift_tolerance: float = 1e-9
    step_tolerance: float = 1e-8

    def validate(self) -> "EvolutionSpec":
        if not self.step > 0:
            raise InvalidInputError(f"time step must be positive, got {self.step!r}")
        if self.order != 4:
            raise InvalidInputError(f"only the classical fourth-order integrator is available, got order {self.order}")
        grid = np.asarray(self.couplings, dtype=float)
        if np.any(grid <= 0):
            raise InvalidInputError(f"coupling grid must be strictly positive, got {grid.tolist()}")
        if len(grid) > 2:
            ratios = grid[1:] / grid[:-1]
            if np.any(ratios <= 1) or np.ptp(np.log(ratios)) > 1e-9:
                raise InvalidInputError(f"coupling grid must be increasing and geometric, got {grid.tolist()}")
        return self

    @staticmethod
    def geometric(lo: float, hi: float, count: int) -> Tuple[float, ...]:
        return tuple(np.geomspace(lo, hi, count).tolist())


def thermal_weights(field: TruncatedField) -> List[np.ndarray]:
    """Per-mode Boltzmann weights e^{−βωn}, n ≤ n_max, renormalized on the truncated space."""
    n = np.arange(field.levels, dtype=float)
    weights = []
    for omega, _ in field.modes:
        if math.isinf(field.modes.beta):
            p = (n == 0).astype(float)
        else:
            p = np.exp(-field.modes.beta * omega * n)
        weights.append(p / p.sum())
    return weights


def thermal_field_state(field: TruncatedField) -> np.ndarray:
    return np.diag(_kron([np.diag(p) for p in thermal_weights(field)]).diagonal().real).astype(complex)


def field_leakage(field: TruncatedField, joint_state: np.ndarray) -> Tuple[float, ...]:
    """Population of the top Fock level of each mode in a detector⊗field state (or a field-only state)."""
    populations = joint_state.diagonal().real
    shape = (-1,) + (field.levels,) * len(field.modes)
    populations = populations.reshape(shape).sum(axis=0)
    leakage = []
    for k in range(len(field.modes)):
        others = tuple(axis for axis in range(len(field.modes)) if axis != k)
        leakage.append(float(populations.sum(axis=others)[-1]))
    return tuple(leakage)


def _check_leakage(field: TruncatedField, joint_state: np.ndarray, threshold: float) -> Tuple[float, ...]:
    leakage = field_leakage(field, joint_state)
    for k, population in enumerate(leakage):
        if population > threshold:
            raise TruncationLeakageError(k, population, threshold)
    return leakage


def _mode_propagator(
    field: TruncatedField, mode: int, strength: float, leg: Leg, step: float,
) -> np.ndarray:
    """RK4 for dV/dτ = −i·strength·χ(τ)(a e^{−iωτ} + a† e^{iωτ})V across the leg's support."""
    omega, g = field.modes.frequencies[mode], field.modes.weights[mode]
    a = field.annihilation()
    adag = a.conj().T
    chi = leg.switching
    lo, hi = chi.support
    count = max(1, int(math.ceil((hi - lo) / step)))
    h = (hi - lo) / count

    def generator(t: float) -> np.ndarray:
        phase = np.exp(-1j * omega * t)
        return -1j * strength * g * evaluate(chi, t) * (a * phase + adag * phase.conjugate())

    v = np.eye(field.levels, dtype=complex)
    for idx in range(count):
        t = lo + idx * h
        mid = generator(t + h / 2)
        k1 = generator(t) @ v
        k2 = mid @ (v + 0.5 * h * k1)
        k3 = mid @ (v + 0.5 * h * k2)
        k4 = generator(t + h) @ (v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def leg_unitary(field: TruncatedField, leg: Leg, coupling: float, spec: EvolutionSpec) -> Tuple[np.ndarray, float]:
    """Returns the joint propagator of one leg and the largest change observed under step halving."""
    spectrum = hermitian_eigh(leg.observable.matrix)
    identity = np.eye(field.levels, dtype=complex)
    total = np.zeros((field.dimension, field.dimension), dtype=complex)
    step_change = 0.0
    for eigenvalue, projector in zip(spectrum.eigenvalues, spectrum.projectors):
        strength = coupling * eigenvalue
        factors = []
        for k in range(len(field.modes)):
            if strength == 0 or leg.switching.amplitude == 0 or field.modes.weights[k] == 0:
                factors.append(identity)
                continue
            coarse = _mode_propagator(field, k, strength, leg, spec.step)
            fine = _mode_propagator(field, k, strength, leg, spec.step / 2)
            change = float(np.max(np.abs(fine - coarse)))
            if change > spec.step_tolerance:
                raise ConvergenceError(f"mode {k} propagator under step halving", change, spec.step_tolerance)
            step_change = max(step_change, change)
            factors.append(fine)
        total += np.kron(projector, _kron(factors))
    return total, step_change


class EvolutionResult(NamedTuple):
    state: DensityMatrix
    unitarity_drift: float
    step_change: float
    leakage: Tuple[float, ...]


def _unitarity_drift(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(len(u)))))


def _partial_trace_field(field: TruncatedField, joint_state: np.ndarray) -> ComplexMatrix2:
    f = field.field_dimension
    return np.einsum('ikjk->ij', joint_state.reshape(2, f, 2, f))


def _evolve(
    field: TruncatedField, unitaries: Tuple[np.ndarray, np.ndarray], order: Ordering, rho: DensityMatrix, spec: EvolutionSpec,
) -> EvolutionResult:
    first, second = unitaries
    u = second @ first if Ordering(order) == Ordering.first_then_second else first @ second
    drift = _unitarity_drift(u)
    if drift > spec.drift_tolerance:
        raise ConvergenceError("unitarity of the joint propagator", drift, spec.drift_tolerance)
    initial = np.kron(rho.matrix, thermal_field_state(field))
    _check_leakage(field, initial, spec.leakage_threshold)
    joint = u @ initial @ u.conj().T
    leakage = _check_leakage(field, joint, spec.leakage_threshold)
    reduced = _partial_trace_field(field, joint)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return EvolutionResult(DensityMatrix(reduced / np.trace(reduced).real), drift, 0.0, leakage)


def _leg_unitaries(field: TruncatedField, protocol: Protocol, spec: EvolutionSpec) -> Tuple[Tuple[np.ndarray, np.ndarray], float]:
    first, change_first = leg_unitary(field, protocol.first, protocol.coupling, spec)
    second, change_second = leg_unitary(field, protocol.second, protocol.coupling, spec)
    return (first, second), max(change_first, change_second)


def run_protocol(
    field: TruncatedField, protocol: Protocol, order: Ordering, spec: EvolutionSpec, rho: DensityMatrix,
) -> EvolutionResult:
    spec = spec.validate()
    if protocol.coupling == 0:
        return EvolutionResult(rho, 0.0, 0.0, field_leakage(field, thermal_field_state(field)))
    unitaries, change = _leg_unitaries(field, protocol, spec)
    return _evolve(field, unitaries, order, rho, spec)._replace(step_change=change)


def evolve_protocol(
    field: TruncatedField, protocol: Protocol, order: Ordering, spec: EvolutionSpec, rho: DensityMatrix,
) -> DensityMatrix:
    return run_protocol(field, protocol, order, spec, rho).state


def ordering_asymmetry_exact(
    field: TruncatedField, protocol: Protocol, spec: EvolutionSpec, rho: DensityMatrix,
) -> ComplexMatrix2:
    spec = spec.validate()
    if protocol.coupling == 0:
        return np.zeros((2, 2), dtype=complex)
    unitaries, _ = _leg_unitaries(field, protocol, spec)
    forward = _evolve(field, unitaries, Ordering.first_then_second, rho, spec)
    backward = _evolve(field, unitaries, Ordering.second_then_first, rho, spec)
    return forward.state.matrix - backward.state.matrix


def perturbative_delta(field: TruncatedField, protocol: Protocol, rho: DensityMatrix) -> ComplexMatrix2:
    """The engine's Δρ for the identical mode set, exactly quadratic in λ."""
    return delta_rho_frequency(protocol, SpectralModel.discrete(field.modes), rho).delta_rho


class ScalingRow(NamedTuple):
    coupling: float
    exact_norm: float
    perturbative_norm: float
    difference_norm: float


class ScalingFailure(NamedTuple):
    coupling: float
    error: click.ClickException


def scaling_row(field: TruncatedField, protocol: Protocol, spec: EvolutionSpec, rho: DensityMatrix) -> ScalingRow:
    start = time.perf_counter()
    exact = ordering_asymmetry_exact(field, protocol, spec, rho)
    perturbative = perturbative_delta(field, protocol, rho)
    difference = exact - perturbative
    row = ScalingRow(
        protocol.coupling,
        trace_norm(0.5 * (exact + exact.conj().T)),
        trace_norm(0.5 * (perturbative + perturbative.conj().T)),
        trace_norm(0.5 * (difference + difference.conj().T)),
    )
    log.debug("oracle at λ=%g took %.3fs: ‖Δρ_exact − Δρ_pert‖₁ = %.3e", protocol.coupling, time.perf_counter() - start, row.difference_norm)
    return row


def scaling_rows(
    field: TruncatedField, protocol: Protocol, spec: EvolutionSpec, rho: DensityMatrix, *, workers: int = 1,
) -> List[Union[ScalingRow, ScalingFailure]]:
    """One row per coupling in ``spec.couplings``, in grid order; failures are returned in place of their row."""
    spec = spec.validate()

    def run(coupling: float) -> Union[ScalingRow, ScalingFailure]:
        try:
            return scaling_row(field, protocol.with_coupling(coupling), spec, rho)
        except click.ClickException as exc:
            log.error("oracle at λ=%g failed: %s", coupling, exc.format_message())
            return ScalingFailure(coupling, exc)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(run, spec.couplings))


class ScalingFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    rows: Tuple[ScalingRow, ...]


def fit_scaling(rows: Sequence[ScalingRow]) -> ScalingFit:
    """Least-squares line through (log λ, log ‖Δρ_exact − Δρ_pert‖₁)."""
    usable = [row for row in rows if row.difference_norm > 0]
    if len(usable) < MIN_SCALING_POINTS:
        raise InsufficientPointsError(len(usable), MIN_SCALING_POINTS)
    couplings = np.array([row.coupling for row in usable])
    decades = math.log10(couplings.max() / couplings.min())
    if decades < MIN_SCALING_DECADES:
        log.warning("coupling grid spans only %.2f decades; the fitted exponent is poorly constrained", decades)
    fit = linregress(np.log(couplings), np.log([row.difference_norm for row in usable]))
    r_squared = float(fit.rvalue ** 2)
    if r_squared < MIN_R_SQUARED:
        log.warning("remainder is not a clean power law (R² = %.4f); the coupling grid leaves the perturbative regime", r_squared)
    return ScalingFit(float(fit.slope), float(fit.intercept), r_squared, tuple(usable))


def scaling_fit(
    field: TruncatedField, protocol: Protocol, spec: EvolutionSpec, rho: DensityMatrix, *, workers: int = 1,
) -> ScalingFit:
    if len(spec.couplings) < MIN_SCALING_POINTS:
        raise InsufficientPointsError(len(spec.couplings), MIN_SCALING_POINTS)
    rows = scaling_rows(field, protocol, spec, rho, workers=workers)
    failures = [row for row in rows if isinstance(row, ScalingFailure)]
    if failures:
        raise failures[0].error
    return fit_scaling(rows)

