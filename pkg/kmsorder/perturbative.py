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
Second-order (in λ) reduced detector states for both orderings of a two-leg protocol and their difference.

With Φ_j = ∫χ_j(τ)φ(τ)dτ and X_ij = ⟨Φ_iΦ_j⟩ = ∫∫χ_i(τ)χ_j(τ′)W(τ − τ′), the difference of the orderings is

    Δρ = ρ(first→second) − ρ(second→first) = λ²[½c·[μ₁, μ₂] + ½c_Δ·{μ₁, μ₂}, ρ]

where c = X₁₂ + X₂₁ is the Hadamard double integral and c_Δ = X₁₂ − X₂₁ = i·d is purely imaginary. For σ_x, σ_y the
anticommutator vanishes and Δρ = iλ²c·[σ_z, ρ].

Three evaluations are offered. The time-domain one reduces each double integral to a lag integral against the
switching cross-correlation. The frequency-domain one integrates the spectra against the switching transforms. The
Dyson one builds both second-order states in full and extracts (c, d) from their difference.
"""

from enum import Enum
from functools import lru_cache
import itertools
import logging
import math
from typing import (
    Callable,
    NamedTuple,
    Optional,
    Tuple,
)

import numpy as np

from .algebra import (
    DensityMatrix,
    anticommutator,
    commutator,
    hermitian_eigh,
)
from .correlations import (
    SpectralModel,
    hadamard_spectrum,
    hadamard_time_quadrature,
    mode_weights,
    spectral_function,
    spectral_sine_quadrature,
    wightman_time,
)
from .quadrature import (
    Quadrature,
    integrate,
    integrate_panels,
)
from .switching import (
    Protocol,
    SwitchingFunction,
    cross_correlation,
    fourier,
    lag_support,
)
from .types import ComplexMatrix2

__all__ = (
    'AsymmetryResult',
    'Method',
    'Ordering',
    'asymmetry_three_way',
    'delta_rho_commutator_time',
    'delta_rho_frequency',
    'second_order_state',
    'vacuum_limit_coefficient',
    'wightman_time',
)

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
AGREEMENT_TOLERANCE = 1e-6


class Method(str, Enum):
    dyson            = 'dyson'
    time_domain      = 'time_domain'
    frequency_domain = 'frequency_domain'


class Ordering(str, Enum):
    first_then_second = 'first_then_second'
    second_then_first = 'second_then_first'


class AsymmetryResult(NamedTuple):
    """
    ``coefficient`` is c, ``anticommutator_coefficient`` is d with c_Δ = i·d. ``delta_rho`` already carries λ².
    """
    coefficient: float
    anticommutator_coefficient: float
    delta_rho: ComplexMatrix2
    method: Method
    quadrature_error: float


def _structure(protocol: Protocol, rho: DensityMatrix) -> Tuple[ComplexMatrix2, ComplexMatrix2]:
    """Returns (½[[μ₁, μ₂], ρ], ½[{μ₁, μ₂}, ρ])."""
    mu1, mu2 = protocol.first.observable.matrix, protocol.second.observable.matrix
    return (0.5 * commutator(commutator(mu1, mu2), rho.matrix),
            0.5 * commutator(anticommutator(mu1, mu2), rho.matrix))


def asymmetry_matrix(protocol: Protocol, rho: DensityMatrix, c: float, d: float) -> ComplexMatrix2:
    hadamard_part, spectral_part = _structure(protocol, rho)
    return protocol.coupling ** 2 * (c * hadamard_part + 1j * d * spectral_part)


def _switchings(protocol: Protocol) -> Tuple[SwitchingFunction, SwitchingFunction]:
    return protocol.first.switching, protocol.second.switching


def _lag_integral(
    kernel: Callable[[float], float], a: SwitchingFunction, b: SwitchingFunction, tolerance: float, what: str,
) -> Quadrature:
    """∫dt kernel(t)·R_ab(t) over the lag support, outer tolerance a third of the budget."""
    if a.amplitude == 0 or b.amplitude == 0:
        return Quadrature(0.0, 0.0)
    lo, hi = lag_support(a, b)

    def integrand(t: float) -> float:
        return kernel(t) * cross_correlation(a, b, t)

    return integrate(integrand, lo, hi, epsabs=tolerance / 3, epsrel=tolerance / 3, what=what)


def _inner_epsabs(tolerance: float) -> float:
    return 2 * tolerance / 3


def delta_rho_commutator_time(
    protocol: Protocol, model: SpectralModel, rho: DensityMatrix, *, tolerance: float = DEFAULT_TOLERANCE,
) -> AsymmetryResult:
    """
    c = ∫dt G¹(t)R₁₂(t) and d = −∫dt S(t)R₁₂(t) where R₁₂(t) = ∫dτ χ₁(τ)χ₂(τ − t) and S(t) = i⟨[φ(t), φ(0)]⟩.
    """
    a, b = _switchings(protocol)
    inner = _inner_epsabs(tolerance)

    def hadamard(t: float) -> float:
        return hadamard_time_quadrature(model, t, epsabs=inner, epsrel=inner).value

    def sine(t: float) -> float:
        return spectral_sine_quadrature(model, t, epsabs=inner, epsrel=inner).value

    c = _lag_integral(hadamard, a, b, tolerance, "time-domain Hadamard double integral")
    d = _lag_integral(sine, a, b, tolerance, "time-domain commutator double integral")
    error = c.error + d.error
    log.debug("time-domain asymmetry: c=%r d=%r (error %.3e)", c.value, -d.value, error)
    return AsymmetryResult(c.value, -d.value, asymmetry_matrix(protocol, rho, c.value, -d.value), Method.time_domain, error)


def _overlap_spectrum(protocol: Protocol, omega: np.ndarray) -> np.ndarray:
    """χ̃₁(−ω)·χ̃₂(ω) = conj χ̃₁(ω)·χ̃₂(ω)."""
    a, b = _switchings(protocol)
    return np.conj(fourier(a, omega)) * fourier(b, omega)


def _frequency_panel(protocol: Protocol, model: SpectralModel) -> float:
    a, b = _switchings(protocol)
    spread = abs(a.center - b.center) + a.half_width + b.half_width
    return min(2 * math.pi / spread, model.uv_cutoff)


def delta_rho_frequency(
    protocol: Protocol, model: SpectralModel, rho: DensityMatrix, *, tolerance: float = DEFAULT_TOLERANCE,
) -> AsymmetryResult:
    """
    c = ∫dω/2π G̃¹(ω)χ̃₁(−ω)χ̃₂(ω) over the whole axis, with the imaginary part checked against the error estimate, and
    d = (1/π)∫₀^Ω Δ̃(ω)·Im[conj χ̃₁(ω)·χ̃₂(ω)]dω.

    Discrete mode sets reduce both integrals to sums over the modes.
    """
    if model.is_discrete:
        weights = mode_weights(model.modes)
        overlap = _overlap_spectrum(protocol, weights.frequencies)
        c = float(np.sum((weights.positive + weights.negative) * 2 * overlap.real))
        d = float(np.sum((weights.positive - weights.negative) * 2 * overlap.imag))
        return AsymmetryResult(c, d, asymmetry_matrix(protocol, rho, c, d), Method.frequency_domain, 0.0)

    panel = _frequency_panel(protocol, model)

    def hadamard_part(fun: Callable[[complex], float]) -> Callable[[float], float]:
        def integrand(omega: float) -> float:
            return float(hadamard_spectrum(model, omega)) * fun(complex(_overlap_spectrum(protocol, np.array([omega]))[0])) / (2 * math.pi)
        return integrand

    def spectral_part(omega: float) -> float:
        return float(spectral_function(model, omega)) * complex(_overlap_spectrum(protocol, np.array([omega]))[0]).imag / math.pi

    kwargs = dict(epsabs=tolerance, epsrel=tolerance)
    c = integrate_panels(hadamard_part(lambda z: z.real), -model.omega_max, model.omega_max, panel,
                         what="frequency-domain Hadamard integral", **kwargs)
    c_imag = integrate_panels(hadamard_part(lambda z: z.imag), -model.omega_max, model.omega_max, panel,
                              what="frequency-domain Hadamard integral (imaginary part)", **kwargs)
    d = integrate_panels(spectral_part, 0.0, model.omega_max, panel, what="frequency-domain spectral integral", **kwargs)
    error = c.error + c_imag.error + d.error
    if abs(c_imag.value) > max(10 * error, tolerance):
        log.warning("frequency-domain asymmetry has an imaginary residue %.3e above its error estimate %.3e", c_imag.value, error)
    return AsymmetryResult(c.value, d.value, asymmetry_matrix(protocol, rho, c.value, d.value), Method.frequency_domain, error)


class LegIntegrals(NamedTuple):
    """
    ``half_self[j]`` = ∫∫_{τ > τ′} χ_j(τ)χ_j(τ′)W(τ − τ′) for leg j, ``cross`` = X₁₂ = ⟨Φ₁Φ₂⟩.
    """
    half_self: Tuple[complex, complex]
    cross: complex
    error: float

    def pair(self, i: int, j: int) -> complex:
        if i == j:
            return 2 * self.half_self[i].real
        return self.cross if (i, j) == (0, 1) else self.cross.conjugate()


def _complex_lag_integral(
    kernel: Callable[[float], complex], a: SwitchingFunction, b: SwitchingFunction, lo: float, hi: float,
    tolerance: float, what: str,
) -> Tuple[complex, float]:
    if a.amplitude == 0 or b.amplitude == 0 or hi <= lo:
        return 0j, 0.0
    cached = lru_cache(maxsize=None)(kernel)
    real = integrate(lambda t: cached(t).real * cross_correlation(a, b, t), lo, hi,
                     epsabs=tolerance / 3, epsrel=tolerance / 3, what=f"{what} (real part)")
    imag = integrate(lambda t: cached(t).imag * cross_correlation(a, b, t), lo, hi,
                     epsabs=tolerance / 3, epsrel=tolerance / 3, what=f"{what} (imaginary part)")
    return complex(real.value, imag.value), real.error + imag.error


def leg_integrals(protocol: Protocol, model: SpectralModel, *, tolerance: float = DEFAULT_TOLERANCE) -> LegIntegrals:
    a, b = _switchings(protocol)
    if model.is_discrete:
        weights = mode_weights(model.modes)

        def kernel(t: float) -> complex:
            return complex(np.sum(weights.positive * np.exp(-1j * weights.frequencies * t)
                                  + weights.negative * np.exp(1j * weights.frequencies * t)))

        # ⟨Φ₁Φ₂⟩ = Σ g²[(n+1)·conj χ̃₁·χ̃₂ + n·χ̃₁·conj χ̃₂] at the mode frequencies
        chi1, chi2 = fourier(a, weights.frequencies), fourier(b, weights.frequencies)
        cross = complex(np.sum(weights.positive * np.conj(chi1) * chi2 + weights.negative * chi1 * np.conj(chi2)))
        cross_error = 0.0
    else:
        def kernel(t: float) -> complex:
            return wightman_time(model, t)

        cross, cross_error = _complex_lag_integral(kernel, a, b, *lag_support(a, b), tolerance, "Wightman cross integral")

    half_self = []
    error = cross_error
    for chi in (a, b):
        value, err = _complex_lag_integral(kernel, chi, chi, 0.0, 2 * chi.half_width, tolerance, "time-ordered self-energy")
        half_self.append(value)
        error += err
    return LegIntegrals((half_self[0], half_self[1]), cross, error)


def _second_order_generator(
    protocol: Protocol, rho: DensityMatrix, integrals: LegIntegrals, ordering: Ordering,
) -> ComplexMatrix2:
    """The λ²-coefficient of the reduced state for one ordering."""
    mu = [leg.observable.matrix for leg in protocol.legs]
    r = rho.matrix
    out = np.zeros((2, 2), dtype=complex)

    # μ_i ρ μ_j ⟨Φ_j Φ_i⟩
    for i, j in itertools.product(range(2), repeat=2):
        out += mu[i] @ r @ mu[j] * integrals.pair(j, i)

    # time-ordered self-energy of each leg
    for j in range(2):
        half = integrals.half_self[j]
        mu2 = mu[j] @ mu[j]
        out -= mu2 @ r * half + r @ mu2 * half.conjugate()

    later, earlier = (1, 0) if ordering == Ordering.first_then_second else (0, 1)
    x_earlier_later = integrals.pair(earlier, later)
    out -= mu[later] @ mu[earlier] @ r * x_earlier_later.conjugate() + r @ mu[earlier] @ mu[later] * x_earlier_later
    return out


class PerturbedState(NamedTuple):
    matrix: ComplexMatrix2
    positive: bool
    min_eigenvalue: float
    quadrature_error: float

    @property
    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix)


def second_order_state(
    protocol: Protocol,
    model: SpectralModel,
    rho: DensityMatrix,
    order: Ordering = Ordering.first_then_second,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    integrals: Optional[LegIntegrals] = None,
) -> PerturbedState:
    order = Ordering(order)
    if protocol.coupling == 0:
        return PerturbedState(rho.matrix, True, min(hermitian_eigh(rho.matrix).eigenvalues), 0.0)
    if integrals is None:
        integrals = leg_integrals(protocol, model, tolerance=tolerance)
    matrix = rho.matrix + protocol.coupling ** 2 * _second_order_generator(protocol, rho, integrals, order)
    matrix = 0.5 * (matrix + matrix.conj().T)
    lowest = min(hermitian_eigh(matrix).eigenvalues)
    positive = lowest >= -1e-12
    if not positive:
        log.warning("second-order state for λ=%g (%s) is not positive: lowest eigenvalue %.3e", protocol.coupling, order.value, lowest)
    return PerturbedState(matrix, positive, lowest, integrals.error)


def _dyson_coefficients(protocol: Protocol, rho: DensityMatrix, integrals: LegIntegrals) -> Tuple[float, float, ComplexMatrix2]:
    difference = (_second_order_generator(protocol, rho, integrals, Ordering.first_then_second)
                  - _second_order_generator(protocol, rho, integrals, Ordering.second_then_first))
    hadamard_part, spectral_part = _structure(protocol, rho)
    columns = [hadamard_part, 1j * spectral_part]
    fallback = [2 * integrals.cross.real, 2 * integrals.cross.imag]

    identifiable = [k for k, column in enumerate(columns) if np.max(np.abs(column)) > 1e-14]
    coefficients = list(fallback)
    if identifiable:
        design = np.column_stack([np.concatenate([columns[k].real.ravel(), columns[k].imag.ravel()]) for k in identifiable])
        target = np.concatenate([difference.real.ravel(), difference.imag.ravel()])
        solution, *_ = np.linalg.lstsq(design, target, rcond=None)
        for k, value in zip(identifiable, solution):
            coefficients[k] = float(value)
    return coefficients[0], coefficients[1], difference


def delta_rho_dyson(
    protocol: Protocol, model: SpectralModel, rho: DensityMatrix, *, tolerance: float = DEFAULT_TOLERANCE,
) -> AsymmetryResult:
    integrals = leg_integrals(protocol, model, tolerance=tolerance)
    c, d, difference = _dyson_coefficients(protocol, rho, integrals)
    return AsymmetryResult(c, d, protocol.coupling ** 2 * difference, Method.dyson, integrals.error)


class ThreeWayResult(NamedTuple):
    time_domain: AsymmetryResult
    frequency_domain: AsymmetryResult
    dyson: AsymmetryResult

    @property
    def results(self) -> Tuple[AsymmetryResult, AsymmetryResult, AsymmetryResult]:
        return self.time_domain, self.frequency_domain, self.dyson

    @property
    def max_pairwise_residual(self) -> float:
        return max(
            max(abs(x.coefficient - y.coefficient), abs(x.anticommutator_coefficient - y.anticommutator_coefficient))
            for x, y in itertools.combinations(self.results, 2)
        )

    @property
    def quadrature_error(self) -> float:
        return sum(r.quadrature_error for r in self.results)

    @property
    def scale(self) -> float:
        return max(abs(self.time_domain.coefficient), abs(self.time_domain.anticommutator_coefficient), 1.0)

    def agrees(self, tolerance: float = AGREEMENT_TOLERANCE) -> bool:
        return self.max_pairwise_residual <= max(tolerance * self.scale, self.quadrature_error)


def asymmetry_three_way(
    protocol: Protocol, model: SpectralModel, rho: DensityMatrix, *, tolerance: float = DEFAULT_TOLERANCE,
) -> ThreeWayResult:
    result = ThreeWayResult(
        delta_rho_commutator_time(protocol, model, rho, tolerance=tolerance),
        delta_rho_frequency(protocol, model, rho, tolerance=tolerance),
        delta_rho_dyson(protocol, model, rho, tolerance=tolerance),
    )
    log.info("asymmetry c: time %.12g, frequency %.12g, Dyson %.12g (max residual %.3e)",
             *(r.coefficient for r in result.results), result.max_pairwise_residual)
    return result


def vacuum_limit_coefficient(protocol: Protocol, model: SpectralModel, *, tolerance: float = DEFAULT_TOLERANCE) -> float:
    """The Hadamard coefficient c with the thermal weighting coth(βω/2) replaced by 1."""
    rho = DensityMatrix.maximally_mixed()
    return delta_rho_frequency(protocol, model.vacuum(), rho, tolerance=tolerance).coefficient

