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
Stationary thermal two-point functions of the field along the detector worldline.

A :class:`SpectralModel` stores the spectral function Δ̃(ω) on ω ≥ 0 only and reflects it, so oddness holds structurally.
The Wightman spectrum is built from it as W̃(ω) = Δ̃(ω)/(1 − e^{−βω}), which satisfies detailed balance
W̃(−ω) = e^{−βω}·W̃(ω) by construction. Time-domain functions follow by quadrature over [−Ω, Ω] where Ω is the model's
integration bound, or by closed-form sums for discrete mode sets.
"""

from enum import Enum
import logging
import math
from typing import (
    Callable,
    Iterable,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InvalidInputError
from .quadrature import (
    Quadrature,
    integrate_panels,
)
from .types import (
    RealLike,
    SpectrumFunction,
)

__all__ = (
    'DiscreteModeSet',
    'ModelTag',
    'SpectralModel',
    'detailed_balance_check',
    'fit_discrete_modes',
    'hadamard_spectrum',
    'hadamard_time',
    'kms_time_domain_check',
    'spectral_function',
    'unruh_beta',
    'wightman_spectrum',
    'wightman_time',
)

log = logging.getLogger(__name__)

# Gaussian cutoffs are integrated up to this multiple of Λ; e^{-64} is below double precision relative to the peak
GAUSSIAN_CUTOFF_RANGE = 8.0
# beyond this β|ω|, e^{−β|ω|} is below double precision relative to 1
BOLTZMANN_NEGLIGIBLE = 40.0

TIME_EPSABS = 1e-12
TIME_EPSREL = 1e-10


class ModelTag(str, Enum):
    accelerated_massless_3p1 = 'accelerated_massless_3p1'
    flat_ohmic               = 'flat_ohmic'
    discrete_modes           = 'discrete_modes'
    custom                   = 'custom'


def unruh_beta(acceleration: float) -> float:
    if not (acceleration > 0 and math.isfinite(acceleration)):
        raise InvalidInputError(f"acceleration must be positive and finite, got {acceleration!r}")
    return 2 * math.pi / acceleration


def unruh_temperature(acceleration: float) -> float:
    return 1 / unruh_beta(acceleration)


def thermal_occupation(beta: float, omega: RealLike) -> RealLike:
    """Bose-Einstein occupation 1/(e^{βω} − 1); zero in the vacuum limit β = ∞."""
    with np.errstate(over='ignore'):
        return 1 / np.expm1(beta * np.asarray(omega, dtype=float))


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0 or math.isnan(beta):
        raise InvalidInputError(f"inverse temperature must be positive, got {beta!r}")
    return beta


class DiscreteModeSet:
    """
    Finitely many field modes φ = Σ_k g_k(a_k + a_k†) in a thermal state at inverse temperature β.

    Shared verbatim between the closed-form correlation functions and the truncated-Fock oracle.
    """
    __slots__ = ('frequencies', 'weights', 'beta')

    def __init__(self, modes: Iterable[Tuple[float, float]], beta: float):
        modes = list(modes)
        if not modes:
            raise InvalidInputError("a discrete mode set needs at least one mode")
        frequencies = np.array([float(omega) for omega, _ in modes])
        weights = np.array([float(g) for _, g in modes])
        if np.any(frequencies <= 0) or not np.all(np.isfinite(frequencies)):
            raise InvalidInputError(f"mode frequencies must be positive and finite, got {frequencies.tolist()}")
        if len(np.unique(frequencies)) != len(frequencies):
            raise InvalidInputError(f"mode frequencies must be distinct, got {frequencies.tolist()}")
        if not np.all(np.isfinite(weights)):
            raise InvalidInputError(f"mode weights must be finite, got {weights.tolist()}")
        frequencies.setflags(write=False)
        weights.setflags(write=False)
        self.frequencies = frequencies
        self.weights = weights
        self.beta = _check_beta(beta)

    def __len__(self):
        return len(self.frequencies)

    def __iter__(self):
        return zip(self.frequencies.tolist(), self.weights.tolist())

    def __repr__(self):
        return f"DiscreteModeSet({list(self)!r}, beta={self.beta!r})"

    @property
    def occupations(self) -> np.ndarray:
        return thermal_occupation(self.beta, self.frequencies)

    def with_beta(self, beta: float) -> "DiscreteModeSet":
        return DiscreteModeSet(self, beta)


class ModeWeights(NamedTuple):
    """Point masses of the Wightman spectrum: g²(n+1) at +ω_k and g²n at −ω_k."""
    frequencies: np.ndarray
    positive: np.ndarray
    negative: np.ndarray


def mode_weights(modes: DiscreteModeSet) -> ModeWeights:
    g2 = modes.weights ** 2
    n = modes.occupations
    return ModeWeights(modes.frequencies, g2 * (n + 1), g2 * n)


def ohmic_spectrum(lambda_uv: float) -> SpectrumFunction:
    def delta(omega: np.ndarray) -> np.ndarray:
        return omega / (2 * np.pi) * np.exp(-(omega / lambda_uv) ** 2)
    return delta


class SpectralModel:
    """
    A KMS state of a stationary field, characterized by Δ̃(ω) on ω ≥ 0 and β.

    ``beta`` may be ``math.inf`` for the vacuum limit.
    """
    __slots__ = ('tag', 'beta', 'uv_cutoff', 'omega_max', 'modes', '_delta', '_slope')

    def __init__(
        self,
        tag: ModelTag,
        beta: float,
        *,
        delta: Optional[SpectrumFunction] = None,
        uv_cutoff: Optional[float] = None,
        omega_max: Optional[float] = None,
        slope_at_zero: Optional[float] = None,
        modes: Optional[DiscreteModeSet] = None,
    ):
        self.tag = ModelTag(tag)
        self.beta = _check_beta(beta)
        self.modes = modes
        if self.tag == ModelTag.discrete_modes:
            if modes is None:
                raise InvalidInputError("a discrete_modes model needs a mode set")
            self._delta = None
            self._slope = 0.0
            self.uv_cutoff = float(np.max(modes.frequencies))
            self.omega_max = self.uv_cutoff
            return

        if delta is None:
            raise InvalidInputError(f"a {self.tag.value} model needs a spectral function")
        if uv_cutoff is None or not uv_cutoff > 0:
            raise InvalidInputError(f"UV cutoff must be positive, got {uv_cutoff!r}")
        self.uv_cutoff = float(uv_cutoff)
        self.omega_max = float(omega_max) if omega_max is not None else GAUSSIAN_CUTOFF_RANGE * self.uv_cutoff
        self._delta = delta

        samples = np.linspace(0.0, self.omega_max, 257)
        values = np.asarray(delta(samples), dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidInputError(f"spectral function of {self.tag.value} model must be finite and non-negative on ω ≥ 0")
        if slope_at_zero is None:
            h = 1e-8 * self.omega_max
            slope_at_zero = float(delta(np.array([h]))[0]) / h
        self._slope = float(slope_at_zero)

    @classmethod
    def accelerated_massless_3p1(
        cls, *, acceleration: Optional[float] = None, beta: Optional[float] = None, lambda_uv: float = 5.0,
    ) -> "SpectralModel":
        """
        Massless field seen by a uniformly accelerated detector: linear spectral function with a Gaussian UV cutoff, at
        the Unruh temperature a/2π unless ``beta`` is given explicitly.
        """
        if (acceleration is None) == (beta is None):
            raise InvalidInputError("give exactly one of acceleration or beta")
        if beta is None:
            beta = unruh_beta(acceleration)
        return cls(
            ModelTag.accelerated_massless_3p1, beta,
            delta=ohmic_spectrum(lambda_uv), uv_cutoff=lambda_uv, slope_at_zero=1 / (2 * math.pi),
        )

    @classmethod
    def flat_ohmic(cls, beta: float, lambda_uv: float = 5.0) -> "SpectralModel":
        return cls(
            ModelTag.flat_ohmic, beta,
            delta=ohmic_spectrum(lambda_uv), uv_cutoff=lambda_uv, slope_at_zero=1 / (2 * math.pi),
        )

    @classmethod
    def discrete(cls, modes: DiscreteModeSet) -> "SpectralModel":
        return cls(ModelTag.discrete_modes, modes.beta, modes=modes)

    @classmethod
    def custom(
        cls,
        beta: float,
        delta: SpectrumFunction,
        *,
        omega_max: float,
        uv_cutoff: Optional[float] = None,
        slope_at_zero: Optional[float] = None,
    ) -> "SpectralModel":
        return cls(
            ModelTag.custom, beta,
            delta=delta, uv_cutoff=uv_cutoff if uv_cutoff is not None else omega_max, omega_max=omega_max,
            slope_at_zero=slope_at_zero,
        )

    @property
    def is_discrete(self) -> bool:
        return self.tag == ModelTag.discrete_modes

    @property
    def slope_at_zero(self) -> float:
        return self._slope

    def delta_positive(self, omega: np.ndarray) -> np.ndarray:
        return np.asarray(self._delta(omega), dtype=float)

    def with_beta(self, beta: float) -> "SpectralModel":
        if self.is_discrete:
            return SpectralModel.discrete(self.modes.with_beta(beta))
        return SpectralModel(
            self.tag, beta,
            delta=self._delta, uv_cutoff=self.uv_cutoff, omega_max=self.omega_max, slope_at_zero=self._slope,
        )

    def vacuum(self) -> "SpectralModel":
        return self.with_beta(math.inf)

    def __repr__(self):
        if self.is_discrete:
            return f"SpectralModel.discrete({self.modes!r})"
        return f"SpectralModel({self.tag.value!r}, beta={self.beta!r}, uv_cutoff={self.uv_cutoff!r})"


def _continuum(model: SpectralModel, what: str) -> None:
    if model.is_discrete:
        raise InvalidInputError(f"{what} of a discrete_modes model is a sum of point masses; use mode_weights()")


def _shape_like(omega: RealLike, result: np.ndarray) -> RealLike:
    if np.ndim(omega) == 0:
        return float(result)
    return result


def spectral_function(model: SpectralModel, omega: RealLike) -> RealLike:
    """Δ̃(ω), odd in ω."""
    _continuum(model, "spectral function")
    w = np.asarray(omega, dtype=float)
    return _shape_like(omega, np.sign(w) * model.delta_positive(np.abs(w)))


def wightman_spectrum(model: SpectralModel, omega: RealLike) -> RealLike:
    _continuum(model, "Wightman spectrum")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    a = np.abs(w)
    result = np.empty_like(w)
    zero = a == 0
    nonzero = ~zero
    delta = model.delta_positive(a[nonzero])
    with np.errstate(over='ignore', under='ignore'):
        denominator = -np.expm1(-model.beta * a[nonzero])
        boltzmann = np.exp(-model.beta * a[nonzero])
    result[nonzero] = np.where(w[nonzero] > 0, delta / denominator, delta * boltzmann / denominator)
    result[zero] = model.slope_at_zero / model.beta
    return _shape_like(omega, result.reshape(np.shape(omega)))


def hadamard_spectrum(model: SpectralModel, omega: RealLike) -> RealLike:
    """G̃¹(ω) = coth(β|ω|/2)·Δ̃(|ω|), with the limit 2Δ̃′(0)/β at ω = 0."""
    _continuum(model, "Hadamard spectrum")
    a = np.atleast_1d(np.abs(np.asarray(omega, dtype=float)))
    result = np.empty_like(a)
    zero = a == 0
    result[~zero] = model.delta_positive(a[~zero]) / np.tanh(0.5 * model.beta * a[~zero])
    result[zero] = 2 * model.slope_at_zero / model.beta
    return _shape_like(omega, result.reshape(np.shape(omega)))


def _panel_width(model: SpectralModel, t: float) -> float:
    if t == 0:
        return model.uv_cutoff
    return min(2 * math.pi / abs(t), model.uv_cutoff)


def hadamard_time_quadrature(model: SpectralModel, t: float, *, epsabs: float = TIME_EPSABS, epsrel: float = TIME_EPSREL) -> Quadrature:
    """G¹(t) = (1/π)∫₀^Ω G̃¹(ω)cos(ωt)dω, with its quadrature error estimate."""
    if model.is_discrete:
        return Quadrature(float(_discrete_hadamard(model.modes, t)), 0.0)

    def integrand(omega: float) -> float:
        return float(hadamard_spectrum(model, omega)) * math.cos(omega * t) / math.pi

    return integrate_panels(
        integrand, 0.0, model.omega_max, _panel_width(model, t),
        epsabs=epsabs, epsrel=epsrel, what=f"Hadamard function at t={t:g}",
    )


def hadamard_time(model: SpectralModel, t: float) -> float:
    return hadamard_time_quadrature(model, t).value


def spectral_sine_quadrature(model: SpectralModel, t: float, *, epsabs: float = TIME_EPSABS, epsrel: float = TIME_EPSREL) -> Quadrature:
    """(1/π)∫₀^Ω Δ̃(ω)sin(ωt)dω, i.e. i·⟨[φ(t), φ(0)]⟩ = −2·Im W(t). Independent of the state."""
    if model.is_discrete:
        modes = model.modes
        return Quadrature(float(2 * np.sum(modes.weights ** 2 * np.sin(modes.frequencies * t))), 0.0)
    if t == 0:
        return Quadrature(0.0, 0.0)

    def integrand(omega: float) -> float:
        return float(model.delta_positive(np.array([omega]))[0]) * math.sin(omega * t) / math.pi

    return integrate_panels(
        integrand, 0.0, model.omega_max, _panel_width(model, t),
        epsabs=epsabs, epsrel=epsrel, what=f"spectral function transform at t={t:g}",
    )


def wightman_time(model: SpectralModel, t: float) -> complex:
    """
    W(t) = ∫dω/2π W̃(ω)e^{−iωt} = ½G¹(t) − (i/2π)∫₀^Ω Δ̃(ω)sin(ωt)dω.
    """
    if model.is_discrete:
        return complex(_discrete_wightman(model.modes, t))
    real = hadamard_time_quadrature(model, t).value
    imag = spectral_sine_quadrature(model, t).value
    return complex(0.5 * real, -0.5 * imag)


def _discrete_hadamard(modes: DiscreteModeSet, t: RealLike) -> RealLike:
    t = np.asarray(t, dtype=float)
    g2 = modes.weights ** 2
    coth = 1 / np.tanh(0.5 * modes.beta * modes.frequencies)
    return 2 * np.sum(g2 * coth * np.cos(np.multiply.outer(t, modes.frequencies)), axis=-1)


def _discrete_wightman(modes: DiscreteModeSet, t: RealLike) -> complex:
    weights = mode_weights(modes)
    phase = np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), weights.frequencies))
    return np.sum(weights.positive * phase + weights.negative * phase.conj(), axis=-1)


class KmsReport(NamedTuple):
    times: np.ndarray
    deviations: np.ndarray
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations)) if len(self.deviations) else 0.0

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _shifted_wightman(model: SpectralModel, t: float) -> complex:
    """W(−t − iβ) = ∫dω/2π W̃(ω)e^{−βω}e^{iωt}, without using detailed balance."""
    if model.is_discrete:
        weights = mode_weights(model.modes)
        omega = weights.frequencies
        return complex(np.sum(
            weights.positive * np.exp(-model.beta * omega) * np.exp(1j * omega * t)
            + weights.negative * np.exp(model.beta * omega) * np.exp(-1j * omega * t)
        ))

    width = _panel_width(model, t)

    def shifted_spectrum(omega: float) -> float:
        if -model.beta * omega > BOLTZMANN_NEGLIGIBLE:
            # W̃(ω) underflows while e^{β|ω|} overflows; their product Δ̃(|ω|)/(1 − e^{−β|ω|}) is Δ̃(|ω|) to double precision
            return float(model.delta_positive(np.array([-omega]))[0])
        return float(wightman_spectrum(model, omega)) * math.exp(-model.beta * omega)

    def part(fun: Callable[[float], float], what: str) -> float:
        def integrand(omega: float) -> float:
            return shifted_spectrum(omega) * fun(omega * t) / (2 * math.pi)
        return integrate_panels(integrand, -model.omega_max, model.omega_max, width, epsabs=TIME_EPSABS, epsrel=TIME_EPSREL, what=what).value

    return complex(part(math.cos, f"shifted Wightman function at t={t:g} (real part)"),
                   part(math.sin, f"shifted Wightman function at t={t:g} (imaginary part)"))


def _direct_wightman(model: SpectralModel, t: float) -> complex:
    if model.is_discrete:
        return complex(_discrete_wightman(model.modes, t))
    width = _panel_width(model, t)

    def part(fun: Callable[[float], float], what: str) -> float:
        def integrand(omega: float) -> float:
            return float(wightman_spectrum(model, omega)) * fun(omega * t) / (2 * math.pi)
        return integrate_panels(integrand, -model.omega_max, model.omega_max, width, epsabs=TIME_EPSABS, epsrel=TIME_EPSREL, what=what).value

    return complex(part(math.cos, f"Wightman function at t={t:g} (real part)"),
                   -part(math.sin, f"Wightman function at t={t:g} (imaginary part)"))


def kms_time_domain_check(model: SpectralModel, times: Sequence[float], tolerance: float) -> KmsReport:
    """
    Compares W(t) against its continuation W(−t − iβ) across the strip. Both sides are integrated directly from W̃, so a
    spectrum that violates detailed balance shows up as a deviation.
    """
    if math.isinf(model.beta):
        raise InvalidInputError("the vacuum state has no thermal strip to continue across")
    times = np.asarray(times, dtype=float)
    deviations = np.array([abs(_direct_wightman(model, t) - _shifted_wightman(model, t)) for t in times])
    report = KmsReport(times, deviations, tolerance)
    log.debug("KMS time-domain check of %r: max deviation %.3e over %d times", model, report.max_deviation, len(times))
    return report


class DetailedBalanceReport(NamedTuple):
    frequencies: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    relative_errors: np.ndarray

    @property
    def max_relative_error(self) -> float:
        return float(np.max(self.relative_errors)) if len(self.relative_errors) else 0.0


def detailed_balance_check(model: SpectralModel, frequencies: Optional[Sequence[float]] = None) -> DetailedBalanceReport:
    """
    Tabulates W̃(ω), W̃(−ω) and the relative error of W̃(−ω)/W̃(ω) against e^{−βω} for ω > 0. Discrete models are checked on
    their point masses at the mode frequencies.
    """
    if model.is_discrete:
        weights = mode_weights(model.modes)
        omega, positive, negative = weights
    else:
        if frequencies is None:
            raise InvalidInputError("continuum detailed-balance check needs a frequency grid")
        omega = np.asarray(frequencies, dtype=float)
        if np.any(omega <= 0):
            raise InvalidInputError("detailed balance is checked on positive frequencies")
        positive = np.asarray(wightman_spectrum(model, omega))
        negative = np.asarray(wightman_spectrum(model, -omega))
    expected = np.exp(-model.beta * omega)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = negative / positive
        errors = np.where(expected > 0, np.abs(ratio - expected) / expected, np.abs(ratio))
    errors = np.where(positive > 0, errors, 0.0)
    return DetailedBalanceReport(omega, positive, negative, errors)


class ModeFit(NamedTuple):
    modes: DiscreteModeSet
    reconstruction_error: float
    tolerance: float

    @property
    def within_tolerance(self) -> bool:
        return self.reconstruction_error <= self.tolerance


def _discretized_measure(model: SpectralModel, lower: float, upper: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lower, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    # the measure that makes G¹ reconstruction a Gauss rule for cos(ωt): G̃¹(ω)dω/2π
    density = np.asarray(hadamard_spectrum(model, nodes)) / (2 * math.pi)
    return nodes, weights * density


def _gauss_rule(nodes: np.ndarray, weights: np.ndarray, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss rule of the given discrete measure by the Stieltjes procedure on orthonormal polynomials."""
    mass = float(np.sum(weights))
    alpha = np.zeros(count)
    beta = np.zeros(max(count - 1, 0))
    q_prev = np.zeros_like(nodes)
    q = np.full_like(nodes, 1 / math.sqrt(mass))
    b_prev = 0.0
    for k in range(count):
        alpha[k] = np.sum(weights * nodes * q * q)
        if k + 1 == count:
            break
        r = (nodes - alpha[k]) * q - b_prev * q_prev
        b = math.sqrt(float(np.sum(weights * r * r)))
        if b == 0:
            raise InvalidInputError(f"spectral measure supports fewer than {count} distinct modes")
        beta[k] = b
        q_prev, q, b_prev = q, r / b, b
    theta, vectors = eigh_tridiagonal(alpha, beta)
    return theta, mass * vectors[0] ** 2


def fit_discrete_modes(
    model: SpectralModel,
    count: int,
    omega_max: Optional[float] = None,
    *,
    omega_min: float = 0.0,
    tolerance: float = 1e-3,
    panels: int = 100,
    order: int = 20,
) -> ModeFit:
    """
    Replaces a continuum spectrum by ``count`` modes so that Σ_k g_k²·f(ω_k) approximates ∫dω/2π Δ̃(ω)f(ω) on
    [omega_min, omega_max].

    Nodes and masses form the Gauss rule of the measure G̃¹(ω)dω/2π, which makes the reconstructed Hadamard function
    2Σ g_k²coth(βω_k/2)cos(ω_k t) a Gauss rule for cos(ωt). Mode weights are g_k² = tanh(βω_k/2) times the Gauss masses.
    The reconstruction error is the largest deviation from the quadrature Hadamard function on 0 ≤ t ≤ β (or t ≤ 1 in
    the vacuum), relative to G¹(0).
    """
    if count < 1:
        raise InvalidInputError(f"mode count must be at least 1, got {count}")
    _continuum(model, "mode fit")
    if omega_max is None:
        omega_max = 6 * model.uv_cutoff
    if not omega_max > omega_min >= 0:
        raise InvalidInputError(f"fit band must satisfy 0 ≤ omega_min < omega_max, got [{omega_min}, {omega_max}]")

    nodes, weights = _discretized_measure(model, omega_min, omega_max, panels, order)
    frequencies, masses = _gauss_rule(nodes, weights, count)
    g2 = masses * np.tanh(0.5 * model.beta * frequencies)
    modes = DiscreteModeSet(zip(frequencies, np.sqrt(g2)), model.beta)

    horizon = model.beta if math.isfinite(model.beta) else 1.0
    times = np.linspace(0.0, horizon, 21)
    reference = np.array([hadamard_time(model, t) for t in times])
    fitted = _discrete_hadamard(modes, times)
    scale = abs(reference[0]) or 1.0
    error = float(np.max(np.abs(fitted - reference)) / scale)

    fit = ModeFit(modes, error, tolerance)
    if not fit.within_tolerance:
        log.warning("%d modes reproduce G¹ only to %.3e (tolerance %.1e); increase the mode count", count, error, tolerance)
    else:
        log.debug("%d modes reproduce G¹ to %.3e", count, error)
    return fit
