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

from enum import Enum
from functools import lru_cache
import logging
import math
from typing import (
    NamedTuple,
    Tuple,
    Union,
)

import numpy as np

from .algebra import Observable
from .errors import (
    InvalidInputError,
    SupportOverlapError,
)
from .quadrature import (
    integrate,
    integrate_panels,
)
from .types import RealLike

__all__ = (
    'Leg',
    'Protocol',
    'SwitchingFunction',
    'SwitchingShape',
    'cross_correlation',
    'evaluate',
    'fourier',
    'integral',
    'supports_disjoint',
)

log = logging.getLogger(__name__)


class SwitchingShape(str, Enum):
    cosine_bump = 'cosine_bump'
    smooth_bump = 'smooth_bump'


class SwitchingFunction(NamedTuple):
    shape: SwitchingShape
    center: float
    half_width: float
    amplitude: float = 1.0

    @classmethod
    def create(
        cls, shape: Union[str, SwitchingShape], center: float, half_width: float, amplitude: float = 1.0,
    ) -> "SwitchingFunction":
        try:
            shape = SwitchingShape(shape)
        except ValueError:
            raise InvalidInputError(f"unknown switching shape '{shape}'; expected one of {[s.value for s in SwitchingShape]}") from None
        if not (half_width > 0 and math.isfinite(half_width)):
            raise InvalidInputError(f"switching half width must be positive, got {half_width!r}")
        if not (amplitude >= 0 and math.isfinite(amplitude)):
            raise InvalidInputError(f"switching amplitude must be non-negative, got {amplitude!r}")
        if not math.isfinite(center):
            raise InvalidInputError(f"switching center must be finite, got {center!r}")
        return cls(shape, float(center), float(half_width), float(amplitude))

    @property
    def support(self) -> Tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def translated(self, shift: float) -> "SwitchingFunction":
        return self._replace(center=self.center + shift)


def _bump_profile(shape: SwitchingShape, u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) < 1
    out = np.zeros_like(u)
    if shape == SwitchingShape.cosine_bump:
        out[inside] = np.cos(0.5 * np.pi * u[inside]) ** 2
    else:
        out[inside] = np.exp(1 - 1 / (1 - u[inside] ** 2))
    return out


def evaluate(chi: SwitchingFunction, tau: RealLike) -> RealLike:
    u = np.atleast_1d((np.asarray(tau, dtype=float) - chi.center) / chi.half_width)
    values = chi.amplitude * _bump_profile(chi.shape, u)
    if np.ndim(tau) == 0:
        return float(values[0])
    return values.reshape(np.shape(tau))


@lru_cache(maxsize=None)
def _smooth_bump_area() -> float:
    return integrate(lambda u: float(_bump_profile(SwitchingShape.smooth_bump, np.array([u]))[0]), -1.0, 1.0,
                     what="smooth bump area").value


def integral(chi: SwitchingFunction) -> float:
    """∫χ(τ)dτ."""
    if chi.shape == SwitchingShape.cosine_bump:
        return chi.amplitude * chi.half_width
    return chi.amplitude * chi.half_width * _smooth_bump_area()


def _unnormalized_sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(x / np.pi)


def fourier(chi: SwitchingFunction, omega: RealLike) -> Union[complex, np.ndarray]:
    """
    χ̃(ω) = ∫dτ χ(τ)e^{iωτ}.

    The cosine bump ½A(1 + cos(πx/w)) on |x| < w has the closed form
    A·e^{iωt₀}[w·sinc(ωw) + ½w(sinc((ω + π/w)w) + sinc((ω − π/w)w))]; the smooth bump is integrated numerically.
    """
    w = np.asarray(omega, dtype=float)
    phase = np.exp(1j * w * chi.center)
    if chi.shape == SwitchingShape.cosine_bump:
        hw = chi.half_width
        k = np.pi / hw
        envelope = hw * _unnormalized_sinc(w * hw) + 0.5 * hw * (_unnormalized_sinc((w + k) * hw) + _unnormalized_sinc((w - k) * hw))
    else:
        envelope = np.vectorize(_smooth_bump_cosine_transform, otypes=[float])(chi.half_width, w)
    result = chi.amplitude * phase * envelope
    if np.ndim(omega) == 0:
        return complex(result)
    return result


def _smooth_bump_cosine_transform(half_width: float, omega: float) -> float:
    def integrand(u: float) -> float:
        return float(_bump_profile(SwitchingShape.smooth_bump, np.array([u]))[0]) * math.cos(omega * half_width * u)

    panel = 1.0 if omega == 0 else min(1.0, 2 * math.pi / abs(omega * half_width))
    return 2 * half_width * integrate_panels(integrand, 0.0, 1.0, panel, what=f"smooth bump transform at ω={omega:g}").value


class SupportGap(NamedTuple):
    disjoint: bool
    gap: float


def supports_disjoint(a: SwitchingFunction, b: SwitchingFunction) -> SupportGap:
    gap = abs(a.center - b.center) - a.half_width - b.half_width
    return SupportGap(gap > 0, gap)


def lag_support(a: SwitchingFunction, b: SwitchingFunction) -> Tuple[float, float]:
    reach = a.half_width + b.half_width
    offset = a.center - b.center
    return offset - reach, offset + reach


def cross_correlation(a: SwitchingFunction, b: SwitchingFunction, lag: float) -> float:
    """R(t) = ∫dτ a(τ)·b(τ − t), supported on :func:`lag_support`."""
    lo = max(a.center - a.half_width, b.center + lag - b.half_width)
    hi = min(a.center + a.half_width, b.center + lag + b.half_width)
    if hi <= lo or a.amplitude == 0 or b.amplitude == 0:
        return 0.0

    def integrand(tau: float) -> float:
        return evaluate(a, tau) * evaluate(b, tau - lag)

    return integrate(integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, what=f"switching cross-correlation at lag {lag:g}").value


class Leg(NamedTuple):
    observable: Observable
    switching: SwitchingFunction


class Protocol:
    """
    Two sequential couplings of the detector to the field, each through its own observable and switching function,
    with global coupling strength λ. The switching supports must be separated by a positive gap.
    """
    __slots__ = ('first', 'second', 'coupling')

    def __init__(self, first: Leg, second: Leg, coupling: float):
        first, second = Leg(*first), Leg(*second)
        if not math.isfinite(coupling):
            raise InvalidInputError(f"coupling strength must be finite, got {coupling!r}")
        disjoint, gap = supports_disjoint(first.switching, second.switching)
        if not disjoint:
            raise SupportOverlapError(gap)
        self.first = first
        self.second = second
        self.coupling = float(coupling)

    @property
    def legs(self) -> Tuple[Leg, Leg]:
        return self.first, self.second

    @property
    def gap(self) -> float:
        return supports_disjoint(self.first.switching, self.second.switching).gap

    def reversed(self) -> "Protocol":
        return Protocol(self.second, self.first, self.coupling)

    def with_coupling(self, coupling: float) -> "Protocol":
        return Protocol(self.first, self.second, coupling)

    def __repr__(self):
        return f"Protocol(first={self.first!r}, second={self.second!r}, coupling={self.coupling!r})"
