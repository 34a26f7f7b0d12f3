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


import math

import numpy as np
import pytest
from scipy import integrate

from . import make_protocol
from ..algebra import Observable
from ..errors import (
    InvalidInputError,
    SupportOverlapError,
)
from ..switching import (
    Leg,
    Protocol,
    SwitchingFunction,
    SwitchingShape,
    cross_correlation,
    evaluate,
    fourier,
    integral,
    lag_support,
    supports_disjoint,
)


@pytest.fixture(params=SwitchingShape, ids=lambda shape: shape.value)
def bump(request):
    return SwitchingFunction.create(request.param, 0.5, 1.5, 2.0)


def test_evaluate_profile(bump):
    assert evaluate(bump, 0.5) == pytest.approx(2.0)
    assert evaluate(bump, -1.0) == 0.0
    assert evaluate(bump, 2.0) == 0.0
    assert evaluate(bump, 7.0) == 0.0
    values = evaluate(bump, np.linspace(-3.0, 4.0, 71))
    assert values.shape == (71,)
    assert np.all(values >= 0)
    assert np.all(values <= 2.0)


def test_evaluate_is_symmetric_about_center(bump):
    offsets = np.linspace(0.0, 1.4, 15)
    assert np.allclose(evaluate(bump, 0.5 + offsets), evaluate(bump, 0.5 - offsets), rtol=1e-12, atol=0)


def test_integral_matches_quadrature(bump):
    value, _ = integrate.quad(lambda tau: evaluate(bump, tau), -1.0, 2.0, epsabs=1e-13, epsrel=1e-12)
    assert integral(bump) == pytest.approx(value, rel=1e-10)


def test_cosine_bump_integral():
    assert integral(SwitchingFunction.create('cosine_bump', -4.0, 2.5, 0.8)) == pytest.approx(2.0)


@pytest.mark.parametrize('omega', (0.0, 0.7, 2.3, 11.0))
def test_fourier_matches_quadrature(bump, omega):
    def part(fun):
        value, _ = integrate.quad(lambda tau: evaluate(bump, tau) * fun(omega * tau), -1.0, 2.0,
                                  epsabs=1e-13, epsrel=1e-12, limit=200)
        return value

    expected = complex(part(math.cos), part(math.sin))
    assert fourier(bump, omega) == pytest.approx(expected, abs=1e-9)


def test_fourier_at_zero_is_integral(bump):
    assert fourier(bump, 0.0) == pytest.approx(integral(bump), rel=1e-12)


def test_fourier_translation_is_a_phase(bump):
    omega = np.array([0.3, 1.0, 4.0])
    shifted = fourier(bump.translated(1.7), omega)
    assert np.allclose(shifted, np.exp(1j * omega * 1.7) * fourier(bump, omega), rtol=1e-10, atol=1e-14)


def test_fourier_is_hermitian(bump):
    assert fourier(bump, -1.2) == pytest.approx(fourier(bump, 1.2).conjugate(), abs=1e-12)


@pytest.mark.parametrize('shape, center, half_width, amplitude', (
    ('triangle', 0.0, 1.0, 1.0),
    ('cosine_bump', 0.0, 0.0, 1.0),
    ('cosine_bump', 0.0, -1.0, 1.0),
    ('cosine_bump', 0.0, math.inf, 1.0),
    ('smooth_bump', 0.0, 1.0, -0.5),
    ('smooth_bump', math.nan, 1.0, 1.0),
))
def test_create_rejects_invalid_switching(shape, center, half_width, amplitude):
    with pytest.raises(InvalidInputError):
        SwitchingFunction.create(shape, center, half_width, amplitude)


def test_supports_disjoint():
    a = SwitchingFunction.create('cosine_bump', -2.0, 1.0)
    assert supports_disjoint(a, SwitchingFunction.create('cosine_bump', 2.0, 1.0)) == (True, pytest.approx(2.0))
    touching = supports_disjoint(a, SwitchingFunction.create('cosine_bump', 0.0, 1.0))
    assert not touching.disjoint
    assert touching.gap == pytest.approx(0.0)
    assert not supports_disjoint(a, SwitchingFunction.create('cosine_bump', -1.0, 1.0)).disjoint


@pytest.mark.parametrize('centers', (
    (-0.5, 0.5),
    (-1.0, 1.0),
    (0.0, 0.0),
))
def test_protocol_rejects_overlapping_legs(centers):
    with pytest.raises(SupportOverlapError) as excinfo:
        make_protocol(centers=centers)
    assert excinfo.value.exit_code == 38
    assert excinfo.value.gap <= 0


def test_protocol_rejects_non_finite_coupling():
    with pytest.raises(InvalidInputError):
        make_protocol(coupling=math.nan)


def test_protocol_accessors():
    protocol = make_protocol('Z', 'X', centers=(-3.0, 2.0), coupling=0.2)
    assert protocol.gap == pytest.approx(3.0)
    assert protocol.first.observable.label == Observable.pauli('Z').label
    reverse = protocol.reversed()
    assert reverse.first == protocol.second
    assert reverse.second == protocol.first
    assert reverse.coupling == protocol.coupling
    weaker = protocol.with_coupling(0.05)
    assert weaker.coupling == 0.05
    assert weaker.legs == protocol.legs


def test_protocol_accepts_plain_tuples():
    chi = SwitchingFunction.create('smooth_bump', -2.0, 1.0)
    protocol = Protocol((Observable.pauli('X'), chi), (Observable.pauli('Y'), chi.translated(4.0)), 0.1)
    assert isinstance(protocol.first, Leg)
    assert protocol.second.switching.center == 2.0


def test_cross_correlation_peak():
    chi = SwitchingFunction.create('cosine_bump', -2.0, 1.0, 1.5)
    other = chi.translated(4.0)
    # ∫cos⁴(πu/2)du over [-1, 1] is 3/4
    assert cross_correlation(chi, other, -4.0) == pytest.approx(1.5 ** 2 * 0.75, rel=1e-12)


def test_cross_correlation_support(bump):
    other = SwitchingFunction.create('cosine_bump', 4.0, 0.5)
    lo, hi = lag_support(bump, other)
    assert (lo, hi) == (pytest.approx(-5.5), pytest.approx(-1.5))
    assert cross_correlation(bump, other, lo - 0.1) == 0.0
    assert cross_correlation(bump, other, hi + 0.1) == 0.0
    assert cross_correlation(bump, other, 0.5 * (lo + hi)) > 0


def test_cross_correlation_reflection(bump):
    other = SwitchingFunction.create('smooth_bump', 3.0, 0.8, 0.5)
    for lag in (-3.0, -2.2, -1.9):
        assert cross_correlation(bump, other, lag) == pytest.approx(cross_correlation(other, bump, -lag), rel=1e-10)


def test_cross_correlation_zero_amplitude(bump):
    silent = SwitchingFunction.create('cosine_bump', 3.0, 1.0, 0.0)
    assert cross_correlation(bump, silent, -2.5) == 0.0
