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

from .. import correlations
from ..correlations import (
    DiscreteModeSet,
    SpectralModel,
    detailed_balance_check,
    fit_discrete_modes,
    hadamard_spectrum,
    hadamard_time,
    kms_time_domain_check,
    mode_weights,
    spectral_function,
    thermal_occupation,
    unruh_beta,
    unruh_temperature,
    wightman_spectrum,
    wightman_time,
)
from ..errors import InvalidInputError


@pytest.mark.parametrize('acceleration, beta', (
    (2 * math.pi, 1.0),
    (1.0, 2 * math.pi),
    (4 * math.pi, 0.5),
))
def test_unruh_beta(acceleration, beta):
    assert unruh_beta(acceleration) == pytest.approx(beta, rel=1e-15)
    assert unruh_temperature(acceleration) == pytest.approx(1 / beta, rel=1e-15)


@pytest.mark.parametrize('acceleration', (0.0, -1.0, math.inf, math.nan))
def test_unruh_beta_rejects_invalid_acceleration(acceleration):
    with pytest.raises(InvalidInputError):
        unruh_beta(acceleration)


def test_accelerated_model_uses_unruh_temperature():
    model = SpectralModel.accelerated_massless_3p1(acceleration=2 * math.pi)
    assert model.beta == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        SpectralModel.accelerated_massless_3p1(acceleration=1.0, beta=1.0)


def test_thermal_occupation_is_stable():
    assert thermal_occupation(1.0, 1e-3) == pytest.approx(1 / math.expm1(1e-3), rel=1e-14)
    assert thermal_occupation(1.0, 800.0) == 0.0
    assert thermal_occupation(math.inf, 1.0) == 0.0


@pytest.mark.parametrize('omega', (0.1, 1.0, 10.0))
def test_detailed_balance(omega):
    model = SpectralModel.flat_ohmic(1.0, 5.0)
    ratio = wightman_spectrum(model, -omega) / wightman_spectrum(model, omega)
    assert ratio == pytest.approx(math.exp(-omega), rel=1e-12)


def test_vacuum_limit_has_no_negative_frequency_weight():
    model = SpectralModel.flat_ohmic(1e6, 5.0)
    assert wightman_spectrum(model, -1.0) <= 1e-300
    assert wightman_spectrum(model, 1.0) == pytest.approx(float(spectral_function(model, 1.0)), rel=1e-6)


def test_wightman_difference_is_spectral_function():
    model = SpectralModel.flat_ohmic(1.0, 5.0)
    omega = np.linspace(0.01, 20.0, 101)
    difference = wightman_spectrum(model, omega) - wightman_spectrum(model, -omega)
    assert np.allclose(difference, omega / (2 * math.pi) * np.exp(-(omega / 5.0) ** 2), rtol=1e-12, atol=0)


def test_spectral_function_is_odd(default_model):
    omega = np.linspace(-20.0, 20.0, 81)
    assert np.array_equal(spectral_function(default_model, -omega), -spectral_function(default_model, omega))


def test_hadamard_spectrum_is_sum_of_wightman_spectra(default_model):
    omega = np.linspace(-50.0, 50.0, 401)
    total = wightman_spectrum(default_model, omega) + wightman_spectrum(default_model, -omega)
    assert np.allclose(hadamard_spectrum(default_model, omega), total, rtol=1e-10, atol=0)


def test_hadamard_spectrum_is_even_and_non_negative(default_model):
    omega = np.linspace(-50.0, 50.0, 401)
    values = hadamard_spectrum(default_model, omega)
    assert np.array_equal(values, hadamard_spectrum(default_model, -omega))
    assert np.all(values >= 0)
    assert np.all(wightman_spectrum(default_model, omega) >= 0)


def test_hadamard_spectrum_at_zero_is_continuous(default_model):
    assert hadamard_spectrum(default_model, 0.0) == pytest.approx(hadamard_spectrum(default_model, 1e-6), rel=1e-9)
    assert wightman_spectrum(default_model, 0.0) == pytest.approx(wightman_spectrum(default_model, 1e-6), rel=1e-5)


def test_hadamard_spectrum_closed_form():
    model = SpectralModel.custom(1.0, lambda omega: omega / (2 * math.pi), omega_max=10.0)
    assert hadamard_spectrum(model, 2.0) == pytest.approx(1 / (math.tanh(1.0) * math.pi), rel=1e-14)


def test_custom_model_rejects_negative_spectrum():
    with pytest.raises(InvalidInputError):
        SpectralModel.custom(1.0, lambda omega: np.sin(omega), omega_max=10.0)


@pytest.mark.parametrize('t', (0.3, 1.7))
def test_hadamard_time_is_even(default_model, t):
    assert hadamard_time(default_model, t) == pytest.approx(hadamard_time(default_model, -t), abs=1e-9)


def test_discrete_hadamard_time_closed_form(two_modes):
    model = SpectralModel.discrete(two_modes)
    for t in (0.0, 0.4, 2.5):
        expected = 2 * sum(g ** 2 / math.tanh(0.5 * omega) * math.cos(omega * t) for omega, g in two_modes)
        assert hadamard_time(model, t) == pytest.approx(expected, rel=1e-12)


def test_hadamard_time_transforms_back(default_model):
    omega = 2.5

    def integrand(t):
        return 2 * hadamard_time(default_model, t) * math.cos(omega * t)

    value, _ = integrate.quad(integrand, 0.0, 8.0, epsabs=1e-9, epsrel=1e-8, limit=200)
    assert value == pytest.approx(hadamard_spectrum(default_model, omega), rel=1e-6)


def test_wightman_time_relations(default_model):
    for t in (0.0, 0.6, 2.0):
        w = wightman_time(default_model, t)
        assert wightman_time(default_model, -t) == pytest.approx(w.conjugate(), abs=1e-10)
        assert (w + wightman_time(default_model, -t)).real == pytest.approx(hadamard_time(default_model, t), abs=1e-9)
    assert abs(wightman_time(default_model, 0.0).imag) <= 1e-12


def test_discrete_wightman_time_closed_form(two_modes):
    model = SpectralModel.discrete(two_modes)
    t = 0.7
    expected = sum(
        g ** 2 * ((n + 1) * np.exp(-1j * omega * t) + n * np.exp(1j * omega * t))
        for (omega, g), n in zip(two_modes, two_modes.occupations)
    )
    assert wightman_time(model, t) == pytest.approx(expected, abs=1e-13)


def test_mode_weights(two_modes):
    weights = mode_weights(two_modes)
    assert np.allclose(weights.positive - weights.negative, two_modes.weights ** 2, rtol=1e-13, atol=0)
    assert np.allclose(weights.negative / weights.positive, np.exp(-two_modes.frequencies), rtol=1e-13, atol=0)


@pytest.mark.parametrize('modes', (
    (),
    ((1.0, 0.1), (1.0, 0.2)),
    ((-1.0, 0.1),),
    ((1.0, math.inf),),
))
def test_discrete_mode_set_validation(modes):
    with pytest.raises(InvalidInputError):
        DiscreteModeSet(modes, 1.0)


def test_discrete_model_has_no_continuum_spectrum(two_modes):
    with pytest.raises(InvalidInputError):
        wightman_spectrum(SpectralModel.discrete(two_modes), 1.0)


def test_kms_shift_discrete(two_modes):
    report = kms_time_domain_check(SpectralModel.discrete(two_modes), np.linspace(-3, 3, 25), 1e-10)
    assert report.passed
    assert report.max_deviation <= 1e-10


def test_kms_shift_flat_ohmic():
    model = SpectralModel.flat_ohmic(2.0, 5.0)
    report = kms_time_domain_check(model, np.linspace(-3, 3, 13), 1e-6)
    assert report.max_deviation <= 1e-6
    assert report.passed


@pytest.mark.parametrize('beta', (10.0, 50.0, 100.0))
def test_kms_shift_of_cold_models(beta):
    # at β = 50 and 100, e^{β|ω|} overflows inside the integration band
    report = kms_time_domain_check(SpectralModel.flat_ohmic(beta, 5.0), [0.0, 0.5], 1e-6)
    assert report.passed, report.deviations


def test_kms_shift_at_strip_edge(default_model):
    assert kms_time_domain_check(default_model, [0.0], 1e-6).passed


def test_kms_check_refuses_vacuum(default_model):
    with pytest.raises(InvalidInputError):
        kms_time_domain_check(default_model.vacuum(), [0.0], 1e-6)


def test_corrupted_spectrum_fails_kms(monkeypatch, default_model):
    original = correlations.wightman_spectrum

    def corrupted(model, omega):
        return original(model, omega) * np.where(np.asarray(omega) < 0, 2.0, 1.0)

    monkeypatch.setattr(correlations, 'wightman_spectrum', corrupted)
    report = kms_time_domain_check(default_model, [0.0, 0.5], 1e-6)
    assert not report.passed
    assert report.max_deviation > 1e-3
    assert detailed_balance_check(default_model, [0.5, 1.0]).max_relative_error == pytest.approx(1.0, rel=1e-12)


def test_detailed_balance_grid(default_model):
    report = detailed_balance_check(default_model, np.linspace(0.05, 10.0, 200))
    assert len(report.frequencies) == 200
    assert report.max_relative_error <= 1e-12


def test_detailed_balance_discrete(two_modes):
    assert detailed_balance_check(SpectralModel.discrete(two_modes)).max_relative_error <= 1e-12


def test_detailed_balance_needs_grid(default_model):
    with pytest.raises(InvalidInputError):
        detailed_balance_check(default_model)


def test_fit_single_narrow_line():
    center, sigma, mass = 2.0, 1e-4, 0.3

    def narrow(omega):
        omega = np.asarray(omega, dtype=float)
        return mass * 2 * math.pi * np.exp(-0.5 * ((omega - center) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))

    model = SpectralModel.custom(1.0, narrow, omega_max=2.2, uv_cutoff=0.01)
    fit = fit_discrete_modes(model, 1, omega_max=2.01, omega_min=1.99, tolerance=1.0)
    (frequency, weight), = fit.modes
    assert frequency == pytest.approx(center, abs=1e-8)
    assert weight ** 2 == pytest.approx(mass, abs=1e-8)


def test_fit_flat_ohmic_reconstructs_hadamard_function():
    model = SpectralModel.flat_ohmic(1.0, 5.0)
    fit = fit_discrete_modes(model, 8)
    assert fit.within_tolerance
    assert fit.reconstruction_error <= 1e-3
    assert fit.modes.beta == model.beta


def test_fit_refines_with_more_modes(caplog):
    model = SpectralModel.flat_ohmic(1.0, 5.0)
    coarse = fit_discrete_modes(model, 4, tolerance=1e-12)
    fine = fit_discrete_modes(model, 8, tolerance=1e-12)
    assert fine.reconstruction_error < coarse.reconstruction_error
    assert any("increase the mode count" in record.getMessage() for record in caplog.records)


def test_fit_rejects_empty_band(default_model):
    with pytest.raises(InvalidInputError):
        fit_discrete_modes(default_model, 0)
    with pytest.raises(InvalidInputError):
        fit_discrete_modes(default_model, 2, omega_max=1.0, omega_min=2.0)
