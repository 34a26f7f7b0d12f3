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
from scipy.linalg import (
    expm,
    sqrtm,
)

from ..algebra import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    Observable,
    ObservableLabel,
    adjoint,
    anticommutator,
    as_matrix,
    bloch_decompose,
    commutator,
    fidelity,
    from_bloch,
    hermitian_eigh,
    matrix_exp,
    matrix_function,
    matrix_log,
    pauli_gibbs,
    trace_distance,
    trace_norm,
)
from ..errors import (
    InvalidInputError,
    InvalidStateError,
    SupportViolationError,
)

ZERO = np.zeros((2, 2))


@pytest.mark.parametrize('a, b, expected', (
    (SIGMA_X, SIGMA_Y, 2j * SIGMA_Z),
    (SIGMA_X, SIGMA_X, ZERO),
    (SIGMA_Y, SIGMA_X, -2j * SIGMA_Z),
    (SIGMA_Y, SIGMA_Z, 2j * SIGMA_X),
))
def test_commutator(a, b, expected):
    assert np.allclose(commutator(a, b), expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize('a, b, expected', (
    (SIGMA_X, SIGMA_Y, ZERO),
    (SIGMA_X, SIGMA_X, 2 * IDENTITY),
    (SIGMA_Z, SIGMA_Z, 2 * IDENTITY),
))
def test_anticommutator(a, b, expected):
    assert np.allclose(anticommutator(a, b), expected, rtol=0, atol=1e-15)


def test_anticommutator_with_identity(random_hermitian):
    for _ in range(20):
        m = random_hermitian()
        assert np.allclose(anticommutator(IDENTITY, m), 2 * m, rtol=0, atol=1e-14)


def test_commutator_bilinear_and_antisymmetric(rng):
    for _ in range(50):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        alpha = complex(*rng.normal(size=2))
        assert np.allclose(commutator(a, b), -commutator(b, a), rtol=0, atol=1e-13)
        assert np.allclose(commutator(alpha * a + c, b), alpha * commutator(a, b) + commutator(c, b), rtol=0, atol=1e-12)


def test_adjoint_is_involution(rng):
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.array_equal(adjoint(adjoint(m)), m)


def test_bloch_round_trip(rng):
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    c0, c = bloch_decompose(m)
    assert np.allclose(from_bloch(c0, c), m, rtol=0, atol=1e-14)


def test_as_matrix_rejects_other_shapes():
    with pytest.raises(InvalidInputError):
        as_matrix(np.eye(3))


def test_hermitian_eigh_matches_numpy(random_hermitian):
    for _ in range(20):
        m = random_hermitian()
        spectrum = hermitian_eigh(m)
        assert np.allclose(spectrum.eigenvalues, np.linalg.eigvalsh(m), rtol=0, atol=1e-13)
        assert np.allclose(spectrum.apply(lambda x: x), m, rtol=0, atol=1e-13)


def test_hermitian_eigh_degenerate():
    spectrum = hermitian_eigh(3 * IDENTITY)
    assert spectrum.eigenvalues == (3.0,)
    assert trace_norm(-3 * IDENTITY) == 6.0


def test_hermitian_eigh_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eigh(np.array([[0, 1], [0, 0]]))


def test_matrix_exp_matches_scipy(rng):
    for _ in range(20):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.allclose(matrix_exp(m), expm(m), rtol=1e-12, atol=1e-13)


def test_matrix_exp_nilpotent():
    m = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.allclose(matrix_exp(m), IDENTITY + m, rtol=0, atol=1e-15)


def test_pauli_gibbs_zero_is_maximally_mixed():
    assert np.allclose(pauli_gibbs((1, 0, 0), 0.0).matrix, 0.5 * IDENTITY, rtol=0, atol=1e-15)


@pytest.mark.parametrize('s', (0.1, 1.0, 5.0))
def test_pauli_gibbs_matches_normalized_exponential(s):
    unnormalized = expm(-s * SIGMA_X)
    expected = unnormalized / np.trace(unnormalized)
    assert np.max(np.abs(pauli_gibbs((1, 0, 0), s).matrix - expected)) <= 1e-12


@pytest.mark.parametrize('s', (0.1, 1.0, 5.0))
def test_pauli_gibbs_eigenvalues(s):
    rho = pauli_gibbs((0, 1, 0), s)
    expected = sorted(((1 - math.tanh(s)) / 2, (1 + math.tanh(s)) / 2))
    assert np.allclose(sorted(rho.spectrum.eigenvalues), expected, rtol=0, atol=1e-15)
    assert np.allclose(np.linalg.eigvalsh(rho.matrix), expected, rtol=0, atol=1e-15)


def test_pauli_gibbs_is_always_a_state(rng):
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        s = rng.uniform(0, 20)
        rho = pauli_gibbs(n, s)
        assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) <= 1e-12
        assert abs(np.trace(rho.matrix) - 1) <= 1e-12
        assert min(rho.spectrum.eigenvalues) >= 0


@pytest.mark.parametrize('direction', ((1, 1, 0), (0, 0, 0), (1, 0)))
def test_pauli_gibbs_rejects_non_unit_direction(direction):
    with pytest.raises(InvalidInputError):
        pauli_gibbs(direction, 1.0)


def test_matrix_log_maximally_mixed():
    assert np.allclose(matrix_log(DensityMatrix.maximally_mixed()), -math.log(2) * IDENTITY, rtol=0, atol=1e-15)


@pytest.mark.parametrize('s', (0.1, 1.0, 5.0, 10.0))
def test_matrix_log_of_gibbs_state(s):
    expected = -math.log(2 * math.cosh(s)) * IDENTITY - s * SIGMA_X
    assert np.max(np.abs(matrix_log(pauli_gibbs((1, 0, 0), s)) - expected)) <= 1e-12


@pytest.mark.parametrize('s', (0.5, 3.0, 12.0))
def test_matrix_log_eigenvalues(s):
    values = sorted(hermitian_eigh(matrix_log(pauli_gibbs((0, 0, 1), s))).eigenvalues)
    expected = sorted((math.log((1 - math.tanh(s)) / 2) if s < 10 else -2 * s - math.log1p(math.exp(-2 * s)),
                       math.log((1 + math.tanh(s)) / 2)))
    assert np.allclose(values, expected, rtol=0, atol=1e-10)


def test_matrix_log_round_trip(random_state):
    for _ in range(100):
        rho = random_state()
        assert np.max(np.abs(matrix_exp(matrix_log(rho)) - rho.matrix)) <= 1e-10


def test_matrix_function_square_root(random_state):
    for _ in range(20):
        rho = random_state()
        root = matrix_function(rho.matrix, math.sqrt)
        assert np.max(np.abs(root @ root - rho.matrix)) <= 1e-13
        assert np.max(np.abs(root - sqrtm(rho.matrix))) <= 1e-10


def test_matrix_log_of_singular_state():
    with pytest.raises(SupportViolationError):
        matrix_log(DensityMatrix.basis(0))


def test_trace_distance():
    zero, one = DensityMatrix.basis(0), DensityMatrix.basis(1)
    assert trace_distance(zero, zero) == 0
    assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-15)


def test_trace_distance_triangle_inequality(random_state):
    for _ in range(100):
        a, b, c = random_state(), random_state(), random_state()
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-14
        assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-15)


def test_fidelity_matches_uhlmann(random_state):
    for _ in range(20):
        rho, sigma = random_state(), random_state()
        root = sqrtm(rho.matrix)
        expected = np.trace(sqrtm(root @ sigma.matrix @ root)).real ** 2
        assert fidelity(rho, sigma) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize('matrix, invariant', (
    (np.array([[0.5, 0.1], [0.2, 0.5]]), 'Hermiticity'),
    (np.array([[0.6, 0.0], [0.0, 0.6]]), 'unit trace'),
    (np.array([[1.2, 0.0], [0.0, -0.2]]), 'positivity'),
))
def test_density_matrix_invariants(matrix, invariant):
    with pytest.raises(InvalidStateError) as excinfo:
        DensityMatrix(matrix)
    assert excinfo.value.invariant == invariant


def test_density_matrix_is_immutable():
    rho = DensityMatrix.maximally_mixed()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_observable_labels():
    assert Observable.pauli('Y').label == ObservableLabel.Y
    assert np.array_equal(Observable.pauli(ObservableLabel.I).matrix, IDENTITY)
    assert Observable.from_bloch(0.0, (0, 0, 1)).label == ObservableLabel.custom
    with pytest.raises(InvalidInputError):
        Observable(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InvalidInputError):
        Observable.pauli('custom')
