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
Closed-form 2×2 operator algebra for the two-level detector.

Every matrix function is evaluated through the Bloch decomposition M = c₀·I + c⃗·σ⃗, whose eigenvalues are c₀ ± |c⃗| with
projectors ½(I ± ĉ·σ⃗). No iterative eigensolver is involved.
"""

from enum import Enum
import logging
import math
from typing import (
    Callable,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy.special import expit

from .errors import (
    InvalidInputError,
    InvalidStateError,
    SupportViolationError,
)
from .types import ComplexMatrix2

__all__ = (
    'DensityMatrix',
    'Observable',
    'ObservableLabel',
    'anticommutator',
    'commutator',
    'matrix_exp',
    'matrix_log',
    'pauli_gibbs',
    'trace_distance',
)

log = logging.getLogger(__name__)

HERMITICITY_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12
POSITIVITY_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = 1e-14
UNIT_TOLERANCE = 1e-12


def _constant(rows) -> np.ndarray:
    m = np.array(rows, dtype=complex)
    m.setflags(write=False)
    return m


IDENTITY = _constant([[1, 0], [0, 1]])
SIGMA_X = _constant([[0, 1], [1, 0]])
SIGMA_Y = _constant([[0, -1j], [1j, 0]])
SIGMA_Z = _constant([[1, 0], [0, -1]])
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

MatrixLike = Union[ComplexMatrix2, "DensityMatrix", "Observable"]


def as_matrix(m: MatrixLike) -> ComplexMatrix2:
    if isinstance(m, (DensityMatrix, Observable)):
        return m.matrix
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidInputError(f"expected a 2×2 matrix, got shape {m.shape}")
    return m


def commutator(a: MatrixLike, b: MatrixLike) -> ComplexMatrix2:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def anticommutator(a: MatrixLike, b: MatrixLike) -> ComplexMatrix2:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b + b @ a


def adjoint(m: MatrixLike) -> ComplexMatrix2:
    return as_matrix(m).conj().T


def hermiticity_deviation(m: MatrixLike) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T)))


def bloch_decompose(m: MatrixLike) -> Tuple[complex, np.ndarray]:
    """Returns (c₀, c⃗) such that M = c₀·I + c⃗·σ⃗."""
    m = as_matrix(m)
    c0 = 0.5 * (m[0, 0] + m[1, 1])
    c = np.array([
        0.5 * (m[0, 1] + m[1, 0]),
        0.5j * (m[0, 1] - m[1, 0]),
        0.5 * (m[0, 0] - m[1, 1]),
    ])
    return c0, c


def from_bloch(c0: complex, c: Sequence[complex]) -> ComplexMatrix2:
    cx, cy, cz = c
    return c0 * IDENTITY + cx * SIGMA_X + cy * SIGMA_Y + cz * SIGMA_Z


class Spectrum(NamedTuple):
    """Eigenvalues in ascending order with their orthogonal projectors."""
    eigenvalues: Tuple[float, ...]
    projectors: Tuple[ComplexMatrix2, ...]

    def apply(self, fun: Callable[[float], complex]) -> ComplexMatrix2:
        out = np.zeros((2, 2), dtype=complex)
        for value, projector in zip(self.eigenvalues, self.projectors):
            out += fun(value) * projector
        return out


def hermitian_eigh(m: MatrixLike) -> Spectrum:
    m = as_matrix(m)
    deviation = hermiticity_deviation(m)
    if deviation > HERMITICITY_TOLERANCE:
        raise InvalidInputError(f"matrix is not Hermitian (deviation {deviation:.3e})")
    c0, c = bloch_decompose(m)
    c0, c = float(c0.real), c.real
    radius = float(np.linalg.norm(c))
    if radius == 0.0:
        return Spectrum((c0,), (IDENTITY,))
    direction = from_bloch(0.0, c / radius)
    return Spectrum(
        (c0 - radius, c0 + radius),
        (0.5 * (IDENTITY - direction), 0.5 * (IDENTITY + direction)),
    )


def matrix_function(m: MatrixLike, fun: Callable[[float], complex]) -> ComplexMatrix2:
    return hermitian_eigh(m).apply(fun)


def matrix_exp(m: MatrixLike) -> ComplexMatrix2:
    """
    Exponential of an arbitrary complex 2×2 matrix: e^{c₀}(cosh r·I + sinh(r)/r·c⃗·σ⃗) with r² = c⃗·c⃗ (no conjugation).
    """
    c0, c = bloch_decompose(m)
    r2 = complex(np.dot(c, c))
    r = np.sqrt(r2)
    if abs(r) < 1e-6:
        sinhc = 1 + r2 / 6 + r2 * r2 / 120
    else:
        sinhc = np.sinh(r) / r
    return np.exp(c0) * (np.cosh(r) * IDENTITY + sinhc * from_bloch(0.0, c))


def trace_norm(m: MatrixLike) -> float:
    values = hermitian_eigh(m).eigenvalues
    if len(values) == 1:
        return 2 * abs(values[0])
    return abs(values[0]) + abs(values[1])


class ObservableLabel(str, Enum):
    X      = 'X'
    Y      = 'Y'
    Z      = 'Z'
    I      = 'I'  # noqa: E741
    custom = 'custom'


_PAULI_LABELS = {
    ObservableLabel.X: SIGMA_X,
    ObservableLabel.Y: SIGMA_Y,
    ObservableLabel.Z: SIGMA_Z,
    ObservableLabel.I: IDENTITY,
}


class Observable:
    """A Hermitian detector operator through which the detector couples to the field."""
    __slots__ = ('_matrix', 'label')

    def __init__(self, matrix: ComplexMatrix2, label: ObservableLabel = ObservableLabel.custom):
        matrix = np.array(as_matrix(matrix), dtype=complex)
        deviation = hermiticity_deviation(matrix)
        if deviation > HERMITICITY_TOLERANCE:
            raise InvalidInputError(f"coupling observable is not Hermitian (deviation {deviation:.3e})")
        matrix.setflags(write=False)
        self._matrix = matrix
        self.label = ObservableLabel(label)

    @classmethod
    def pauli(cls, label: Union[str, ObservableLabel]) -> "Observable":
        label = ObservableLabel(label)
        try:
            return cls(_PAULI_LABELS[label], label)
        except KeyError:
            raise InvalidInputError(f"'{label.value}' does not name a Pauli operator") from None

    @classmethod
    def from_bloch(cls, c0: float, c: Sequence[float]) -> "Observable":
        return cls(from_bloch(c0, c))

    @property
    def matrix(self) -> ComplexMatrix2:
        return self._matrix

    def __repr__(self):
        if self.label != ObservableLabel.custom:
            return f"Observable.pauli({self.label.value!r})"
        c0, c = bloch_decompose(self._matrix)
        return f"Observable.from_bloch({c0.real!r}, {tuple(c.real)!r})"


class DensityMatrix:
    """
    A valid two-level state: Hermitian, unit trace and positive semi-definite, all within 1e-12.

    Constructors that know the spectrum in closed form may pass it along, so that exponentially small eigenvalues survive
    instead of being recomputed as a difference of two numbers close to ½.
    """
    __slots__ = ('_matrix', '_spectrum')

    def __init__(self, matrix: ComplexMatrix2, *, spectrum: Optional[Spectrum] = None):
        matrix = np.array(as_matrix(matrix), dtype=complex)
        deviation = hermiticity_deviation(matrix)
        if deviation > HERMITICITY_TOLERANCE:
            raise InvalidStateError("Hermiticity", deviation)
        trace_error = abs(np.trace(matrix) - 1)
        if trace_error > TRACE_TOLERANCE:
            raise InvalidStateError("unit trace", trace_error)
        if spectrum is None:
            spectrum = hermitian_eigh(matrix)
        lowest = min(spectrum.eigenvalues)
        if lowest < -POSITIVITY_TOLERANCE:
            raise InvalidStateError("positivity", -lowest)
        matrix.setflags(write=False)
        self._matrix = matrix
        self._spectrum = spectrum

    @classmethod
    def from_bloch(cls, r: Sequence[float]) -> "DensityMatrix":
        return cls(0.5 * from_bloch(1.0, r))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(0.5 * IDENTITY)

    @classmethod
    def basis(cls, index: int) -> "DensityMatrix":
        m = np.zeros((2, 2), dtype=complex)
        m[index, index] = 1
        return cls(m)

    @property
    def matrix(self) -> ComplexMatrix2:
        return self._matrix

    @property
    def spectrum(self) -> Spectrum:
        return self._spectrum

    @property
    def bloch_vector(self) -> np.ndarray:
        _, c = bloch_decompose(self._matrix)
        return 2 * c.real

    def __repr__(self):
        return f"DensityMatrix.from_bloch({tuple(self.bloch_vector)!r})"


def _unit_direction(direction: Sequence[float]) -> np.ndarray:
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise InvalidInputError(f"direction must be a 3-vector, got shape {n.shape}")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1) > UNIT_TOLERANCE:
        raise InvalidInputError(f"direction must be a unit vector, |n| = {norm!r}")
    return n


def pauli_gibbs(direction: Sequence[float], s: float) -> DensityMatrix:
    """
    Effective Gibbs state e^{−s·n⃗·σ⃗}/(2 cosh s) = (I − tanh s·n⃗·σ⃗)/2.
    """
    n = _unit_direction(direction)
    n_sigma = from_bloch(0.0, n)
    matrix = 0.5 * (IDENTITY - math.tanh(s) * n_sigma)
    # the eigenvalue on the +1 eigenspace of n·σ is 1/(1 + e^{2s}), kept exact for large s
    spectrum = Spectrum(
        (float(expit(-2 * s)), float(expit(2 * s))),
        (0.5 * (IDENTITY + n_sigma), 0.5 * (IDENTITY - n_sigma)),
    )
    return DensityMatrix(matrix, spectrum=spectrum)


def spectrum(rho: Union[DensityMatrix, ComplexMatrix2]) -> Spectrum:
    if isinstance(rho, DensityMatrix):
        return rho.spectrum
    return hermitian_eigh(rho)


def matrix_log(rho: Union[DensityMatrix, ComplexMatrix2], *, floor: float = EIGENVALUE_FLOOR) -> ComplexMatrix2:
    spec = spectrum(rho)
    lowest = min(spec.eigenvalues)
    if lowest <= floor:
        raise SupportViolationError(lowest, floor)
    return spec.apply(math.log)


def trace_distance(a: MatrixLike, b: MatrixLike) -> float:
    return 0.5 * trace_norm(as_matrix(a) - as_matrix(b))


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Uhlmann fidelity (Tr√(√ρ σ √ρ))² of two qubit states, in closed form Tr(ρσ) + 2√(det ρ · det σ).
    """
    overlap = float(np.trace(rho.matrix @ sigma.matrix).real)
    det_rho = float(np.prod(_full_eigenvalues(rho)))
    det_sigma = float(np.prod(_full_eigenvalues(sigma)))
    return overlap + 2 * math.sqrt(max(det_rho, 0.0) * max(det_sigma, 0.0))


def bures_distance_squared(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """d_B² = 2(1 − √F)."""
    f = fidelity(rho, sigma)
    return 2 * (1 - f) / (1 + math.sqrt(max(f, 0.0)))


def _full_eigenvalues(rho: Union[DensityMatrix, ComplexMatrix2]) -> Tuple[float, float]:
    values = spectrum(rho).eigenvalues
    if len(values) == 1:
        return values[0], values[0]
    return values[0], values[1]
