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

from typing import Optional

from click import ClickException


class ConfigurationError(ClickException):
    exit_code = 32

    def __init__(self, message, file=None, field=None):
        super().__init__(message)
        self.file = file
        self.field = field

    def format_message(self):
        message = self.message
        if self.field is not None:
            message = f"`{self.field}` {message}"
        if self.file is not None:
            return "configuration error in '%s': %s" % (self.file, message)
        else:
            return "configuration error: %s" % (message,)


class InvalidInputError(ClickException, ValueError):
    exit_code = 33


class InvalidStateError(ClickException, ValueError):
    exit_code = 34

    def __init__(self, invariant: str, deviation: float):
        super().__init__(f"density matrix violates {invariant} (deviation {deviation:.3e})")
        self.invariant = invariant
        self.deviation = deviation


class SupportViolationError(ClickException, ValueError):
    exit_code = 35

    def __init__(self, eigenvalue: float, floor: float):
        super().__init__(f"state is not full rank: eigenvalue {eigenvalue:.3e} is below the floor {floor:.1e}")
        self.eigenvalue = eigenvalue
        self.floor = floor


class InfiniteDivergence(ClickException, ArithmeticError):
    """
    Relative entropy D(ρ‖σ) is +∞ because the support of ρ is not contained in the support of σ.
    """
    exit_code = 36

    def __init__(self, weight: float):
        super().__init__(f"relative entropy diverges: first state puts weight {weight:.3e} on the kernel of the second")
        self.weight = weight


class ConvergenceError(ClickException, ArithmeticError):
    exit_code = 37

    def __init__(self, what: str, achieved: float, requested: Optional[float] = None):
        msg = f"{what} did not converge: achieved error estimate {achieved:.3e}"
        if requested is not None:
            msg += f" (requested {requested:.3e})"
        super().__init__(msg)
        self.achieved = achieved
        self.requested = requested


class SupportOverlapError(ClickException, ValueError):
    exit_code = 38

    def __init__(self, gap: float):
        super().__init__(f"switching supports are not strictly disjoint (gap {gap:.6g}); the legs would overlap in time")
        self.gap = gap


class TruncationLeakageError(ClickException, ArithmeticError):
    exit_code = 39

    def __init__(self, mode: int, population: float, threshold: float):
        super().__init__(
            f"Fock truncation leaks: mode {mode} has population {population:.3e} in its top level (threshold {threshold:.1e}); increase n_max"
        )
        self.mode = mode
        self.population = population
        self.threshold = threshold


class ConsistencyError(ClickException, ArithmeticError):
    exit_code = 40

    def __init__(self, what: str, residual: float, tolerance: float):
        super().__init__(f"{what}: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")
        self.residual = residual
        self.tolerance = tolerance


class InsufficientPointsError(ClickException, ValueError):
    exit_code = 41

    def __init__(self, count: int, required: int):
        super().__init__(f"insufficient points for a scaling fit: got {count}, need at least {required}")
        self.count = count
        self.required = required


class ToleranceExceededError(ClickException):
    exit_code = 42

    def __init__(self, command: str, breaches: int):
        super().__init__(f"{command}: {breaches} result(s) exceeded the declared tolerance")
        self.command = command
        self.breaches = breaches
