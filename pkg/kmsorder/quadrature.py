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
Adaptive quadrature helpers.

All numerical integrals in this package go through :func:`integrate`, which wraps
:func:`scipy.integrate.quad` and turns a failure to reach the requested tolerance into a
:class:`~kmsorder.errors.ConvergenceError` carrying the achieved error estimate.
"""

import logging
import math
from typing import (
    Callable,
    NamedTuple,
)

from scipy import integrate as _integrate

from .errors import ConvergenceError

log = logging.getLogger(__name__)

DEFAULT_EPSABS = 1e-13
DEFAULT_EPSREL = 1e-11
DEFAULT_LIMIT = 200


class Quadrature(NamedTuple):
    value: float
    error: float


def integrate(
    func: Callable[[float], float],
    a: float,
    b: float,
    *,
    epsabs: float = DEFAULT_EPSABS,
    epsrel: float = DEFAULT_EPSREL,
    limit: int = DEFAULT_LIMIT,
    what: str = "quadrature",
) -> Quadrature:
    if a == b:
        return Quadrature(0.0, 0.0)

    result = _integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:
        # quad only appends a message when it flagged a problem; roundoff detection is harmless as long as the estimate is fine
        requested = max(epsabs, epsrel * abs(value))
        if not math.isfinite(value) or abserr > 10 * requested:
            raise ConvergenceError(what, abserr, requested)
        log.debug("%s: accepted flagged result %r (error estimate %.3e): %s", what, value, abserr, result[3])
    return Quadrature(value, abserr)


def integrate_panels(
    func: Callable[[float], float],
    a: float,
    b: float,
    panel_width: float,
    *,
    epsabs: float = DEFAULT_EPSABS,
    epsrel: float = DEFAULT_EPSREL,
    limit: int = DEFAULT_LIMIT,
    what: str = "quadrature",
) -> Quadrature:
    """
    Integrates an oscillatory integrand by splitting [a, b] into panels of at most ``panel_width`` and running the adaptive
    integrator on each of them, distributing the absolute tolerance evenly over the panels.
    """
    if a == b:
        return Quadrature(0.0, 0.0)
    count = max(1, int(math.ceil(abs(b - a) / panel_width)))
    step = (b - a) / count
    value, error = 0.0, 0.0
    for idx in range(count):
        lo = a + idx * step
        hi = b if idx == count - 1 else lo + step
        panel = integrate(func, lo, hi, epsabs=epsabs / count, epsrel=epsrel, limit=limit, what=what)
        value += panel.value
        error += panel.error
    return Quadrature(value, error)
