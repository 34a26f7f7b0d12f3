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


import re
from io import StringIO
from typing import Tuple

from ..algebra import Observable
from ..switching import (
    Leg,
    Protocol,
    SwitchingFunction,
)

PACKAGE : str = __package__.split('.')[0]

sgr_re = re.compile(r"\x1B\[.*?m")


def config_file(name: str, content: str):
    f = StringIO(content)
    f.name = name
    return f


def make_protocol(
    first: str = 'X',
    second: str = 'Y',
    *,
    centers: Tuple[float, float] = (-2.0, 2.0),
    half_width: float = 1.0,
    shape: str = 'cosine_bump',
    coupling: float = 0.1,
    amplitudes: Tuple[float, float] = (1.0, 1.0),
) -> Protocol:
    return Protocol(
        Leg(Observable.pauli(first), SwitchingFunction.create(shape, centers[0], half_width, amplitudes[0])),
        Leg(Observable.pauli(second), SwitchingFunction.create(shape, centers[1], half_width, amplitudes[1])),
        coupling,
    )
