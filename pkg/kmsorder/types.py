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

import os
from typing import (
    Callable,
    Union,
)

import numpy as np


PathLike = Union[str, os.PathLike]
RealLike = Union[float, np.ndarray]

# 2x2 complex numpy array
ComplexMatrix2 = np.ndarray

SpectrumFunction = Callable[[np.ndarray], np.ndarray]
