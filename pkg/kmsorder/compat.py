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

import sys

import typeguard

# importlib.metadata was introduced in 3.8
if sys.version_info[:2] >= (3, 8):
    from importlib import metadata as metadata  # noqa: F401
else:
    import importlib_metadata as metadata  # noqa: F401

try:
    from typeguard import TypeCheckError
except ImportError:
    # typeguard < 3 reports mismatches as plain TypeError
    TypeCheckError = TypeError


def check_type(argname, value, expected_type):
    """Raises TypeError when ``value`` doesn't match ``expected_type``, with either major typeguard API."""
    try:
        if TypeCheckError is TypeError:
            typeguard.check_type(argname=argname, value=value, expected_type=expected_type)
        else:
            typeguard.check_type(value, expected_type)
    except TypeCheckError as exc:
        raise TypeError(f"{argname}: {exc}") from exc
