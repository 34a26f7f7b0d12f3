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


import logging
import sys
from functools import wraps
from typing import (
    Any,
    Callable,
    List,
    Mapping,
    Optional,
    Tuple,
    Union,
)

import click_log
import numpy as np
import pytest
from click import ClickException
from click.testing import CliRunner

from ..algebra import DensityMatrix
from ..cli import main as kmsorder_cli
from ..correlations import (
    DiscreteModeSet,
    SpectralModel,
)
from . import (
    PACKAGE,
    make_protocol,
    sgr_re,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


@pytest.fixture
def random_state(rng):
    """Factory for random full-rank states, Bloch radius strictly inside the ball."""
    def random_state(max_radius: float = 0.95) -> DensityMatrix:
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        return DensityMatrix.from_bloch(max_radius * rng.uniform(0.05, 1.0) * direction)
    return random_state


@pytest.fixture
def random_hermitian(rng):
    def random_hermitian() -> np.ndarray:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        return 0.5 * (m + m.conj().T)
    return random_hermitian


@pytest.fixture
def default_model():
    return SpectralModel.accelerated_massless_3p1(beta=1.0, lambda_uv=5.0)


@pytest.fixture
def two_modes():
    return DiscreteModeSet(((2.0, 0.5), (3.0, 0.4)), 1.0)


@pytest.fixture
def default_protocol():
    return make_protocol()


@pytest.fixture
def coherent_state():
    """A state with coherence in the σ_z basis, so [σ_z, ρ] ≠ 0."""
    return DensityMatrix.from_bloch((0.6, 0.0, 0.0))


@pytest.fixture
def run_kmsorder(caplog, monkeypatch, tmp_path):
    def run_kmsorder(
        *args: Union[List, Tuple],
        config: Optional[str] = None,
        files: Optional[Mapping[str, str]] = None,
        env: Optional[Mapping[str, str]] = None,
        monkeypatch_injector: Callable[[Any], None] = lambda _: None,
    ):
        runner = CliRunner(env=env)
        rundir = tmp_path / "rundir"
        rundir.mkdir(parents=True, exist_ok=True)
        with monkeypatch.context() as dir_ctx:
            dir_ctx.chdir(rundir)
            dir_ctx.delenv("GITHUB_JOB", raising=False)
            dir_ctx.delenv("KMSORDER_WORKERS", raising=False)
            files = dict(files or {})
            if config is not None:
                files["kmsorder-config.yaml"] = config
            for fname, content in files.items():
                (rundir / fname).parent.mkdir(parents=True, exist_ok=True)
                (rundir / fname).write_text(content)

            for arg in args:
                orig_main = kmsorder_cli.main

                @wraps(orig_main)
                def mock_main(*args, **kwargs):
                    with monkeypatch.context() as m:
                        # Ensure pytest can capture our logging
                        m.setattr(click_log, "basic_config", lambda: logging.getLogger())
                        m.setattr(logging.getLogger(PACKAGE), "setLevel", lambda _: None)
                        monkeypatch_injector(m)
                        return orig_main(*args, **kwargs)

                with monkeypatch.context() as call_ctx:
                    call_ctx.setattr(kmsorder_cli, "main", mock_main)
                    result = runner.invoke(kmsorder_cli, [str(a) for a in arg], standalone_mode=False)

                if result.output:
                    print(result.output, end='')

                if result.exception is not None and not isinstance(result.exception, (SystemExit, ClickException)):
                    raise result.exception
                if isinstance(result.exception, ClickException):
                    result.exit_code = result.exception.exit_code
                    print(result.exception.format_message(), file=sys.stderr)

                result.rundir = rundir
                result.logs = tuple(
                    (rec.levelno, sgr_re.sub("", rec.getMessage())) for rec in caplog.records if rec.name == PACKAGE or rec.name.startswith(f"{PACKAGE}.")
                )
                yield result

                if result.exit_code != 0:
                    return

    caplog.set_level("DEBUG", logger=PACKAGE)
    return run_kmsorder

