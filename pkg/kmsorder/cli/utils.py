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


from concurrent.futures import ThreadPoolExecutor
import logging
import os
from pathlib import Path
import time
from typing import (
    Any,
    Callable,
    Iterable,
    List,
    Optional,
    Sequence,
    TypeVar,
)

import click

from ..config_reader import (
    RunConfig,
    load_config,
    read as read_config,
)
from ..errors import (
    ConfigurationError,
    ToleranceExceededError,
)
from ..report import write_metadata

log = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def load_run_config(ctx: click.Context) -> RunConfig:
    """
    Reads the configuration named by the group options, falling back to the defaults when there is no file, and applies
    the command-line overrides.
    """
    if ctx.obj.config is not None:
        return ctx.obj.config

    config_file = ctx.obj.config_file
    cfg = load_config(None) if config_file is None else read_config(config_file)
    if ctx.obj.tolerance_scale != 1.0:
        cfg = cfg.scaled(ctx.obj.tolerance_scale)
    if ctx.obj.workers is not None:
        cfg = cfg._replace(workers=ctx.obj.workers)
    ctx.obj.config = cfg
    return cfg


def output_directory(ctx: click.Context, cfg: RunConfig) -> Path:
    out = ctx.obj.out if ctx.obj.out is not None else Path(cfg.output['directory'])
    out = Path.cwd() / out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory '{out}': {exc.strerror}", file=cfg.file, field='output.directory') from exc
    if not os.access(out, os.W_OK):
        raise ConfigurationError(f"output directory '{out}' is not writable", file=cfg.file, field='output.directory')
    return out


def run_ordered(func: Callable[[T], R], items: Iterable[T], workers: int) -> List[R]:
    """Runs ``func`` over ``items`` on up to ``workers`` threads; results keep the order of ``items``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


class CommandRun(object):
    """Times a command and records its ``metadata.json`` once the outputs are written."""

    def __init__(self, command: str, cfg: RunConfig, directory: Path):
        self.command = command
        self.cfg = cfg
        self.directory = directory
        self.outputs: List[Path] = []
        self.extra: dict = {}
        self.started = time.perf_counter()
        log.info("running %s", click.style(command, fg='blue'))

    def add(self, path: Path) -> Path:
        self.outputs.append(path)
        return path

    def finish(self, breaches: int = 0) -> None:
        write_metadata(
            self.directory,
            command=self.command,
            config_file=self.cfg.file,
            config=self.cfg.as_dict(),
            wall_time=time.perf_counter() - self.started,
            outputs=self.outputs,
            extra=dict(self.extra, breaches=breaches),
        )
        for path in self.outputs:
            log.info("wrote %s", path)
        if breaches:
            log.error("%s", click.style(f"{self.command}: {breaches} tolerance breach(es)", fg='red'))
            raise ToleranceExceededError(self.command, breaches)


def sweep_header(cfg: RunConfig) -> Sequence[str]:
    axis = cfg.sweep['axis']
    return (axis,) if axis is not None and cfg.sweep['values'] else ()


def sweep_cells(cfg: RunConfig, value: Optional[float]) -> Sequence[Any]:
    return (value,) if sweep_header(cfg) else ()

