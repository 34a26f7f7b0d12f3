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
import os
from pathlib import Path
from typing import Optional

import click
import click_log

from ..config_reader import (
    DEFAULT_CONFIG_FILE,
    RunConfig,
)
from ..report import package_version

PACKAGE : str = __package__.split('.')[0]

log = logging.getLogger(__name__)


class RunOptions(object):
    """
    Group options shared by every command.

    An unreadable ``--config`` is not an error until a command asks for the file, so ``--help`` and ``--version`` keep
    working.
    """

    def __init__(self, *, out: Optional[Path], workers: Optional[int], tolerance_scale: float):
        self.out = out
        self.workers = workers
        self.tolerance_scale = tolerance_scale
        self.config: Optional[RunConfig] = None
        self._config_file: Optional[Path] = None
        self._config_error: Optional[click.BadParameter] = None

    @property
    def config_file(self) -> Optional[Path]:
        if self._config_error is not None:
            raise self._config_error
        return self._config_file

    @config_file.setter
    def config_file(self, path: Optional[Path]) -> None:
        self._config_file = path
        self._config_error = None

    def defer_config_error(self, error: click.BadParameter) -> None:
        self._config_error = error


class GitHubLogFormatter(logging.Formatter):
    """Turns records into workflow commands, so warnings and errors show up as annotations titled by their module."""

    commands = (
        (logging.ERROR  , "error"  ),
        (logging.WARNING, "warning"),
        (logging.INFO   , "notice" ),
        (logging.DEBUG  , "debug"  ),
    )

    def __init__(self):
        super().__init__("%(message)s", style="%")

    def format(self, record):
        msg = super().format(record)
        command = next((name for level, name in self.commands if record.levelno >= level), None)
        if command is None:
            return msg

        # only these characters need escaping in workflow command data
        msg = msg.replace("%", "%25").replace("\n", "%0A").replace("\r", "%0D")
        if command == "debug":
            return f"::debug::{msg}"
        return f"::{command} title={record.name}::{msg}"


def on_github_actions():
    return os.environ.get("CI") == "true" and os.environ.get("GITHUB_JOB")


def default_verbosity():
    return "DEBUG" if on_github_actions() and os.environ.get("RUNNER_DEBUG") == "1" else "INFO"


def _colour_preference(color: str) -> Optional[bool]:
    if color != 'auto':
        return color == 'always'
    # http://bixense.com/clicolors/
    if os.environ.get("CLICOLOR_FORCE", "0") != "0":
        return True
    if os.environ.get("CLICOLOR", "1") == "0":
        return False
    return None


@click.group(context_settings=dict(help_option_names=('-h', '--help')))
@click.option('--color'          , type=click.Choice(('always', 'auto', 'never'))                                                  , default='auto'      , show_default=True)  # noqa: E501
@click.option('--config'         , type=click.Path(exists=False, file_okay=True , dir_okay=False, readable=True, resolve_path=True), default=None        , show_default=f"./{DEFAULT_CONFIG_FILE}")  # noqa: E501
@click.option('--out'            , type=click.Path(exists=False, file_okay=False, dir_okay=True)                                   , default=None        , help='Output directory; overrides `output.directory`.')  # noqa: E501
@click.option('--workers'        , type=click.IntRange(min=1)                                                                      , default=None        , help='Concurrent sweep points; overrides `workers` and $KMSORDER_WORKERS.')  # noqa: E501
@click.option('--tolerance-scale', type=float                                                                                      , default=1.0         , show_default=True, help='Multiplies every declared tolerance.')  # noqa: E501
@click.version_option(package_version())
@click_log.simple_verbosity_option(PACKAGE, envvar='KMSORDER_VERBOSITY', default=default_verbosity)
@click.pass_context
def main(ctx, color, config, out, workers, tolerance_scale):
    colour = _colour_preference(color)
    if colour is not None:
        ctx.color = colour

    root_logger = click_log.basic_config()
    if on_github_actions():
        root_logger.handlers[0].formatter = GitHubLogFormatter()

    ctx.obj = RunOptions(out=Path(out) if out is not None else None, workers=workers, tolerance_scale=tolerance_scale)

    if config is None:
        default = Path.cwd() / DEFAULT_CONFIG_FILE
        if default.is_file():
            ctx.obj.config_file = default
        else:
            log.debug("no %s in %s; running with the default configuration", DEFAULT_CONFIG_FILE, Path.cwd())
        return

    config = Path(config)
    try:
        # open rather than is_file() so that /dev/null is accepted
        with open(config, 'rb'):
            pass
    except IOError:
        param = next(p for p in ctx.command.params if p.name == 'config')
        ctx.obj.defer_config_error(click.BadParameter(f"File '{config}' does not exist.", ctx=ctx, param=param))
    else:
        ctx.obj.config_file = config
