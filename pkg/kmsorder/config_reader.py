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
Reading and validating ``kmsorder-config.yaml``.

Every section has defaults, so an empty file (or ``/dev/null``) is a complete configuration. Values are checked with
typeguard and converted into plain Python containers; the builder functions at the bottom turn sections into engine
objects.
"""

from collections import OrderedDict
import copy
import io
import math
import os
import typing
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import yaml

from .algebra import (
    DensityMatrix,
    Observable,
)
from .compat import check_type
from .correlations import (
    DiscreteModeSet,
    ModelTag,
    SpectralModel,
    fit_discrete_modes,
)
from .errors import (
    ClickException,
    ConfigurationError,
)
from .oracle import (
    EvolutionSpec,
    TruncatedField,
)
from .switching import (
    Leg,
    Protocol,
    SwitchingFunction,
    SwitchingShape,
)
from .types import PathLike

__all__ = (
    'DEFAULT_CONFIG_FILE',
    'RunConfig',
    'read',
)

DEFAULT_CONFIG_FILE = 'kmsorder-config.yaml'
WORKERS_ENVIRONMENT_VARIABLE = 'KMSORDER_WORKERS'

Real = Union[int, float]

DEFAULT_MODES = ({'frequency': 2.0, 'weight': 0.5}, {'frequency': 3.0, 'weight': 0.4})

SWEEP_AXES = ('beta', 'acceleration', 'lambda_uv', 'lambda', 'gap', 'half_width')


class OrderedLoader(yaml.SafeLoader):
    pass


def __yaml_construct_mapping(loader, node):
    loader.flatten_mapping(node)
    d = OrderedDict()
    for key, value in loader.construct_pairs(node):
        if key in d:
            raise ConfigurationError(f"Duplicate entry for key {key!r} in a mapping is not permitted")
        d[key] = value
    return d


OrderedLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, __yaml_construct_mapping)


def _leg_default(observable: str, center: float) -> Dict[str, Any]:
    return OrderedDict((
        ('observable', observable),
        ('shape', SwitchingShape.cosine_bump.value),
        ('center', center),
        ('half_width', 1.0),
        ('amplitude', 1.0),
    ))


Grid = Union[Sequence[Real], Mapping[str, Real]]

# section -> field -> {'type', 'default'}; a default of None marks an optional field
_SECTIONS = OrderedDict((
    ('model', OrderedDict((
        ('tag',          {'type': str,                          'default': ModelTag.accelerated_massless_3p1.value}),
        ('beta',         {'type': Optional[Real],               'default': None}),
        ('acceleration', {'type': Optional[Real],               'default': None}),
        ('lambda_uv',    {'type': Real,                         'default': 5.0}),
        ('modes',        {'type': Sequence[Mapping[str, Real]], 'default': DEFAULT_MODES}),
    ))),
    ('protocol', OrderedDict((
        ('first',         {'type': Mapping[str, Any],              'default': _leg_default('X', -1.5)}),
        ('second',        {'type': Mapping[str, Any],              'default': _leg_default('Y', 1.5)}),
        ('lambda',        {'type': Real,                           'default': 0.05}),
        ('lambda_grid',   {'type': Grid,                           'default': {'start': 0.01, 'stop': 0.3, 'count': 8}}),
        ('initial_state', {'type': Union[str, Sequence[Real]],     'default': [0.6, 0.0, 0.0]}),
    ))),
    ('sweep', OrderedDict((
        ('axis',   {'type': Optional[str],  'default': None}),
        ('values', {'type': Sequence[Real], 'default': ()}),
    ))),
    ('geometry', OrderedDict((
        ('s_values', {'type': Grid, 'default': {'start': 0.0, 'stop': 5.0, 'step': 0.1}}),
        ('theta',    {'type': Real, 'default': 1e-3}),
    ))),
    ('oracle', OrderedDict((
        ('n_max',             {'type': int,                                    'default': 10}),
        ('n_max_check',       {'type': Optional[int],                          'default': None}),
        ('step',              {'type': Real,                                   'default': 0.005}),
        ('order',             {'type': int,                                    'default': 4}),
        ('modes',             {'type': Optional[Sequence[Mapping[str, Real]]], 'default': None}),
        ('mode_count',        {'type': int,                                    'default': 2}),
        ('leakage_threshold', {'type': Real,                                   'default': 1e-6}),
        ('drift_tolerance',   {'type': Real,                                   'default': 1e-9}),
        ('step_tolerance',    {'type': Real,                                   'default': 1e-8}),
    ))),
    ('kms', OrderedDict((
        ('times',       {'type': Grid, 'default': {'start': -3.0, 'stop': 3.0, 'count': 13}}),
        ('frequencies', {'type': Grid, 'default': {'start': 0.05, 'stop': 10.0, 'count': 200}}),
    ))),
    ('tolerances', OrderedDict((
        ('agreement',        {'type': Real, 'default': 1e-6}),
        ('quadrature',       {'type': Real, 'default': 1e-9}),
        ('kms_continuum',    {'type': Real, 'default': 1e-6}),
        ('kms_discrete',     {'type': Real, 'default': 1e-10}),
        ('detailed_balance', {'type': Real, 'default': 1e-12}),
        ('metric',           {'type': Real, 'default': 1e-5}),
        ('entropy',          {'type': Real, 'default': 1e-12}),
        ('slope',            {'type': Real, 'default': 2.8}),
        ('r_squared',        {'type': Real, 'default': 0.99}),
        ('slope_shift',      {'type': Real, 'default': 0.05}),
    ))),
    ('output', OrderedDict((
        ('directory', {'type': str,  'default': 'kmsorder-output'}),
        ('plot',      {'type': bool, 'default': True}),
    ))),
))

# thresholds that a run must reach rather than stay under; never scaled
_LOWER_BOUNDS = frozenset({'slope', 'r_squared'})


def _plain(value):
    if isinstance(value, Mapping):
        return OrderedDict((k, _plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


class RunConfig(NamedTuple):
    model: Mapping[str, Any]
    protocol: Mapping[str, Any]
    sweep: Mapping[str, Any]
    geometry: Mapping[str, Any]
    oracle: Mapping[str, Any]
    kms: Mapping[str, Any]
    tolerances: Mapping[str, float]
    output: Mapping[str, Any]
    seed: int
    workers: int
    file: Optional[str] = None

    def as_dict(self) -> Dict[str, Any]:
        d = OrderedDict((name, _plain(getattr(self, name))) for name in self._fields if name != 'file')
        return d

    def scaled(self, factor: float) -> "RunConfig":
        """Multiplies every upper-bound tolerance by ``factor``."""
        if not factor > 0:
            raise ConfigurationError(f"tolerance scale must be positive, got {factor!r}", file=self.file)
        tolerances = OrderedDict(
            (name, value if name in _LOWER_BOUNDS else value * factor) for name, value in self.tolerances.items()
        )
        return self._replace(tolerances=tolerances)


def _check_section(name: str, section: Any, file: Optional[str]) -> Dict[str, Any]:
    if section is None:
        section = OrderedDict()
    if not isinstance(section, Mapping):
        raise ConfigurationError(f"doesn't contain a mapping but a {type(section).__name__}", file=file, field=name)
    fields = _SECTIONS[name]
    unknown = [key for key in section if key not in fields]
    if unknown:
        raise ConfigurationError(
            f"contains unknown field(s) {', '.join(map(repr, unknown))}; expected one of {', '.join(fields)}",
            file=file, field=name,
        )
    result = OrderedDict()
    for field, argument_spec in fields.items():
        value = section.get(field, copy.deepcopy(argument_spec['default']))
        try:
            check_type(f"{name}.{field}", value, argument_spec['type'])
        except TypeError as exc:
            raise ConfigurationError(f"has an invalid value {value!r}: {exc}", file=file, field=f"{name}.{field}") from exc
        result[field] = value
    return result


def _real(value: Any, field: str, file: Optional[str], *, positive: bool = False, non_negative: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"must be a number, got {value!r}", file=file, field=field)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"must be finite, got {value!r}", file=file, field=field)
    if positive and not value > 0:
        raise ConfigurationError(f"must be positive, got {value!r}", file=file, field=field)
    if non_negative and value < 0:
        raise ConfigurationError(f"must not be negative, got {value!r}", file=file, field=field)
    return value


def _grid(value: Any, field: str, file: Optional[str], *, geometric: bool = False) -> List[float]:
    """A grid is either an explicit list or ``{start, stop, count}`` / ``{start, stop, step}`` (stop inclusive)."""
    if not isinstance(value, Mapping):
        return [_real(v, f"{field}[{idx}]", file) for idx, v in enumerate(value)]

    keys = set(value)
    if keys not in ({'start', 'stop', 'count'}, {'start', 'stop', 'step'}):
        raise ConfigurationError("must be a list or a mapping with start, stop and either count or step", file=file, field=field)
    start = _real(value['start'], f"{field}.start", file)
    stop = _real(value['stop'], f"{field}.stop", file)
    if 'count' in value:
        count = value['count']
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigurationError(f"must be a positive integer, got {count!r}", file=file, field=f"{field}.count")
    else:
        step = _real(value['step'], f"{field}.step", file, positive=True)
        count = int(round((stop - start) / step)) + 1
        if count < 1:
            raise ConfigurationError("has stop before start", file=file, field=field)
        return [start + idx * step for idx in range(count)]
    if geometric:
        if not (start > 0 and stop > 0):
            raise ConfigurationError("geometric grid bounds must be positive", file=file, field=field)
        return np.geomspace(start, stop, count).tolist()
    return np.linspace(start, stop, count).tolist()


def _modes(value: Sequence[Mapping[str, Any]], field: str, file: Optional[str]) -> List[Dict[str, float]]:
    modes = []
    for idx, mode in enumerate(value):
        if set(mode) != {'frequency', 'weight'}:
            raise ConfigurationError("must have exactly the fields frequency and weight", file=file, field=f"{field}[{idx}]")
        modes.append(OrderedDict((
            ('frequency', _real(mode['frequency'], f"{field}[{idx}].frequency", file, positive=True)),
            ('weight', _real(mode['weight'], f"{field}[{idx}].weight", file)),
        )))
    if not modes:
        raise ConfigurationError("must contain at least one mode", file=file, field=field)
    return modes


def _observable(value: Any, field: str, file: Optional[str]):
    if isinstance(value, str):
        if value not in ('X', 'Y', 'Z', 'I'):
            raise ConfigurationError(f"must be one of X, Y, Z, I or a Bloch list, got {value!r}", file=file, field=field)
        return value
    if isinstance(value, (list, tuple)) and len(value) in (3, 4):
        return [_real(v, f"{field}[{idx}]", file) for idx, v in enumerate(value)]
    raise ConfigurationError(f"must be one of X, Y, Z, I or a list [c0, cx, cy, cz], got {value!r}", file=file, field=field)


def _leg(value: Mapping[str, Any], field: str, file: Optional[str]) -> Dict[str, Any]:
    defaults = _leg_default('X', 0.0)
    unknown = [key for key in value if key not in defaults]
    if unknown:
        raise ConfigurationError(f"contains unknown field(s) {', '.join(map(repr, unknown))}", file=file, field=field)
    leg = OrderedDict()
    leg['observable'] = _observable(value.get('observable', defaults['observable']), f"{field}.observable", file)
    shape = value.get('shape', defaults['shape'])
    if shape not in {s.value for s in SwitchingShape}:
        raise ConfigurationError(
            f"must be one of {', '.join(s.value for s in SwitchingShape)}, got {shape!r}", file=file, field=f"{field}.shape")
    leg['shape'] = shape
    if 'center' not in value:
        raise ConfigurationError("is required", file=file, field=f"{field}.center")
    leg['center'] = _real(value['center'], f"{field}.center", file)
    leg['half_width'] = _real(value.get('half_width', defaults['half_width']), f"{field}.half_width", file, positive=True)
    leg['amplitude'] = _real(value.get('amplitude', defaults['amplitude']), f"{field}.amplitude", file, non_negative=True)
    return leg


def _default_workers() -> int:
    value = os.environ.get(WORKERS_ENVIRONMENT_VARIABLE)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ConfigurationError(f"environment variable {WORKERS_ENVIRONMENT_VARIABLE} must be an integer, got {value!r}") from None
    return max(1, workers)


def load_config(cfg: Any, file: Optional[str] = None) -> RunConfig:
    """Validates a parsed configuration mapping and fills in every default."""
    if cfg is None:
        cfg = OrderedDict()
    if not isinstance(cfg, Mapping):
        raise ConfigurationError(f"top level configuration should be a map, but is a {type(cfg).__name__}", file=file)
    known = set(_SECTIONS) | {'seed', 'workers'}
    unknown = [key for key in cfg if key not in known]
    if unknown:
        raise ConfigurationError(f"unknown top level section(s) {', '.join(map(repr, unknown))}", file=file)

    sections = {name: _check_section(name, cfg.get(name), file) for name in _SECTIONS}

    model = sections['model']
    try:
        tag = ModelTag(model['tag'])
    except ValueError:
        tag = None
    if tag is None or tag == ModelTag.custom:
        raise ConfigurationError(
            f"must be one of accelerated_massless_3p1, flat_ohmic, discrete_modes, got {model['tag']!r}", file=file, field='model.tag')
    if model['beta'] is not None and model['acceleration'] is not None:
        raise ConfigurationError("may not be combined with `model.acceleration`", file=file, field='model.beta')
    if model['beta'] is not None:
        model['beta'] = _real(model['beta'], 'model.beta', file, positive=True)
    elif model['acceleration'] is not None:
        model['acceleration'] = _real(model['acceleration'], 'model.acceleration', file, positive=True)
    else:
        model['beta'] = 1.0
    model['lambda_uv'] = _real(model['lambda_uv'], 'model.lambda_uv', file, positive=True)
    model['modes'] = _modes(model['modes'], 'model.modes', file)

    protocol = sections['protocol']
    protocol['first'] = _leg(protocol['first'], 'protocol.first', file)
    protocol['second'] = _leg(protocol['second'], 'protocol.second', file)
    protocol['lambda'] = _real(protocol['lambda'], 'protocol.lambda', file, non_negative=True)
    protocol['lambda_grid'] = _grid(protocol['lambda_grid'], 'protocol.lambda_grid', file, geometric=True)
    state = protocol['initial_state']
    if isinstance(state, str):
        if state != 'random':
            raise ConfigurationError(f"must be a Bloch vector or 'random', got {state!r}", file=file, field='protocol.initial_state')
    else:
        if len(state) != 3:
            raise ConfigurationError("must be a Bloch vector [rx, ry, rz]", file=file, field='protocol.initial_state')
        state = [_real(v, f"protocol.initial_state[{idx}]", file) for idx, v in enumerate(state)]
        if math.fsum(v * v for v in state) > 1 + 1e-12:
            raise ConfigurationError("lies outside the Bloch ball", file=file, field='protocol.initial_state')
    protocol['initial_state'] = state

    sweep = sections['sweep']
    if sweep['axis'] is not None and sweep['axis'] not in SWEEP_AXES:
        raise ConfigurationError(f"must be one of {', '.join(SWEEP_AXES)}, got {sweep['axis']!r}", file=file, field='sweep.axis')
    sweep['values'] = [_real(v, f"sweep.values[{idx}]", file) for idx, v in enumerate(sweep['values'])]
    if sweep['values'] and sweep['axis'] is None:
        raise ConfigurationError("sweep values given without an axis", file=file, field='sweep.axis')

    geometry = sections['geometry']
    geometry['s_values'] = _grid(geometry['s_values'], 'geometry.s_values', file)
    if not geometry['s_values']:
        raise ConfigurationError("must not be empty", file=file, field='geometry.s_values')
    for idx, s in enumerate(geometry['s_values']):
        _real(s, f"geometry.s_values[{idx}]", file, non_negative=True)
    geometry['theta'] = _real(geometry['theta'], 'geometry.theta', file, positive=True)

    oracle = sections['oracle']
    if oracle['n_max'] < 1:
        raise ConfigurationError(f"must be at least 1, got {oracle['n_max']}", file=file, field='oracle.n_max')
    if isinstance(oracle['mode_count'], bool) or oracle['mode_count'] < 1:
        raise ConfigurationError(f"must be a positive integer, got {oracle['mode_count']!r}", file=file, field='oracle.mode_count')
    for name in ('step', 'leakage_threshold', 'drift_tolerance', 'step_tolerance'):
        oracle[name] = _real(oracle[name], f"oracle.{name}", file, positive=True)
    if oracle['modes'] is not None:
        oracle['modes'] = _modes(oracle['modes'], 'oracle.modes', file)

    kms = sections['kms']
    kms['times'] = _grid(kms['times'], 'kms.times', file)
    kms['frequencies'] = _grid(kms['frequencies'], 'kms.frequencies', file)
    if any(omega <= 0 for omega in kms['frequencies']):
        raise ConfigurationError("must contain positive frequencies only", file=file, field='kms.frequencies')

    tolerances = sections['tolerances']
    for name in tolerances:
        tolerances[name] = _real(tolerances[name], f"tolerances.{name}", file, positive=True)

    seed = cfg.get('seed', 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigurationError(f"must be an integer, got {seed!r}", file=file, field='seed')
    workers = cfg.get('workers', None)
    if workers is None:
        workers = _default_workers()
    elif isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigurationError(f"must be a positive integer, got {workers!r}", file=file, field='workers')

    return RunConfig(file=file, seed=seed, workers=workers, **sections)


def read(config: Union[PathLike, typing.TextIO]) -> RunConfig:
    if isinstance(config, io.TextIOBase):
        f = config
        config = getattr(f, 'name', None)
        file_close = False
    else:
        f = open(config, 'r')
        file_close = True

    name = str(config) if config is not None else None
    try:
        try:
            cfg = yaml.load(f, OrderedLoader)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
            raise ConfigurationError(f"invalid YAML{where}: {exc.problem or exc.context}", file=name) from exc
        except ConfigurationError as exc:
            exc.file = name
            raise
    finally:
        if file_close:
            f.close()

    return load_config(cfg, name)


def model_from_config(cfg: RunConfig) -> SpectralModel:
    model = cfg.model
    tag = ModelTag(model['tag'])
    try:
        if tag == ModelTag.discrete_modes:
            return SpectralModel.discrete(modes_from_config(model['modes'], _beta(model)))
        if tag == ModelTag.flat_ohmic:
            return SpectralModel.flat_ohmic(_beta(model), model['lambda_uv'])
        return SpectralModel.accelerated_massless_3p1(
            acceleration=model['acceleration'], beta=model['beta'], lambda_uv=model['lambda_uv'])
    except ClickException as exc:
        raise ConfigurationError(exc.format_message(), file=cfg.file, field='model') from exc


def _beta(model: Mapping[str, Any]) -> float:
    if model['beta'] is not None:
        return model['beta']
    return 2 * math.pi / model['acceleration']


def modes_from_config(modes: Sequence[Mapping[str, float]], beta: float) -> DiscreteModeSet:
    return DiscreteModeSet(((mode['frequency'], mode['weight']) for mode in modes), beta)


def observable_from_config(value) -> Observable:
    if isinstance(value, str):
        return Observable.pauli(value)
    if len(value) == 3:
        return Observable.from_bloch(0.0, value)
    return Observable.from_bloch(value[0], value[1:])


def switching_from_config(leg: Mapping[str, Any]) -> SwitchingFunction:
    return SwitchingFunction.create(leg['shape'], leg['center'], leg['half_width'], leg['amplitude'])


def protocol_from_config(cfg: RunConfig, coupling: Optional[float] = None) -> Protocol:
    p = cfg.protocol
    legs = [Leg(observable_from_config(p[name]['observable']), switching_from_config(p[name])) for name in ('first', 'second')]
    return Protocol(legs[0], legs[1], p['lambda'] if coupling is None else coupling)


def initial_state_from_config(cfg: RunConfig) -> DensityMatrix:
    state = cfg.protocol['initial_state']
    if state == 'random':
        rng = np.random.default_rng(cfg.seed)
        direction = rng.normal(size=3)
        state = 0.9 * rng.uniform() ** (1 / 3) * direction / np.linalg.norm(direction)
    return DensityMatrix.from_bloch(state)


def oracle_modes_from_config(cfg: RunConfig) -> DiscreteModeSet:
    """
    The modes the oracle simulates: ``oracle.modes`` when given, the model's own modes for a discrete model, and otherwise
    ``oracle.mode_count`` modes fitted to the configured continuum spectrum.
    """
    if cfg.oracle['modes'] is not None:
        return modes_from_config(cfg.oracle['modes'], _beta(cfg.model))
    model = model_from_config(cfg)
    if model.is_discrete:
        return model.modes
    return fit_discrete_modes(model, cfg.oracle['mode_count']).modes


def field_from_config(cfg: RunConfig, n_max: Optional[int] = None) -> TruncatedField:
    return TruncatedField(oracle_modes_from_config(cfg), cfg.oracle['n_max'] if n_max is None else n_max)


def evolution_spec_from_config(cfg: RunConfig) -> EvolutionSpec:
    o = cfg.oracle
    return EvolutionSpec(
        step=o['step'],
        order=o['order'],
        couplings=tuple(cfg.protocol['lambda_grid']),
        leakage_threshold=o['leakage_threshold'],
        drift_tolerance=o['drift_tolerance'],
        step_tolerance=o['step_tolerance'],
    )


def apply_sweep(cfg: RunConfig, value: float) -> RunConfig:
    """A copy of ``cfg`` with the sweep axis set to ``value``."""
    axis = cfg.sweep['axis']
    model = copy.deepcopy(cfg.model)
    protocol = copy.deepcopy(cfg.protocol)
    if axis == 'beta':
        model['beta'], model['acceleration'] = value, None
    elif axis == 'acceleration':
        model['beta'], model['acceleration'] = None, value
    elif axis == 'lambda_uv':
        model['lambda_uv'] = value
    elif axis == 'lambda':
        protocol['lambda'] = value
    elif axis in ('gap', 'half_width'):
        first, second = protocol['first'], protocol['second']
        direction = 1.0 if second['center'] >= first['center'] else -1.0
        gap = abs(second['center'] - first['center']) - first['half_width'] - second['half_width']
        if axis == 'gap':
            gap = value
        else:
            first['half_width'] = second['half_width'] = value
        second['center'] = first['center'] + direction * (first['half_width'] + gap + second['half_width'])
    else:
        raise ConfigurationError(f"cannot sweep unknown axis {axis!r}", file=cfg.file, field='sweep.axis')
    return cfg._replace(model=model, protocol=protocol)


def sweep_points(cfg: RunConfig) -> List[Tuple[Optional[float], RunConfig]]:
    """The configurations to run, in sweep order; an empty sweep is a single point."""
    if not cfg.sweep['values']:
        return [(None, cfg)]
    return [(value, apply_sweep(cfg, value)) for value in cfg.sweep['values']]
