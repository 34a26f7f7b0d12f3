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
Flat-file output: CSV tables, JSON documents, SVG line plots and the per-run ``metadata.json``.

CSV and JSON bodies only ever contain computed values; anything time-dependent goes into the metadata file.
"""

from enum import Enum
import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import (
    Any,
    Iterable,
    Mapping,
    Optional,
    Sequence,
)
from xml.etree import ElementTree as ET

import numpy as np

from .compat import metadata
from .types import PathLike

log = logging.getLogger(__name__)

SVG_NAMESPACE = 'http://www.w3.org/2000/svg'
SVG_WIDTH = 720
SVG_HEIGHT = 440
SVG_MARGIN = 60
SVG_COLOURS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')

PACKAGE: str = __package__.split('.')[0]


class JSONEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, Path):
            return str(o)
        elif isinstance(o, Enum):
            return o.value
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.generic):
            return o.item()
        elif isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


def format_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    count = 0
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row {count} of {path.name} has {len(row)} cells, expected {len(header)}")
            writer.writerow([format_cell(cell) for cell in row])
            count += 1
    log.debug("wrote %d row(s) to %s", count, path)
    return path


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=4, separators=(',', ': '), sort_keys=True, cls=JSONEncoder)


def write_json(path: PathLike, obj: Any) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + '\n', encoding='utf-8')
    log.debug("wrote %s", path)
    return path


def _finite_points(x: Sequence[float], y: Sequence[float]):
    return [(float(a), float(b)) for a, b in zip(x, y) if math.isfinite(a) and math.isfinite(b)]


def write_svg(
    path: PathLike,
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    *,
    title: str = '',
    x_label: str = '',
) -> Path:
    """
    Writes a self-contained line plot with one ``<polyline>`` per entry of ``series``, all sharing a single y axis.

    Non-finite samples are left out of their polyline.
    """
    path = Path(path)
    lines = {label: _finite_points(x, y) for label, y in series.items()}
    xs = [p[0] for points in lines.values() for p in points]
    ys = [p[1] for points in lines.values() for p in points]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y_lo, y_hi = (min(ys + [0.0]), max(ys)) if ys else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    plot_w = SVG_WIDTH - 2 * SVG_MARGIN
    plot_h = SVG_HEIGHT - 2 * SVG_MARGIN

    def to_px(px: float, py: float) -> str:
        sx = SVG_MARGIN + (px - x_lo) / (x_hi - x_lo) * plot_w
        sy = SVG_HEIGHT - SVG_MARGIN - (py - y_lo) / (y_hi - y_lo) * plot_h
        return f"{sx:.2f},{sy:.2f}"

    svg = ET.Element('svg', {
        'xmlns': SVG_NAMESPACE,
        'width': str(SVG_WIDTH),
        'height': str(SVG_HEIGHT),
        'viewBox': f"0 0 {SVG_WIDTH} {SVG_HEIGHT}",
    })
    if title:
        ET.SubElement(svg, 'title').text = title
        ET.SubElement(svg, 'text', {'x': str(SVG_WIDTH // 2), 'y': str(SVG_MARGIN // 2), 'text-anchor': 'middle'}).text = title

    axes = ET.SubElement(svg, 'g', {'stroke': 'black', 'stroke-width': '1'})
    ET.SubElement(axes, 'line', {
        'x1': str(SVG_MARGIN), 'y1': str(SVG_HEIGHT - SVG_MARGIN),
        'x2': str(SVG_WIDTH - SVG_MARGIN), 'y2': str(SVG_HEIGHT - SVG_MARGIN),
    })
    ET.SubElement(axes, 'line', {
        'x1': str(SVG_MARGIN), 'y1': str(SVG_MARGIN),
        'x2': str(SVG_MARGIN), 'y2': str(SVG_HEIGHT - SVG_MARGIN),
    })
    for text, (tx, ty), anchor in (
        (f"{x_lo:.3g}", (SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN + 16), 'middle'),
        (f"{x_hi:.3g}", (SVG_WIDTH - SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN + 16), 'middle'),
        (f"{y_lo:.3g}", (SVG_MARGIN - 6, SVG_HEIGHT - SVG_MARGIN), 'end'),
        (f"{y_hi:.3g}", (SVG_MARGIN - 6, SVG_MARGIN + 4), 'end'),
        (x_label, (SVG_WIDTH // 2, SVG_HEIGHT - SVG_MARGIN // 3), 'middle'),
    ):
        if text:
            ET.SubElement(svg, 'text', {'x': str(tx), 'y': str(ty), 'text-anchor': anchor, 'font-size': '12'}).text = text

    for idx, (label, points) in enumerate(lines.items()):
        colour = SVG_COLOURS[idx % len(SVG_COLOURS)]
        ET.SubElement(svg, 'polyline', {
            'points': ' '.join(to_px(px, py) for px, py in points),
            'fill': 'none',
            'stroke': colour,
            'stroke-width': '1.5',
            'data-series': label,
        })
        legend_y = SVG_MARGIN + 16 * idx
        ET.SubElement(svg, 'text', {
            'x': str(SVG_WIDTH - SVG_MARGIN - 4), 'y': str(legend_y), 'fill': colour,
            'text-anchor': 'end', 'font-size': '12',
        }).text = label

    ET.ElementTree(svg).write(path, encoding='utf-8', xml_declaration=True)
    log.debug("wrote %s with %d series", path, len(lines))
    return path


def config_digest(config_file: Optional[PathLike], config: Mapping[str, Any]) -> str:
    """SHA-256 of the configuration file as read, or of the defaulted configuration when there is no file."""
    digest = hashlib.sha256()
    if config_file is not None:
        with open(config_file, 'rb') as f:
            digest.update(f.read())
    else:
        digest.update(dumps(config).encode('utf-8'))
    return digest.hexdigest()


def package_version() -> str:
    try:
        return metadata.version(PACKAGE)
    except metadata.PackageNotFoundError:
        return 'unknown'


def write_metadata(
    directory: PathLike,
    *,
    command: str,
    config_file: Optional[PathLike],
    config: Mapping[str, Any],
    wall_time: float,
    outputs: Sequence[PathLike],
    extra: Optional[Mapping[str, Any]] = None,
) -> Path:
    document = {
        'command': command,
        'config_file': str(config_file) if config_file is not None else None,
        'config_sha256': config_digest(config_file, config),
        'version': package_version(),
        'wall_time': wall_time,
        'outputs': sorted(Path(p).name for p in outputs),
    }
    if extra:
        document.update(extra)
    return write_json(Path(directory) / 'metadata.json', document)
