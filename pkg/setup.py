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

from pathlib import Path
import re
from setuptools import setup

long_description = (Path(__file__).parent / "README.rst").read_text(encoding="UTF-8")

# Remove directives
description = re.sub(r'^[ \t]*\.\.(?:[ \t]+[^\n]*)?\n(?:[ \t]+[^\n]*\n)*', r'', long_description, flags=re.DOTALL|re.MULTILINE)
description = description.strip()
# Skip the title and its underline
description = re.sub(r'^[^\n]*\n[=]+\n+', r'', description)
# Extract first paragraph
description = re.sub(r'\n\n.*', r'', description, flags=re.DOTALL|re.MULTILINE)
# Eliminate emphasis annotation
description = re.sub(r'\*\*(.*?)\*\*', r'\1', description)
# Convert line breaks into spaces
description = description.replace('\n', ' ')

setup(
    name='kmsorder',
    author='The kmsorder authors',
    description=description,
    long_description=long_description,
    long_description_content_type='text/x-rst',
    packages=(
        'kmsorder',
        'kmsorder.cli',
    ),
    python_requires='>=3.7',
    install_requires=(
      'Click>=7.0,<9',
      'click-log',
      'importlib_metadata >= 3.6; python_version < "3.8"',
      'numpy>=1.17',
      'PyYAML',
      'scipy>=1.4',
      'typeguard>=2.10,<5',
    ),
    entry_points='''
      [console_scripts]
      kmsorder=kmsorder.cli:main
    ''',
    zip_safe=True,
    classifiers=(
      'License :: OSI Approved :: Apache Software License',
      'Topic :: Scientific/Engineering :: Physics',
    ),
    license='Apache License 2.0',
)
