# Copyright 2026 The spdevo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the spdevo sampling-based SPDE controller."""

import os as _os
from pathlib import Path as _Path

_bundled = _Path(__file__).with_name("configs")
if _bundled.is_dir():
    _os.environ.setdefault("SPDEVO_CONFIG_DIR", str(_bundled))

from ._core import *  # noqa: E402,F401,F403
from ._core import __doc__  # noqa: E402,F401

__version__ = "0.1.0"
