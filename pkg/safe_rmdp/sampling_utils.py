# Copyright 2022 OpenMined.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Deterministic seed derivation.

Every random stream in the library is a numpy Generator seeded from a tuple
of identifiers, e.g. (master_seed, s, a) for posterior sampling of one
state-action pair. Seeds don't depend on the process or on the order in which
streams are created, so results are reproducible under parallel execution.
"""

import hashlib

import numpy as np


def _compute_64bit_hash(v) -> int:
    m = hashlib.sha1()
    m.update(repr(v).encode())
    return int(m.hexdigest()[:16], 16)


def derive_seed(*parts) -> int:
    """Returns a 64-bit seed which is a deterministic function of parts.

    Parts are converted with int()/str() so that numpy scalars and Python
    scalars with the same value give the same seed.
    """
    normalized = tuple(
        int(p) if isinstance(p, (int, np.integer)) else str(p) for p in parts)
    return _compute_64bit_hash(normalized)


def make_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
