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
"""Helper functions for validating input arguments."""

import numpy as np

# Tolerance for probability vectors produced inside the library.
SIMPLEX_TOLERANCE = 1e-12


def validate_delta(delta: float, obj_name: str):
    """Helper function to validate a confidence level delta.

  Args:
      delta: The delta value to validate.
      obj_name: name of the object which is validated, used in messages.

  Raises:
      A ValueError if delta is not in the open interval (0, 1).
  """
    if not 0 < delta < 1:
        raise ValueError(
            f"{obj_name}: delta must be in the interval (0, 1), not {delta}.")


def validate_positive(value: float, name: str, obj_name: str):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{obj_name}: {name} must be positive, not {value}.")


def validate_discount(discount: float, obj_name: str):
    if not 0 <= discount < 1:
        raise ValueError(
            f"{obj_name}: discount must be in [0, 1), not {discount}.")


def validate_probability_vector(p: np.ndarray,
                                obj_name: str,
                                tolerance: float = SIMPLEX_TOLERANCE):
    """Checks that every row along the last axis of p lies on the simplex.

  Args:
      p: array whose last axis holds probability vectors.
      obj_name: name of the object which is validated, used in messages.
      tolerance: allowed deviation of row sums from 1 and of entries below 0.

  Raises:
      A ValueError if some entry is negative or not finite, or some row does
      not sum to 1 within tolerance.
  """
    p = np.asarray(p, dtype=float)
    if p.ndim == 0 or p.shape[-1] == 0:
        raise ValueError(f"{obj_name}: probability vectors must be non-empty.")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{obj_name}: probabilities must be finite.")
    if np.any(p < -tolerance):
        raise ValueError(
            f"{obj_name}: probabilities must be non-negative, min entry is "
            f"{p.min()}.")
    deviation = np.max(np.abs(p.sum(axis=-1) - 1))
    if deviation > tolerance:
        raise ValueError(
            f"{obj_name}: probabilities must sum to 1, max deviation is "
            f"{deviation}.")


def validate_shape(array: np.ndarray, shape: tuple, name: str, obj_name: str):
    if array.shape != tuple(shape):
        raise ValueError(f"{obj_name}: {name} must have shape {tuple(shape)}, "
                         f"not {array.shape}.")
