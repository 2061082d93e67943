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
"""Posterior samples of transition probabilities and Bayesian credible
ambiguity sets (BCI)."""

import collections
import csv
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from safe_rmdp import frequentist_sets
from safe_rmdp import input_validators
from safe_rmdp import mdp
from safe_rmdp import robust
from safe_rmdp import sampling_utils

SAMPLES_TOLERANCE = 1e-10
# External samplers write rounded decimals.
INGEST_TOLERANCE = 1e-6
DEFAULT_NUM_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Draws of p*_{s,a} given the data.

    Attributes:
        samples: array (S, A, m, S'); samples[s, a, i] is the i-th draw of the
          distribution of the successor of (s, a).
    """
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 4 or 0 in samples.shape:
            raise ValueError(
                "PosteriorSamples: samples must be a non-empty S x A x m x S' "
                f"array, got shape {samples.shape}.")
        input_validators.validate_probability_vector(samples,
                                                     "PosteriorSamples",
                                                     SAMPLES_TOLERANCE)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def point_mass(cls,
                   transitions: np.ndarray,
                   num_samples: int = 1) -> 'PosteriorSamples':
        """Posterior concentrated on transitions (S, A, S')."""
        transitions = np.asarray(transitions, dtype=float)
        return cls(
            np.repeat(transitions[:, :, None, :], num_samples, axis=2))

    @property
    def num_states(self) -> int:
        return self.samples.shape[0]

    @property
    def num_actions(self) -> int:
        return self.samples.shape[1]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[2]

    @property
    def num_next_states(self) -> int:
        return self.samples.shape[3]

    def for_pair(self, s: int, a: int) -> np.ndarray:
        """Returns the m x S' matrix of draws for (s, a)."""
        return self.samples[s, a]


@dataclass(frozen=True, eq=False)
class DirichletPosterior:
    """Independent Dirichlet posteriors per state-action pair.

    Attributes:
        alpha: array (S, A, S') of concentration parameters.
    """
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 3:
            raise ValueError("DirichletPosterior: alpha must be an S x A x S' "
                             f"array, got shape {alpha.shape}.")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise ValueError(
                "DirichletPosterior: concentrations must be positive.")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    def mean(self) -> np.ndarray:
        return self.alpha / self.alpha.sum(axis=2, keepdims=True)


def dirichlet_posterior(prior_alpha: Union[float, np.ndarray],
                        dataset: mdp.Dataset) -> DirichletPosterior:
    """Returns the posterior alpha + counts.

    Args:
        prior_alpha: a scalar, a vector over successors or an S x A x S'
          array of prior concentrations.
        dataset: observed transitions.
    """
    prior_alpha = np.asarray(prior_alpha, dtype=float)
    if np.any(prior_alpha <= 0):
        raise ValueError(
            "dirichlet_posterior: prior concentrations must be positive.")
    counts = dataset.transition_counts
    return DirichletPosterior(np.broadcast_to(prior_alpha, counts.shape) +
                              counts)


def sample_posterior(posterior: DirichletPosterior, num_samples: int,
                     seed: int) -> PosteriorSamples:
    """Draws num_samples distributions per (s, a) as normalized Gamma draws.

    The stream of (s, a) is seeded by (seed, s, a), so samples of one pair
    don't depend on the other pairs.
    """
    if num_samples < 1:
        raise ValueError(
            f"sample_posterior: num_samples must be at least 1, not "
            f"{num_samples}.")
    num_states, num_actions, num_next = posterior.alpha.shape
    samples = np.empty((num_states, num_actions, num_samples, num_next))
    for s in range(num_states):
        for a in range(num_actions):
            rng = sampling_utils.make_rng(seed, s, a)
            draws = rng.gamma(posterior.alpha[s, a],
                              size=(num_samples, num_next))
            samples[s, a] = draws / draws.sum(axis=1, keepdims=True)
    return PosteriorSamples(samples)


def _normalized_mean(draws: np.ndarray) -> np.ndarray:
    mean = draws.mean(axis=-2)
    return mean / mean.sum(axis=-1, keepdims=True)


def posterior_mean(samples: PosteriorSamples) -> np.ndarray:
    """Coordinatewise sample mean, array (S, A, S')."""
    return _normalized_mean(samples.samples)


def bci_radius(samples: np.ndarray,
               delta_sa: float) -> Tuple[np.ndarray, float]:
    """Smallest L1 ball around the sample mean holding 1 - delta_sa of draws.

    Args:
        samples: m x S' matrix of draws for one state-action pair.
        delta_sa: allowed posterior probability outside the ball.

    Returns:
        (p_bar, psi) where psi is the ceil((1 - delta_sa) m)-th smallest
        distance of a draw to p_bar.
    """
    input_validators.validate_delta(delta_sa, "bci_radius")
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 1:
        raise ValueError("bci_radius: samples must be a non-empty m x S' "
                         f"matrix, got shape {samples.shape}.")
    num_samples = samples.shape[0]
    p_bar = _normalized_mean(samples)
    distances = np.sort(np.abs(samples - p_bar).sum(axis=1))
    # Products like 0.95 * 1000 may land just above an integer.
    rank = math.ceil((1 - delta_sa) * num_samples - 1e-9)
    rank = min(max(rank, 1), num_samples)
    return p_bar, float(min(distances[rank - 1], robust.MAX_RADIUS))


def bci_ambiguity_set(
        samples: PosteriorSamples,
        budget: frequentist_sets.ConfidenceBudget) -> robust.AmbiguitySet:
    """BCI balls with the per-pair budget delta / (S A)."""
    if (budget.num_states, budget.num_actions) != (samples.num_next_states,
                                                   samples.num_actions):
        raise ValueError(
            f"bci_ambiguity_set: budget dimensions ({budget.num_states}, "
            f"{budget.num_actions}) don't match the samples "
            f"({samples.num_next_states}, {samples.num_actions}).")
    nominal = np.empty(samples.samples.shape[:2] + (samples.num_next_states,))
    psi = np.empty(samples.samples.shape[:2])
    for s in range(samples.num_states):
        for a in range(samples.num_actions):
            nominal[s, a], psi[s, a] = bci_radius(samples.for_pair(s, a),
                                                  budget.delta_per_pair)
    return robust.AmbiguitySet(nominal, psi)


def write_posterior_samples(samples: PosteriorSamples, path: str):
    """Writes samples as CSV with header s,a,sample_index,p0,p1,..."""
    header = ["s", "a", "sample_index"
             ] + [f"p{i}" for i in range(samples.num_next_states)]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for s in range(samples.num_states):
            for a in range(samples.num_actions):
                for i, row in enumerate(samples.for_pair(s, a)):
                    writer.writerow([s, a, i] + [repr(float(p)) for p in row])


def ingest_posterior_samples(path: str) -> PosteriorSamples:
    """Reads samples written by write_posterior_samples or an external
    sampler.

    Rows within 1e-6 of the simplex are renormalized.

    Raises:
        ValueError: the file doesn't parse, some row is off the simplex or the
          number of draws differs between state-action pairs.
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]
                             ] != ["s", "a", "sample_index"]:
            raise ValueError(f"{path}: expected header s,a,sample_index,p0,...")
        num_next = len(header) - 3
        if num_next < 1 or [h.strip() for h in header[3:]
                           ] != [f"p{i}" for i in range(num_next)]:
            raise ValueError(f"{path}: probability columns must be p0..pN.")
        draws = collections.defaultdict(dict)
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != num_next + 3:
                raise ValueError(
                    f"{path}:{line_number}: expected {num_next + 3} fields, "
                    f"got {len(row)}.")
            try:
                s, a, index = int(row[0]), int(row[1]), int(row[2])
                probabilities = np.array([float(x) for x in row[3:]])
            except ValueError as e:
                raise ValueError(f"{path}:{line_number}: {e}") from e
            if min(s, a, index) < 0:
                raise ValueError(
                    f"{path}:{line_number}: indices must be non-negative.")
            try:
                input_validators.validate_probability_vector(
                    probabilities, f"{path}:{line_number}", INGEST_TOLERANCE)
            except ValueError as e:
                raise ValueError(f"{e} The external sampler produced a draw "
                                 "which is not a distribution.") from e
            if index in draws[(s, a)]:
                raise ValueError(
                    f"{path}:{line_number}: duplicate sample {index} for "
                    f"({s}, {a}).")
            draws[(s, a)][index] = np.maximum(probabilities, 0)
    if not draws:
        raise ValueError(f"{path}: no samples.")
    num_states = max(s for s, _ in draws) + 1
    num_actions = max(a for _, a in draws) + 1
    sizes = {len(draws.get((s, a), {}))
             for s in range(num_states)
             for a in range(num_actions)}
    if len(sizes) != 1:
        raise ValueError(
            f"{path}: the number of samples differs between state-action "
            f"pairs: {sorted(sizes)}.")
    num_samples = sizes.pop()
    samples = np.empty((num_states, num_actions, num_samples, num_next))
    for (s, a), rows in draws.items():
        if set(rows) != set(range(num_samples)):
            raise ValueError(
                f"{path}: sample indices of ({s}, {a}) must be "
                f"0..{num_samples - 1}."
            )
        for index, probabilities in rows.items():
            total = probabilities.sum()
            if abs(total - 1) > SAMPLES_TOLERANCE:
                probabilities = probabilities / total
            samples[s, a, index] = probabilities
    return PosteriorSamples(samples)
