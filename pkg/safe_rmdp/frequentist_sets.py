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
"""Distribution-free ambiguity sets from concentration inequalities."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import robust


@dataclass(frozen=True)
class ConfidenceBudget:
    """Confidence level split uniformly over the uncertain state-action pairs.

    Attributes:
        delta: total probability of failure, in (0, 1).
        num_states: dimension S of the transition simplex.
        num_actions: number of actions A.
        num_pairs: number of state-action pairs sharing delta. Defaults to
          S * A. A single decision with 5 possible successors has
          num_states=5, num_actions=1 and num_pairs=1.
    """
    delta: float
    num_states: int
    num_actions: int
    num_pairs: Optional[int] = None

    def __post_init__(self):
        input_validators.validate_delta(self.delta, "ConfidenceBudget")
        if self.num_states < 1 or self.num_actions < 1:
            raise ValueError(
                "ConfidenceBudget: num_states and num_actions must be at "
                f"least 1, got {self.num_states} and {self.num_actions}.")
        if self.num_pairs is None:
            object.__setattr__(self, "num_pairs",
                               self.num_states * self.num_actions)
        elif self.num_pairs < 1:
            raise ValueError(
                f"ConfidenceBudget: num_pairs must be at least 1, not "
                f"{self.num_pairs}.")

    @property
    def delta_per_pair(self) -> float:
        return self.delta / self.num_pairs


def hoeffding_radius(n: int, budget: ConfidenceBudget) -> float:
    """L1 radius sqrt(2/n * ln(S * A * 2^S / delta)), capped at 2.

    Returns 2 when there are no samples.
    """
    if n < 0:
        raise ValueError(f"hoeffding_radius: n must be non-negative, not {n}.")
    if n == 0:
        return robust.MAX_RADIUS
    log_term = (np.log(budget.num_pairs) + budget.num_states * np.log(2) -
                np.log(budget.delta))
    return float(min(robust.MAX_RADIUS, np.sqrt(2 / n * log_term)))


def hoeffding_monotone_radius(n: int, budget: ConfidenceBudget) -> float:
    """L1 radius sqrt(2/n * ln(S^2 * A / delta)) valid for monotone values."""
    if n < 0:
        raise ValueError(
            f"hoeffding_monotone_radius: n must be non-negative, not {n}.")
    if n == 0:
        return robust.MAX_RADIUS
    log_term = np.log(budget.num_states * budget.num_pairs / budget.delta)
    return float(min(robust.MAX_RADIUS, np.sqrt(2 / n * log_term)))


def good_turing_support(transition_counts: np.ndarray) -> np.ndarray:
    """Marks successors observed in the data as possible.

    Pairs without any samples keep every successor.

    Args:
        transition_counts: counts c[..., s'] over successors (last axis).

    Returns:
        boolean array of the same shape.
    """
    counts = np.asarray(transition_counts)
    if np.any(counts < 0):
        raise ValueError("good_turing_support: counts must be non-negative.")
    observed = counts > 0
    unvisited = ~observed.any(axis=-1, keepdims=True)
    return observed | unvisited


def _check_budget(dataset: mdp.Dataset, budget: ConfidenceBudget):
    if (budget.num_states, budget.num_actions) != (dataset.num_next_states,
                                                   dataset.num_actions):
        raise ValueError(
            f"ConfidenceBudget dimensions ({budget.num_states}, "
            f"{budget.num_actions}) don't match the dataset "
            f"({dataset.num_next_states}, {dataset.num_actions}).")


def hoeffding_ambiguity_set(dataset: mdp.Dataset,
                            budget: ConfidenceBudget,
                            good_turing: bool = False) -> robust.AmbiguitySet:
    """Hoeffding balls around the empirical model.

    Args:
        dataset: observed transitions.
        budget: confidence budget, num_states is the number of successors.
        good_turing: whether successors never observed from (s, a) are
          treated as impossible.
    """
    _check_budget(dataset, budget)
    nominal = mdp.empirical_model(dataset, dataset.num_states,
                                  dataset.num_actions)
    counts = dataset.counts
    psi = np.vectorize(lambda n: hoeffding_radius(int(n), budget),
                       otypes=[float])(counts)
    mask = (good_turing_support(dataset.transition_counts)
            if good_turing else None)
    return robust.AmbiguitySet(nominal, psi, mask)


def hoeffding_monotone_ambiguity_set(
    dataset: mdp.Dataset,
    budget: ConfidenceBudget,
    lp_method: linear_programming.LpMethod = linear_programming.LpMethod.
    DENSE_SIMPLEX
) -> robust.MonotoneConstraintSet:
    """Band-constraint sets with the monotone Hoeffding radius."""
    _check_budget(dataset, budget)
    nominal = mdp.empirical_model(dataset, dataset.num_states,
                                  dataset.num_actions)
    psi = np.vectorize(lambda n: hoeffding_monotone_radius(int(n), budget),
                       otypes=[float])(dataset.counts)
    return robust.MonotoneConstraintSet(nominal, psi, lp_method=lp_method)
