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
"""Single decisions: one state, one action and 5 successors with fixed values.

The safe estimate of such a problem is a single robust Bellman update, which
isolates the quality of the ambiguity sets from the dynamics.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from safe_rmdp import bayes
from safe_rmdp import input_validators
from safe_rmdp import mdp
from safe_rmdp import sampling_utils
from safe_rmdp.domains import base

SUCCESSOR_VALUES = (1.0, 2.0, 3.0, 4.0, 5.0)


def _single_step_problem(values: Sequence[float]) -> base.DecisionProblem:
    return base.DecisionProblem(rewards=np.zeros((1, 1)),
                                discount=1.0,
                                initial_dist=np.ones(1),
                                terminal_values=np.asarray(values))


@dataclass
class DirichletSingleStateParams:
    """Uninformative prior over the successor distribution.

    Attributes:
        alpha: Dirichlet concentrations of the prior, one per successor.
        values: fixed values of the successors.
    """
    alpha: Tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    values: Tuple[float, ...] = SUCCESSOR_VALUES

    def __post_init__(self):
        self.alpha = tuple(float(x) for x in self.alpha)
        self.values = tuple(float(x) for x in self.values)
        if len(self.alpha) != len(self.values) or len(self.values) < 2:
            raise ValueError(
                "DirichletSingleStateParams: alpha and values must have the "
                "same length of at least 2.")
        for x in self.alpha:
            input_validators.validate_positive(x, "alpha",
                                               "DirichletSingleStateParams")


class SingleStateDirichletDomain(base.Domain):
    name = "single_state_dirichlet"

    def __init__(self, params: DirichletSingleStateParams = None):
        super().__init__(params or DirichletSingleStateParams())
        self._problem = _single_step_problem(self.params.values)

    @property
    def problem(self) -> base.DecisionProblem:
        return self._problem

    def sample_ground_truth(self, seed: int) -> base.SingleStepTruth:
        rng = sampling_utils.make_rng(seed, "truth")
        p = rng.dirichlet(self.params.alpha)
        return base.SingleStepTruth(p[None, None, :])

    def sample_posterior(self, observation: base.Observation, num_samples: int,
                         seed: int) -> bayes.PosteriorSamples:
        posterior = bayes.dirichlet_posterior(np.asarray(self.params.alpha),
                                              observation.dataset)
        return bayes.sample_posterior(posterior, num_samples, seed)


@dataclass
class InventoryParams:
    """Normal demand with unknown mean from a single inventory level.

    The successor states are the inventory levels 1..inventory after the
    demand is served; demand beyond the stock leaves the lowest level.

    Attributes:
        inventory: current inventory, also the number of successor states.
        prior_mean: prior mean of the mean demand.
        prior_std: prior standard deviation of the mean demand.
        demand_std: known standard deviation of the demand.
    """
    inventory: int = 5
    prior_mean: float = 3.0
    prior_std: float = 1.0
    demand_std: float = 1.0

    def __post_init__(self):
        if self.inventory < 2:
            raise ValueError(f"InventoryParams: inventory must be at least 2, "
                             f"not {self.inventory}.")
        input_validators.validate_positive(self.prior_std, "prior_std",
                                           "InventoryParams")
        input_validators.validate_positive(self.demand_std, "demand_std",
                                           "InventoryParams")


def normal_mean_posterior(prior_mean: float, prior_std: float,
                          noise_std: float,
                          observations: np.ndarray) -> Tuple[float, float]:
    """Conjugate update of a Normal mean with known noise.

    Returns:
        (posterior mean, posterior standard deviation).
    """
    observations = np.asarray(observations, dtype=float)
    prior_precision = 1 / prior_std**2
    data_precision = observations.size / noise_std**2
    precision = prior_precision + data_precision
    mean = (prior_precision * prior_mean +
            observations.sum() / noise_std**2) / precision
    return float(mean), float(np.sqrt(1 / precision))


def inventory_distribution(mean_demand, params: InventoryParams) -> np.ndarray:
    """Distribution of the next inventory level for Normal demand.

    Level i (1-based) collects demands in [inventory - i - 0.5,
    inventory - i + 0.5), the lowest and highest levels collect the tails.

    Args:
        mean_demand: scalar or vector of mean demands.
        params: inventory parameters.

    Returns:
        array (..., inventory); entry i - 1 is the probability of level i.
    """
    mean_demand = np.asarray(mean_demand, dtype=float)
    boundaries = np.arange(params.inventory - 1) + 0.5
    cdf = stats.norm.cdf(boundaries, loc=mean_demand[..., None],
                         scale=params.demand_std)
    zeros = np.zeros(mean_demand.shape + (1,))
    ones = np.ones(mean_demand.shape + (1,))
    # Bins by increasing demand, i.e. by decreasing level.
    by_demand = np.diff(np.concatenate([zeros, cdf, ones], axis=-1), axis=-1)
    return by_demand[..., ::-1]


def demand_to_level_index(demands: np.ndarray,
                          params: InventoryParams) -> np.ndarray:
    """0-based index of the inventory level left after the demands."""
    levels = np.floor(params.inventory + 0.5 - np.asarray(demands))
    return np.clip(levels, 1, params.inventory).astype(int) - 1


class InventoryDomain(base.Domain):
    name = "single_state_inventory"

    def __init__(self, params: InventoryParams = None):
        super().__init__(params or InventoryParams())
        levels = np.arange(1, self.params.inventory + 1, dtype=float)
        self._problem = _single_step_problem(levels)

    @property
    def problem(self) -> base.DecisionProblem:
        return self._problem

    def sample_ground_truth(self, seed: int) -> base.SingleStepTruth:
        rng = sampling_utils.make_rng(seed, "truth")
        mean_demand = rng.normal(self.params.prior_mean, self.params.prior_std)
        p = inventory_distribution(mean_demand, self.params)
        return base.SingleStepTruth(p[None, None, :], float(mean_demand))

    def simulate_dataset(self, truth: base.SingleStepTruth,
                         per_state_count: int, seed: int) -> base.Observation:
        if per_state_count < 0:
            raise ValueError("simulate_dataset: per_state_count must be "
                             f"non-negative, not {per_state_count}.")
        rng = sampling_utils.make_rng(seed, 0, 0)
        demands = rng.normal(truth.parameter,
                             self.params.demand_std,
                             size=per_state_count)
        samples = [(0, 0, int(level))
                   for level in demand_to_level_index(demands, self.params)]
        dataset = mdp.Dataset(tuple(samples), 1, 1, self.params.inventory)
        return base.Observation(dataset, demands)

    def sample_posterior(self, observation: base.Observation, num_samples: int,
                         seed: int) -> bayes.PosteriorSamples:
        if observation.outcomes is None:
            raise ValueError(
                "InventoryDomain: the posterior needs the observed demands.")
        mean, std = normal_mean_posterior(self.params.prior_mean,
                                          self.params.prior_std,
                                          self.params.demand_std,
                                          observation.outcomes)
        rng = sampling_utils.make_rng(seed, 0, 0)
        mean_demands = rng.normal(mean, std, size=num_samples)
        draws = inventory_distribution(mean_demands, self.params)
        return bayes.PosteriorSamples(draws[None, None, :, :])
