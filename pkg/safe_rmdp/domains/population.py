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
"""Control of an invasive population with exponential growth.

The population evolves as

    N_{t+1} = min(max(lambda_t N_t, 0), K),
    lambda_t = growth_rate - z_t N_t beta1 - z_t max(0, N_t - threshold)^2 beta2
               + Normal(0, growth_sigma^2),

where z_t = 1 when the treatment is applied. Only y_t = N_t + Normal(0,
obs_sigma^2) is observed, and the MDP state is y_t discretized into 20 equal
bins on [0, K]. Transition probabilities of the MDP are estimated by
simulating the continuous model.

The parameters (growth_rate, beta1, beta2) are unknown with a Normal prior.
The posterior is the conjugate Normal posterior of a weighted linear
regression of the observed growth ratios y_{t+1} / y_t on the features
(1, -z N, -z max(0, N - threshold)^2).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from safe_rmdp import bayes
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import sampling_utils
from safe_rmdp.domains import base

NUM_BINS = 20
NO_TREATMENT, TREATMENT = 0, 1


@dataclass
class PopulationParams:
    """Parameters of the population model.

    growth_rate, beta1 and beta2 are the prior means of the unknown
    parameters; prior_std holds their prior standard deviations in the same
    order.
    """
    carrying_capacity: float = 50.0
    growth_rate: float = 1.3
    beta1: float = 0.01
    beta2: float = 0.0005
    threshold: float = 20.0
    growth_sigma: float = 0.1
    obs_sigma: float = 0.1
    population_cost: float = 1.0
    treatment_cost: float = 10.0
    discount: float = 0.9
    prior_std: Tuple[float, float, float] = (0.1, 0.003, 0.0002)
    num_bins: int = NUM_BINS
    discretization_steps: int = 100_000
    posterior_discretization_steps: int = 2_000

    def __post_init__(self):
        self.prior_std = tuple(float(x) for x in self.prior_std)
        obj_name = "PopulationParams"
        input_validators.validate_positive(self.carrying_capacity,
                                           "carrying_capacity", obj_name)
        input_validators.validate_discount(self.discount, obj_name)
        for name in ("growth_sigma", "obs_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(
                    f"{obj_name}: {name} must be non-negative, not "
                    f"{getattr(self, name)}.")
        if len(self.prior_std) != 3:
            raise ValueError(f"{obj_name}: prior_std needs 3 entries.")
        for std in self.prior_std:
            input_validators.validate_positive(std, "prior_std", obj_name)
        if self.num_bins != NUM_BINS:
            raise ValueError(f"{obj_name}: num_bins must be {NUM_BINS}, not "
                             f"{self.num_bins}.")
        if self.discretization_steps < 100_000:
            raise ValueError(
                f"{obj_name}: discretization_steps must be at least 100000, "
                f"not {self.discretization_steps}.")
        if self.posterior_discretization_steps < 1:
            raise ValueError(
                f"{obj_name}: posterior_discretization_steps must be "
                "positive.")

    @property
    def prior_mean(self) -> np.ndarray:
        return np.array([self.growth_rate, self.beta1, self.beta2])

    @property
    def bin_width(self) -> float:
        return self.carrying_capacity / self.num_bins

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.num_bins) + 0.5) * self.bin_width


def population_rewards(params: PopulationParams) -> np.ndarray:
    """Negative cost of the population plus the cost of the treatment."""
    rewards = -params.population_cost * np.repeat(
        params.midpoints[:, None], 2, axis=1)
    rewards[:, TREATMENT] -= params.treatment_cost
    return rewards


def discretize(theta: np.ndarray, params: PopulationParams, steps: int,
               rng: np.random.Generator) -> np.ndarray:
    """Estimates the MDP transition probabilities by simulation.

    Both actions use the same random numbers, so they get identical kernels
    when the treatment has no effect.

    Args:
        theta: (growth_rate, beta1, beta2).
        params: model parameters, theta overrides their prior means.
        steps: simulated steps per state.
        rng: random generator.

    Returns:
        array (num_bins, 2, num_bins).
    """
    growth_rate, beta1, beta2 = theta
    n = params.num_bins
    lows = np.arange(n)[:, None] * params.bin_width
    population = lows + rng.uniform(0, params.bin_width, size=(n, steps))
    growth_noise = rng.normal(0, params.growth_sigma, size=(n, steps))
    obs_noise = rng.normal(0, params.obs_sigma, size=(n, steps))
    excess = np.maximum(0, population - params.threshold)
    transitions = np.zeros((n, 2, n))
    for z in (NO_TREATMENT, TREATMENT):
        growth = (growth_rate - z * population * beta1 -
                  z * excess**2 * beta2 + growth_noise)
        next_population = np.clip(growth * population, 0,
                                  params.carrying_capacity)
        observed = next_population + obs_noise
        bins = np.clip(np.floor(observed / params.bin_width), 0,
                       n - 1).astype(int)
        for s in range(n):
            transitions[s, z] = np.bincount(bins[s], minlength=n) / steps
    return transitions


def growth_regression(
    dataset: mdp.Dataset, params: PopulationParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Features, growth ratios and weights of the observed transitions.

    Transitions into the top bin are censored by the capacity and skipped.

    Returns:
        (features (k, 3), ratios (k,), weights (k,)), one row per distinct
        observed transition, weights are counts divided by noise variances.
    """
    counts = dataset.transition_counts
    s, a, s_next = np.nonzero(counts[:, :, :params.num_bins - 1])
    population = params.midpoints[s]
    ratios = params.midpoints[s_next] / population
    features = np.stack([
        np.ones_like(population), -a * population,
        -a * np.maximum(0, population - params.threshold)**2
    ],
                        axis=1)
    # Noise of the ratio from the growth noise, the observation noise and the
    # bin rounding.
    measurement_var = params.obs_sigma**2 + params.bin_width**2 / 12
    variances = (params.growth_sigma**2 + measurement_var *
                 (1 + ratios**2) / population**2)
    weights = counts[s, a, s_next] / variances
    return features, ratios, weights


def parameter_posterior(
        dataset: mdp.Dataset,
        params: PopulationParams) -> Tuple[np.ndarray, np.ndarray]:
    """Normal posterior of (growth_rate, beta1, beta2).

    Returns:
        (mean, covariance).
    """
    features, ratios, weights = growth_regression(dataset, params)
    prior_precision = np.diag(1 / np.square(params.prior_std))
    precision = prior_precision + features.T @ (weights[:, None] * features)
    covariance = np.linalg.inv(precision)
    mean = covariance @ (prior_precision @ params.prior_mean +
                         features.T @ (weights * ratios))
    return mean, (covariance + covariance.T) / 2


class PopulationPosteriorSampler:
    """Draws parameters from the posterior and discretizes each draw."""

    def __init__(self, params: PopulationParams):
        self._params = params

    def __call__(self, dataset: mdp.Dataset, num_samples: int,
                 seed: int) -> bayes.PosteriorSamples:
        mean, covariance = parameter_posterior(dataset, self._params)
        rng = sampling_utils.make_rng(seed, "parameters")
        thetas = rng.multivariate_normal(mean, covariance, size=num_samples)
        n = self._params.num_bins
        samples = np.empty((n, 2, num_samples, n))
        for i, theta in enumerate(thetas):
            samples[:, :, i, :] = discretize(
                theta, self._params,
                self._params.posterior_discretization_steps,
                sampling_utils.make_rng(seed, "discretization", i))
        return bayes.PosteriorSamples(samples)


def make_population(
    params: PopulationParams = None
) -> Tuple[mdp.TabularMdp, PopulationPosteriorSampler]:
    """Builds the MDP at the prior mean parameters and the posterior sampler.
    """
    params = params or PopulationParams()
    transitions = discretize(params.prior_mean, params,
                             params.discretization_steps,
                             sampling_utils.make_rng("population-template"))
    initial_dist = np.full(params.num_bins, 1 / params.num_bins)
    template = mdp.TabularMdp(population_rewards(params), transitions,
                              params.discount, initial_dist)
    return template, PopulationPosteriorSampler(params)


class PopulationDomain(base.Domain):
    name = "population"
    default_replications = 100
    default_delta = 0.10
    default_lp_method = linear_programming.LpMethod.HIGHS
    default_good_turing = True

    def __init__(self, params: PopulationParams = None):
        super().__init__(params or PopulationParams())
        self._template, self._sampler = make_population(self.params)
        self._problem = base.DecisionProblem(self._template.rewards,
                                             self._template.discount,
                                             self._template.initial_dist)

    @property
    def problem(self) -> base.DecisionProblem:
        return self._problem

    @property
    def template(self) -> mdp.TabularMdp:
        return self._template

    def sample_ground_truth(self, seed: int) -> mdp.TabularMdp:
        rng = sampling_utils.make_rng(seed, "truth")
        theta = rng.normal(self.params.prior_mean, self.params.prior_std)
        transitions = discretize(theta, self.params,
                                 self.params.discretization_steps,
                                 sampling_utils.make_rng(seed, "truth-kernel"))
        return self._problem.to_mdp(transitions)

    def sample_posterior(self, observation: base.Observation, num_samples: int,
                         seed: int) -> bayes.PosteriorSamples:
        return self._sampler(observation.dataset, num_samples, seed)
