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
"""RiverSwim: a chain where swimming left is easy and swimming right pays.

Action 0 (left) moves deterministically to the left neighbour; the leftmost
state pays a small reward for it. Action 1 (right) fights the current: it
advances with a small probability, otherwise stays or drifts back. The
rightmost state pays a large reward for swimming right.
"""

from dataclasses import dataclass

import numpy as np

from safe_rmdp import bayes
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import rsvf
from safe_rmdp.domains import base

LEFT, RIGHT = 0, 1


@dataclass
class RiverSwimParams:
    """Parameters of RiverSwim, defaults are the commonly used ones.

    Attributes:
        num_states: length of the chain.
        left_reward: reward of swimming left in the leftmost state.
        right_reward: reward of swimming right in the rightmost state.
        first_advance: probability that right moves on from the leftmost
          state (it stays otherwise).
        advance: probability that right moves on from an interior state.
        drift_back: probability that right moves back from an interior state.
        last_stay: probability that right stays in the rightmost state (it
          moves back otherwise).
        discount: discount factor.
        initial_state: the state the chain starts in.
        prior_alpha: concentration of the uniform Dirichlet prior.
        version: version of these defaults, recorded with results.
    """
    num_states: int = 6
    left_reward: float = 5 / 1000
    right_reward: float = 1.0
    first_advance: float = 0.6
    advance: float = 0.35
    drift_back: float = 0.05
    last_stay: float = 0.6
    discount: float = 0.95
    initial_state: int = 0
    prior_alpha: float = 1.0
    version: int = 1

    def __post_init__(self):
        if self.num_states < 2:
            raise ValueError("RiverSwimParams: num_states must be at least 2, "
                             f"not {self.num_states}.")
        for name in ("first_advance", "advance", "drift_back", "last_stay"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(
                    f"RiverSwimParams: {name} must be a probability, not "
                    f"{value}.")
        if self.advance + self.drift_back > 1:
            raise ValueError(
                "RiverSwimParams: advance + drift_back must be at most 1.")
        if not 0 <= self.initial_state < self.num_states:
            raise ValueError(
                f"RiverSwimParams: initial_state must be in [0, "
                f"{self.num_states}), not {self.initial_state}.")
        input_validators.validate_discount(self.discount, "RiverSwimParams")
        input_validators.validate_positive(self.prior_alpha, "prior_alpha",
                                           "RiverSwimParams")


def make_riverswim(params: RiverSwimParams = None) -> mdp.TabularMdp:
    params = params or RiverSwimParams()
    n = params.num_states
    transitions = np.zeros((n, 2, n))
    rewards = np.zeros((n, 2))
    for s in range(n):
        transitions[s, LEFT, max(s - 1, 0)] = 1
    transitions[0, RIGHT, 0] = 1 - params.first_advance
    transitions[0, RIGHT, 1] = params.first_advance
    for s in range(1, n - 1):
        transitions[s, RIGHT, s + 1] = params.advance
        transitions[s, RIGHT, s - 1] = params.drift_back
        transitions[s, RIGHT, s] = 1 - params.advance - params.drift_back
    transitions[n - 1, RIGHT, n - 1] = params.last_stay
    transitions[n - 1, RIGHT, n - 2] = 1 - params.last_stay
    rewards[0, LEFT] = params.left_reward
    rewards[n - 1, RIGHT] = params.right_reward
    initial_dist = np.zeros(n)
    initial_dist[params.initial_state] = 1
    return mdp.TabularMdp(rewards, transitions, params.discount, initial_dist)


class RiverSwimDomain(base.Domain):
    """RiverSwim with a fixed truth and a uniform Dirichlet prior for
    inference."""
    name = "riverswim"
    default_replications = 100
    default_lp_method = linear_programming.LpMethod.HIGHS
    default_good_turing = True
    # The uniform prior puts mass on successors the chain never reaches.
    default_rsvf_anchor = rsvf.CenterAnchor.EMPIRICAL

    def __init__(self, params: RiverSwimParams = None):
        super().__init__(params or RiverSwimParams())
        self._truth = make_riverswim(self.params)
        self._problem = base.DecisionProblem(self._truth.rewards,
                                             self._truth.discount,
                                             self._truth.initial_dist)

    @property
    def problem(self) -> base.DecisionProblem:
        return self._problem

    def sample_ground_truth(self, seed: int) -> mdp.TabularMdp:
        # The truth prior is a point mass at the configured chain.
        return self._truth

    def sample_posterior(self, observation: base.Observation, num_samples: int,
                         seed: int) -> bayes.PosteriorSamples:
        posterior = bayes.dirichlet_posterior(self.params.prior_alpha,
                                              observation.dataset)
        return bayes.sample_posterior(posterior, num_samples, seed)
