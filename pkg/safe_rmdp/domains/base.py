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
"""Common interface of the benchmark domains."""

import abc
import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from safe_rmdp import bayes
from safe_rmdp import frequentist_sets
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import rsvf
from safe_rmdp import sampling_utils


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Known part of a decision problem: everything except transitions.

    Attributes:
        rewards: array (S, A).
        discount: discount factor; 1 is allowed for single-step problems.
        initial_dist: distribution over the S states.
        terminal_values: for single-step problems, the fixed values of the S'
          successor states. None for MDPs.
    """
    rewards: np.ndarray
    discount: float
    initial_dist: np.ndarray
    terminal_values: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("rewards", "initial_dist", "terminal_values"):
            value = getattr(self, name)
            if value is not None:
                value = np.array(value, dtype=float)
                value.setflags(write=False)
                object.__setattr__(self, name, value)
        input_validators.validate_shape(self.initial_dist,
                                        (self.rewards.shape[0],),
                                        "initial_dist", "DecisionProblem")
        input_validators.validate_probability_vector(
            self.initial_dist, "DecisionProblem initial_dist")
        if self.is_single_step:
            if not 0 <= self.discount <= 1:
                raise ValueError("DecisionProblem: discount must be in [0, 1]"
                                 f", not {self.discount}.")
        else:
            input_validators.validate_discount(self.discount,
                                               "DecisionProblem")

    @property
    def is_single_step(self) -> bool:
        return self.terminal_values is not None

    @property
    def num_states(self) -> int:
        return self.rewards.shape[0]

    @property
    def num_actions(self) -> int:
        return self.rewards.shape[1]

    @property
    def num_next_states(self) -> int:
        if self.is_single_step:
            return self.terminal_values.size
        return self.num_states

    def to_mdp(self, transitions: np.ndarray) -> mdp.TabularMdp:
        return mdp.TabularMdp(self.rewards, transitions, self.discount,
                              self.initial_dist)


@dataclass(frozen=True, eq=False)
class SingleStepTruth:
    """True successor distributions of a single-step problem.

    Attributes:
        transitions: array (S, A, S').
        parameter: the model parameter the distributions were derived from,
          if any (e.g. the mean demand).
    """
    transitions: np.ndarray
    parameter: Optional[float] = None


GroundTruth = Union[mdp.TabularMdp, SingleStepTruth]


@dataclass(frozen=True, eq=False)
class Observation:
    """Data available to the methods.

    Attributes:
        dataset: observed transitions.
        outcomes: continuous outcomes behind the transitions when the domain
          has them (e.g. demands), aligned with dataset.samples.
    """
    dataset: mdp.Dataset
    outcomes: Optional[np.ndarray] = None


def simulate_dataset(transitions: np.ndarray, per_state_count: int,
                     seed: int) -> mdp.Dataset:
    """Draws per_state_count successors for every (s, a).

    The stream of (s, a) is seeded by (seed, s, a).
    """
    if per_state_count < 0:
        raise ValueError("simulate_dataset: per_state_count must be "
                         f"non-negative, not {per_state_count}.")
    transitions = np.asarray(transitions, dtype=float)
    num_states, num_actions, num_next = transitions.shape
    samples = []
    for s in range(num_states):
        for a in range(num_actions):
            if per_state_count == 0:
                continue
            rng = sampling_utils.make_rng(seed, s, a)
            successors = rng.choice(num_next,
                                    size=per_state_count,
                                    p=transitions[s, a])
            samples.extend((s, a, int(s_next)) for s_next in successors)
    return mdp.Dataset(tuple(samples), num_states, num_actions, num_next)


class Domain(abc.ABC):
    """A benchmark: prior over ground truths, data simulator and posterior.

    Subclasses define the class attributes below and take a parameter
    dataclass in the constructor.
    """
    name = ""
    default_replications = 200
    default_delta = 0.05
    default_sample_sizes: Tuple[int, ...] = (5, 10, 20, 50, 100, 200)
    default_lp_method = linear_programming.LpMethod.DENSE_SIMPLEX
    default_good_turing = False
    default_rsvf_anchor = rsvf.CenterAnchor.POSTERIOR_MEAN

    def __init__(self, params):
        self._params = params

    @property
    def params(self):
        return self._params

    def params_dict(self) -> dict:
        return dataclasses.asdict(self._params)

    @property
    @abc.abstractmethod
    def problem(self) -> DecisionProblem:
        """Rewards, discount and initial distribution."""

    @abc.abstractmethod
    def sample_ground_truth(self, seed: int) -> GroundTruth:
        """Draws the true transition probabilities from the prior."""

    @abc.abstractmethod
    def sample_posterior(self, observation: Observation, num_samples: int,
                         seed: int) -> bayes.PosteriorSamples:
        """Draws transition probabilities from the posterior given data."""

    def simulate_dataset(self, truth: GroundTruth, per_state_count: int,
                         seed: int) -> Observation:
        return Observation(
            simulate_dataset(truth.transitions, per_state_count, seed))

    def budget(self, delta: float) -> frequentist_sets.ConfidenceBudget:
        problem = self.problem
        return frequentist_sets.ConfidenceBudget(
            delta, problem.num_next_states, problem.num_actions,
            problem.num_states * problem.num_actions)

    def _action_values(self, truth: GroundTruth) -> np.ndarray:
        problem = self.problem
        return (problem.rewards + problem.discount *
                (truth.transitions @ problem.terminal_values))

    def true_return(self, truth: GroundTruth, policy: mdp.Policy) -> float:
        """Return of policy under the true transition probabilities."""
        problem = self.problem
        policy = np.asarray(policy, dtype=int)
        if problem.is_single_step:
            values = self._action_values(truth)[np.arange(problem.num_states),
                                                policy]
        else:
            values = mdp.policy_evaluation(truth, policy)
        return mdp.total_return(values, problem.initial_dist)

    def optimal_return(self, truth: GroundTruth) -> float:
        """Return of the optimal policy for the true transitions."""
        problem = self.problem
        if problem.is_single_step:
            policy = np.argmax(self._action_values(truth), axis=1)
        else:
            _, policy = mdp.value_iteration(truth)
        return self.true_return(truth, policy)
