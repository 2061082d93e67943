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
"""Tabular MDPs: representation, Bellman backups, value iteration and policy
evaluation."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from safe_rmdp import input_validators

# A value function is a float vector over states, a policy is an int vector of
# action indices over states.
ValueFunction = np.ndarray
Policy = np.ndarray

DEFAULT_TOLERANCE = 1e-6
MAX_VALUE_ITERATIONS = 1_000_000


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Finite MDP with known rewards.

    Attributes:
        rewards: array (S, A) with the reward of taking action a in state s.
        transitions: array (S, A, S), transitions[s, a] is the distribution of
          the next state.
        discount: discount factor in [0, 1).
        initial_dist: distribution of the initial state, array (S,).
    """
    rewards: np.ndarray
    transitions: np.ndarray
    discount: float
    initial_dist: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rewards", _frozen_array(self.rewards))
        object.__setattr__(self, "transitions",
                           _frozen_array(self.transitions))
        object.__setattr__(self, "initial_dist",
                           _frozen_array(self.initial_dist))
        if self.rewards.ndim != 2 or self.rewards.size == 0:
            raise ValueError("TabularMdp: rewards must be a non-empty S x A "
                             f"array, got shape {self.rewards.shape}.")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("TabularMdp: rewards must be finite.")
        num_states, num_actions = self.rewards.shape
        input_validators.validate_shape(self.transitions,
                                        (num_states, num_actions, num_states),
                                        "transitions", "TabularMdp")
        input_validators.validate_shape(self.initial_dist, (num_states,),
                                        "initial_dist", "TabularMdp")
        input_validators.validate_discount(self.discount, "TabularMdp")
        input_validators.validate_probability_vector(self.transitions,
                                                     "TabularMdp transitions")
        input_validators.validate_probability_vector(self.initial_dist,
                                                     "TabularMdp initial_dist")

    @property
    def num_states(self) -> int:
        return self.rewards.shape[0]

    @property
    def num_actions(self) -> int:
        return self.rewards.shape[1]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Multiset of observed transitions (s, a, s').

    Counts are derived from the samples on construction, so they are always
    consistent with them.

    Attributes:
        samples: tuple of (s, a, s') triples.
        num_states: number of source states S.
        num_actions: number of actions A.
        num_next_states: number of successor states; equals num_states for MDP
          data and differs for single-step problems.
    """
    samples: Tuple[Tuple[int, int, int], ...]
    num_states: int
    num_actions: int
    num_next_states: Optional[int] = None
    transition_counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.num_next_states is None:
            object.__setattr__(self, "num_next_states", self.num_states)
        if min(self.num_states, self.num_actions, self.num_next_states) < 1:
            raise ValueError("Dataset: dimensions must be at least 1, got "
                             f"S={self.num_states}, A={self.num_actions}, "
                             f"S'={self.num_next_states}.")
        samples = tuple(
            (int(s), int(a), int(s_next)) for s, a, s_next in self.samples)
        object.__setattr__(self, "samples", samples)
        counts = np.zeros(
            (self.num_states, self.num_actions, self.num_next_states),
            dtype=np.int64)
        if samples:
            indices = np.array(samples)
            if np.any(indices < 0) or np.any(
                    indices.max(axis=0) >= counts.shape):
                raise ValueError(
                    "Dataset: sample indices out of range for S="
                    f"{self.num_states}, A={self.num_actions}, "
                    f"S'={self.num_next_states}.")
            np.add.at(counts, (indices[:, 0], indices[:, 1], indices[:, 2]),
                      1)
        counts.setflags(write=False)
        object.__setattr__(self, "transition_counts", counts)

    @classmethod
    def from_samples(cls,
                     samples: Iterable[Sequence[int]],
                     num_states: int,
                     num_actions: int,
                     num_next_states: Optional[int] = None) -> 'Dataset':
        return cls(tuple(tuple(s) for s in samples), num_states, num_actions,
                   num_next_states)

    @property
    def counts(self) -> np.ndarray:
        """Number of samples n[s][a] per state-action pair."""
        return self.transition_counts.sum(axis=2)

    def __len__(self) -> int:
        return len(self.samples)


def empirical_model(dataset: Dataset, num_states: int,
                    num_actions: int) -> np.ndarray:
    """Returns the maximum likelihood transition probabilities.

    Pairs without samples get the uniform distribution.

    Returns:
        array (S, A, S') of probability vectors.
    """
    if (dataset.num_states, dataset.num_actions) != (num_states, num_actions):
        raise ValueError(
            f"empirical_model: dataset dimensions ({dataset.num_states}, "
            f"{dataset.num_actions}) don't match ({num_states}, {num_actions})."
        )
    counts = dataset.transition_counts.astype(float)
    n = counts.sum(axis=2, keepdims=True)
    uniform = np.full_like(counts, 1.0 / counts.shape[2])
    return np.where(n > 0, counts / np.maximum(n, 1), uniform)


def bellman_backup(mdp: TabularMdp,
                   v: ValueFunction) -> Tuple[ValueFunction, Policy]:
    """Applies the Bellman optimality operator to v.

    Returns:
        (v', greedy policy); ties between actions go to the lowest index.
    """
    v = np.asarray(v, dtype=float)
    input_validators.validate_shape(v, (mdp.num_states,), "v",
                                    "bellman_backup")
    q = mdp.rewards + mdp.discount * (mdp.transitions @ v)
    policy = np.argmax(q, axis=1)
    return q[np.arange(mdp.num_states), policy], policy


def stopping_threshold(tol: float, discount: float) -> float:
    """Residual ||v - Tv|| which guarantees ||Tv - v*|| <= tol / 2."""
    if discount == 0:
        return np.inf
    return tol * (1 - discount) / (2 * discount)


def value_iteration(
        mdp: TabularMdp,
        tol: float = DEFAULT_TOLERANCE) -> Tuple[ValueFunction, Policy]:
    """Computes the optimal value function within tol of v*.

    Returns:
        (v, policy) where policy is greedy with respect to v and is
        tol-optimal.
    """
    input_validators.validate_positive(tol, "tol", "value_iteration")
    threshold = stopping_threshold(tol, mdp.discount)
    v = np.zeros(mdp.num_states)
    for _ in range(MAX_VALUE_ITERATIONS):
        v_next, _ = bellman_backup(mdp, v)
        residual = np.max(np.abs(v_next - v))
        v = v_next
        if residual <= threshold:
            break
    else:
        logging.warning(
            "value_iteration: stopped after %d iterations with residual %g",
            MAX_VALUE_ITERATIONS, residual)
    _, policy = bellman_backup(mdp, v)
    return v, policy


def policy_evaluation(mdp: TabularMdp, policy: Policy) -> ValueFunction:
    """Solves (I - gamma * P_pi) v = r_pi."""
    policy = np.asarray(policy, dtype=int)
    input_validators.validate_shape(policy, (mdp.num_states,), "policy",
                                    "policy_evaluation")
    if np.any(policy < 0) or np.any(policy >= mdp.num_actions):
        raise ValueError(
            f"policy_evaluation: actions must be in [0, {mdp.num_actions}).")
    states = np.arange(mdp.num_states)
    transitions = mdp.transitions[states, policy]
    rewards = mdp.rewards[states, policy]
    system = np.eye(mdp.num_states) - mdp.discount * transitions
    return np.linalg.solve(system, rewards)


def total_return(v: ValueFunction, initial_dist: np.ndarray) -> float:
    """Expected discounted return p0^T v."""
    v = np.asarray(v, dtype=float)
    initial_dist = np.asarray(initial_dist, dtype=float)
    if v.shape != initial_dist.shape:
        raise ValueError(f"total_return: shapes {v.shape} and "
                         f"{initial_dist.shape} don't match.")
    input_validators.validate_probability_vector(initial_dist,
                                                 "total_return initial_dist",
                                                 tolerance=1e-9)
    return float(initial_dist @ v)
