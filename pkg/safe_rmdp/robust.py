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
"""Robust Bellman machinery over s,a-rectangular L1 ambiguity sets.

For each state-action pair nature picks the successor distribution from

    {q in simplex : ||q - nominal[s, a]||_1 <= psi[s, a]}

so as to minimize the value of the successor state.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp

# Maximal L1 distance between two probability vectors.
MAX_RADIUS = 2.0

# Nominal points coming out of LPs are slightly off the simplex.
_NOMINAL_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class AmbiguitySet:
    """L1 balls around nominal transition probabilities.

    Attributes:
        nominal: array (S, A, S') of nominal distributions.
        psi: array (S, A) of radii, clamped to [0, 2] on construction.
        support_mask: optional boolean array (S, A, S'). Successors with False
          are impossible; the worst case never moves mass to them.
    """
    nominal: np.ndarray
    psi: np.ndarray
    support_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        nominal = np.array(self.nominal, dtype=float)
        psi = np.array(self.psi, dtype=float)
        obj_name = type(self).__name__
        if nominal.ndim != 3:
            raise ValueError(f"{obj_name}: nominal must be an S x A x S' "
                             f"array, got shape {nominal.shape}.")
        input_validators.validate_shape(psi, nominal.shape[:2], "psi",
                                        obj_name)
        input_validators.validate_probability_vector(nominal,
                                                     f"{obj_name} nominal")
        if np.any(np.isnan(psi)) or np.any(psi < 0):
            raise ValueError(f"{obj_name}: psi must be non-negative.")
        psi = np.minimum(psi, MAX_RADIUS)
        nominal.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "nominal", nominal)
        object.__setattr__(self, "psi", psi)
        if self.support_mask is not None:
            mask = np.array(self.support_mask, dtype=bool)
            input_validators.validate_shape(mask, nominal.shape,
                                            "support_mask", obj_name)
            if np.any(nominal[~mask] > input_validators.SIMPLEX_TOLERANCE):
                raise ValueError(f"{obj_name}: nominal assigns probability to "
                                 "states outside of support_mask.")
            mask.setflags(write=False)
            object.__setattr__(self, "support_mask", mask)

    @property
    def num_states(self) -> int:
        return self.nominal.shape[0]

    @property
    def num_actions(self) -> int:
        return self.nominal.shape[1]

    @property
    def num_next_states(self) -> int:
        return self.nominal.shape[2]

    def worst_case(self, s: int, a: int,
                   v: mdp.ValueFunction) -> Tuple[np.ndarray, float]:
        """Returns the worst-case distribution for (s, a) and its value."""
        mask = None if self.support_mask is None else self.support_mask[s, a]
        return worst_case_l1(v, self.nominal[s, a], self.psi[s, a], mask)

    def replace_pairs(self, pairs: np.ndarray,
                      other: 'AmbiguitySet') -> 'AmbiguitySet':
        """Returns a set which uses other's balls where pairs is True."""
        pairs = np.asarray(pairs, dtype=bool)
        nominal = np.where(pairs[:, :, None], other.nominal, self.nominal)
        psi = np.where(pairs, other.psi, self.psi)
        return AmbiguitySet(nominal, psi)


@dataclass(frozen=True, eq=False)
class MonotoneConstraintSet(AmbiguitySet):
    """Ambiguity sets described by band constraints instead of L1 balls.

    For successors ordered by decreasing value, the constraint family

        (1_{k..n} - 1_{1..k-1})^T (p - nominal) <= psi,  k = 0, ..., n + 1

    gives the same worst case as the L1 ball and allows the smaller
    monotone radius. worst_case orders the successors by decreasing v before
    applying the constraints.
    """
    lp_method: linear_programming.LpMethod = (
        linear_programming.LpMethod.DENSE_SIMPLEX)

    def worst_case(self, s: int, a: int,
                   v: mdp.ValueFunction) -> Tuple[np.ndarray, float]:
        v = np.asarray(v, dtype=float)
        order = np.argsort(-v, kind="stable")
        q_sorted, objective = _solve_monotone_program(v[order],
                                                      self.nominal[s, a][order],
                                                      self.psi[s, a],
                                                      self.lp_method)
        q = np.empty_like(q_sorted)
        q[order] = q_sorted
        return q, objective


def _validate_kernel_inputs(v, p_bar, psi, obj_name):
    v = np.asarray(v, dtype=float)
    p_bar = np.asarray(p_bar, dtype=float)
    if v.ndim != 1 or v.shape != p_bar.shape:
        raise ValueError(f"{obj_name}: v and p_bar must be vectors of equal "
                         f"length, got shapes {v.shape} and {p_bar.shape}.")
    if not psi >= 0:
        raise ValueError(f"{obj_name}: psi must be non-negative, not {psi}.")
    input_validators.validate_probability_vector(p_bar, f"{obj_name} p_bar",
                                                 _NOMINAL_TOLERANCE)
    return v, p_bar, min(float(psi), MAX_RADIUS)


def _greedy_worst_case(v: np.ndarray, p_bar: np.ndarray,
                       psi: float) -> np.ndarray:
    q = p_bar.copy()
    lowest = int(np.argmin(v))
    amount = max(0.0, min(psi / 2, 1 - p_bar[lowest]))
    q[lowest] += amount
    remaining = amount
    for i in np.argsort(-v, kind="stable"):
        if remaining <= 0:
            break
        if i == lowest:
            continue
        removed = min(q[i], remaining)
        q[i] -= removed
        remaining -= removed
    return q


def worst_case_l1(
        v: mdp.ValueFunction,
        p_bar: np.ndarray,
        psi: float,
        support_mask: Optional[np.ndarray] = None) -> Tuple[np.ndarray, float]:
    """Solves min {q^T v : q in simplex, ||q - p_bar||_1 <= psi}.

    Up to psi / 2 probability mass is moved to the state with the lowest value
    from the states with the highest values. Ties go to the lowest index.

    Args:
        v: value of the successor states.
        p_bar: nominal distribution.
        psi: radius of the L1 ball; values above 2 are treated as 2.
        support_mask: optional boolean vector; masked out successors keep
          probability 0.

    Returns:
        (q_star, q_star^T v).

    Raises:
        ValueError: psi is negative or p_bar is not a distribution.
    """
    v, p_bar, psi = _validate_kernel_inputs(v, p_bar, psi, "worst_case_l1")
    if support_mask is None:
        q = _greedy_worst_case(v, p_bar, psi)
    else:
        support = np.flatnonzero(support_mask)
        if support.size == 0:
            raise ValueError("worst_case_l1: support_mask is empty.")
        q = np.zeros_like(p_bar)
        q[support] = _greedy_worst_case(v[support], p_bar[support], psi)
    return q, float(q @ v)


def monotone_constraint_vectors(num_states: int) -> np.ndarray:
    """Rows 1_{k..n} - 1_{1..k-1} for k = 0, ..., n + 1 (1-based states)."""
    k = np.arange(num_states + 2)[:, None]
    i = np.arange(1, num_states + 1)[None, :]
    return np.where(i >= k, 1.0, -1.0)


def _solve_monotone_program(
        v: np.ndarray, p_bar: np.ndarray, psi: float,
        lp_method: linear_programming.LpMethod) -> Tuple[np.ndarray, float]:
    constraints = monotone_constraint_vectors(v.size)
    result = linear_programming.solve_linear_program(
        c=v,
        a_ub=constraints,
        b_ub=psi + constraints @ p_bar,
        a_eq=np.ones((1, v.size)),
        b_eq=np.ones(1),
        method=lp_method)
    q = np.maximum(result.x, 0)
    q /= q.sum()
    return q, result.objective


def worst_case_l1_monotone(
    v: mdp.ValueFunction,
    p_bar: np.ndarray,
    psi: float,
    lp_method: linear_programming.LpMethod = linear_programming.LpMethod.
    DENSE_SIMPLEX
) -> float:
    """Optimal value of min q^T v over the monotone band constraints.

    The constraints are applied in the given state order; for v sorted in
    decreasing order the result equals worst_case_l1.
    """
    v, p_bar, psi = _validate_kernel_inputs(v, p_bar, psi,
                                            "worst_case_l1_monotone")
    _, objective = _solve_monotone_program(v, p_bar, psi, lp_method)
    return objective


def _validate_problem(rewards, discount, sets, obj_name, square: bool):
    rewards = np.asarray(rewards, dtype=float)
    if rewards.shape != sets.nominal.shape[:2]:
        raise ValueError(f"{obj_name}: rewards shape {rewards.shape} doesn't "
                         f"match the ambiguity sets {sets.nominal.shape[:2]}.")
    if square:
        input_validators.validate_discount(discount, obj_name)
        if sets.num_next_states != sets.num_states:
            raise ValueError(
                f"{obj_name}: successor states must be the MDP states.")
    elif not 0 <= discount <= 1:
        raise ValueError(
            f"{obj_name}: discount must be in [0, 1], not {discount}.")
    return rewards


def _robust_q_values(rewards, discount, sets, v, policy=None) -> np.ndarray:
    """Robust action values; only (s, policy[s]) when policy is given."""
    num_states, num_actions = rewards.shape
    q_values = np.full((num_states, num_actions), -np.inf)
    for s in range(num_states):
        actions = range(num_actions) if policy is None else [policy[s]]
        for a in actions:
            _, worst = sets.worst_case(s, a, v)
            q_values[s, a] = rewards[s, a] + discount * worst
    return q_values


def robust_bellman_backup(
        rewards: np.ndarray, discount: float, sets: AmbiguitySet,
        v: mdp.ValueFunction) -> Tuple[mdp.ValueFunction, mdp.Policy]:
    """Applies the robust Bellman optimality operator to v.

    The sets may be rectangular (S' != S), e.g. one decision with fixed values
    of the successor states; in that case discount may be 1.

    Returns:
        (v', greedy policy); ties between actions go to the lowest index.
    """
    rewards = _validate_problem(rewards, discount, sets,
                                "robust_bellman_backup", square=False)
    v = np.asarray(v, dtype=float)
    input_validators.validate_shape(v, (sets.num_next_states,), "v",
                                    "robust_bellman_backup")
    q_values = _robust_q_values(rewards, discount, sets, v)
    policy = np.argmax(q_values, axis=1)
    return q_values[np.arange(rewards.shape[0]), policy], policy


def _iterate_to_fixed_point(operator, num_states, discount, tol, obj_name):
    threshold = mdp.stopping_threshold(tol, discount)
    v = np.zeros(num_states)
    for _ in range(mdp.MAX_VALUE_ITERATIONS):
        v_next = operator(v)
        residual = np.max(np.abs(v_next - v))
        v = v_next
        if residual <= threshold:
            return v
    logging.warning("%s: stopped after %d iterations with residual %g",
                    obj_name, mdp.MAX_VALUE_ITERATIONS, residual)
    return v


def robust_value_iteration(
        rewards: np.ndarray,
        discount: float,
        sets: AmbiguitySet,
        tol: float = mdp.DEFAULT_TOLERANCE
) -> Tuple[mdp.ValueFunction, mdp.Policy]:
    """Computes the robust optimal value function within tol.

    Uses the stopping rule of mdp.value_iteration; the robust operator is a
    discount-contraction as well.
    """
    rewards = _validate_problem(rewards, discount, sets,
                                "robust_value_iteration", square=True)
    input_validators.validate_positive(tol, "tol", "robust_value_iteration")

    def operator(v):
        return robust_bellman_backup(rewards, discount, sets, v)[0]

    v = _iterate_to_fixed_point(operator, sets.num_states, discount, tol,
                                "robust_value_iteration")
    _, policy = robust_bellman_backup(rewards, discount, sets, v)
    return v, policy


def robust_policy_evaluation(
        rewards: np.ndarray,
        discount: float,
        sets: AmbiguitySet,
        policy: mdp.Policy,
        tol: float = mdp.DEFAULT_TOLERANCE) -> mdp.ValueFunction:
    """Computes the robust value function of a fixed policy within tol."""
    rewards = _validate_problem(rewards, discount, sets,
                                "robust_policy_evaluation", square=True)
    input_validators.validate_positive(tol, "tol", "robust_policy_evaluation")
    policy = np.asarray(policy, dtype=int)
    input_validators.validate_shape(policy, (sets.num_states,), "policy",
                                    "robust_policy_evaluation")
    states = np.arange(sets.num_states)

    def operator(v):
        q_values = _robust_q_values(rewards, discount, sets, v, policy)
        return q_values[states, policy]

    return _iterate_to_fixed_point(operator, sets.num_states, discount, tol,
                                   "robust_policy_evaluation")


def robust_return(rewards: np.ndarray,
                  discount: float,
                  sets: AmbiguitySet,
                  initial_dist: np.ndarray,
                  policy: Optional[mdp.Policy] = None,
                  tol: float = mdp.DEFAULT_TOLERANCE) -> float:
    """Worst-case return p0^T v of policy, or of the robust optimal policy
    when policy is None."""
    if policy is None:
        v, _ = robust_value_iteration(rewards, discount, sets, tol)
    else:
        v = robust_policy_evaluation(rewards, discount, sets, policy, tol)
    return mdp.total_return(v, initial_dist)
