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
"""Ambiguity sets adapted to the value functions they are used with (RSVF).

A robust backup of v at (s, a) lower-bounds the true backup with posterior
probability zeta whenever the ambiguity set intersects the half-space

    K(v) = {p in simplex : p^T v <= g(v)},

where g(v) is the posterior zeta-quantile of (p*)^T v from below. RSVF keeps a
small set of candidate optimal value functions (the POV set) and for every
(s, a) uses the smallest L1 ball which intersects K(v) for all of them. It
grows the POV set with the robust optimal value function until that function
is covered too.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from safe_rmdp import bayes
from safe_rmdp import frequentist_sets
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import robust

DEFAULT_MAX_ITERATIONS = 20
TERMINATION_TOLERANCE = 1e-9
POV_TOLERANCE = 1e-12
# Allowed slack of the center's radius when choosing the center closest to the
# anchor.
_CENTER_SLACK = 1e-9


class CenterAnchor(enum.Enum):
    """Distribution the minimax centers are pulled towards."""
    # Observed frequencies; pairs without data use the posterior mean.
    EMPIRICAL = "empirical"
    POSTERIOR_MEAN = "posterior_mean"


class EmptyHalfspaceError(linear_programming.SolverError):
    """The threshold is below the smallest value, so K(v) is empty."""


@dataclass(frozen=True, eq=False)
class SafetyHalfspace:
    """K(v) = {p : p^T v <= g} for the state-action pair (s, a)."""
    v: np.ndarray
    g: float
    s: int = 0
    a: int = 0

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError(
                "SafetyHalfspace: v must be a non-empty finite vector.")
        if not np.isfinite(self.g):
            raise ValueError(
                f"SafetyHalfspace: g must be finite, not {self.g}.")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "g", float(self.g))

    def _empty_threshold(self) -> float:
        return self.v.min() - 1e-12 * max(1.0, np.abs(self.v).max())

    def check_nonempty(self):
        if self.g < self._empty_threshold():
            raise EmptyHalfspaceError(
                f"K(v) of ({self.s}, {self.a}) is empty: g={self.g} is below "
                f"min(v)={self.v.min()}.")

    @property
    def feasible_g(self) -> float:
        """g raised to min(v) when it is below it by rounding error only."""
        return max(self.g, float(self.v.min()))


class PovSet:
    """Ordered set of value functions without duplicates (sup-norm)."""

    def __init__(self, tolerance: float = POV_TOLERANCE):
        self._tolerance = tolerance
        self._values = []

    def add(self, v: mdp.ValueFunction) -> bool:
        """Adds v unless it is within tolerance of a member.

        Returns:
            whether v was added.
        """
        v = np.array(v, dtype=float)
        for member in self._values:
            if np.max(np.abs(member - v)) <= self._tolerance:
                return False
        v.setflags(write=False)
        self._values.append(v)
        return True

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self._values)


@dataclass
class RsvfDiagnostics:
    """What happened during rsvf_solve.

    Attributes:
        iterations: number of POV iterations performed.
        terminated: (S, A) booleans, whether the final set of (s, a) intersects
          K of the returned value function.
        fallback: (S, A) booleans, pairs which use BCI sets.
        psi: (S, A) final radii.
        theta: (S, A, S) final centers.
        return_trace: robust return after every solve, the fallback solve
          included.
        pov_size: size of the POV set.
    """
    iterations: int
    terminated: np.ndarray
    fallback: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    return_trace: List[float] = field(default_factory=list)
    pov_size: int = 0

    @property
    def fallback_used(self) -> bool:
        return bool(np.any(self.fallback))

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "pov_size": self.pov_size,
            "return_trace": [float(r) for r in self.return_trace],
            "terminated": self.terminated.tolist(),
            "fallback": [[int(s), int(a)]
                         for s, a in zip(*np.nonzero(self.fallback))],
            "psi": self.psi.tolist(),
            "theta": self.theta.tolist(),
        }


@dataclass(frozen=True, eq=False)
class RsvfSolution:
    policy: mdp.Policy
    value: mdp.ValueFunction
    safe_return: float
    diagnostics: RsvfDiagnostics
    ambiguity_set: robust.AmbiguitySet


def quantile_threshold_g(samples: np.ndarray, v: mdp.ValueFunction,
                         zeta: float) -> float:
    """Largest g with at least zeta of the draws q satisfying q^T v >= g.

    Args:
        samples: m x S' matrix of posterior draws for one (s, a).
        v: value function of the successors.
        zeta: confidence in (0, 1).

    Returns:
        the (floor(m (1 - zeta)) + 1)-th smallest value of q_i^T v.
    """
    if not 0 < zeta < 1:
        raise ValueError(
            f"quantile_threshold_g: zeta must be in (0, 1), not {zeta}.")
    samples = np.asarray(samples, dtype=float)
    values = np.sort(samples @ np.asarray(v, dtype=float))
    index = math.floor(values.size * (1 - zeta) + 1e-9)
    return float(values[min(index, values.size - 1)])


def dist_to_halfspace(p: np.ndarray,
                      halfspace: SafetyHalfspace) -> Tuple[float, np.ndarray]:
    """L1 distance from p to K(v) and the closest point of K(v).

    Mass moves from the highest-value states to the lowest-value state, which
    buys the largest decrease of p^T v per unit of L1 distance.

    Raises:
        EmptyHalfspaceError: g < min(v).
    """
    p = np.asarray(p, dtype=float)
    v = halfspace.v
    if p.shape != v.shape:
        raise ValueError(f"dist_to_halfspace: p has shape {p.shape}, v has "
                         f"shape {v.shape}.")
    input_validators.validate_probability_vector(p, "dist_to_halfspace p",
                                                 1e-9)
    halfspace.check_nonempty()
    excess = p @ v - halfspace.feasible_g
    if excess <= 0:
        return 0.0, p.copy()
    lowest = int(np.argmin(v))
    v_min = v[lowest]
    q = p.copy()
    for i in np.argsort(-v, kind="stable"):
        gain = v[i] - v_min
        if excess <= 0 or gain <= 0:
            break
        amount = min(q[i], excess / gain)
        q[i] -= amount
        q[lowest] += amount
        excess -= amount * gain
    return float(np.abs(q - p).sum()), q


def termination_check(theta: np.ndarray, psi: float,
                      halfspace: SafetyHalfspace) -> bool:
    """Whether the ball (theta, psi) intersects K(v)."""
    d, _ = dist_to_halfspace(theta, halfspace)
    return d <= psi + TERMINATION_TOLERANCE


def _center_program(halfspaces: Sequence[SafetyHalfspace]):
    """Constraints of min psi over the center p, the points q_j in K(v_j) and
    slacks t_j >= |q_j - p|.

    Variables are ordered as [p, psi, q_1, t_1, ..., q_k, t_k].
    """
    n, k = halfspaces[0].v.size, len(halfspaces)
    num_vars = n + 1 + 2 * n * k
    psi_index = n
    a_eq = np.zeros((1 + k, num_vars))
    a_eq[0, :n] = 1
    a_ub = np.zeros((2 * k + 2 * n * k, num_vars))
    b_ub = np.zeros(a_ub.shape[0])
    identity = np.eye(n)
    for j, halfspace in enumerate(halfspaces):
        q = slice(n + 1 + 2 * n * j, n + 1 + 2 * n * j + n)
        t = slice(q.stop, q.stop + n)
        a_eq[1 + j, q] = 1
        a_ub[j, q] = halfspace.v
        b_ub[j] = halfspace.feasible_g
        a_ub[k + j, t] = 1
        a_ub[k + j, psi_index] = -1
        rows = slice(2 * k + 2 * n * j, 2 * k + 2 * n * j + n)
        a_ub[rows, q] = identity
        a_ub[rows, :n] = -identity
        a_ub[rows, t] = -identity
        rows = slice(rows.stop, rows.stop + n)
        a_ub[rows, q] = -identity
        a_ub[rows, :n] = identity
        a_ub[rows, t] = -identity
    return a_ub, b_ub, a_eq, np.ones(1 + k), psi_index


def _max_distance(theta: np.ndarray,
                  halfspaces: Sequence[SafetyHalfspace]) -> float:
    return max(dist_to_halfspace(theta, h)[0] for h in halfspaces)


def minimax_center(
    halfspaces: Sequence[SafetyHalfspace],
    anchor: Optional[np.ndarray] = None,
    lp_method: linear_programming.LpMethod = linear_programming.LpMethod.
    DENSE_SIMPLEX
) -> Tuple[np.ndarray, float]:
    """Smallest L1 ball which intersects every half-space.

    Solves min_p max_j dist(p, K(v_j)) as a linear program. The minimizer is
    often not unique (e.g. any point of K(v) for a single half-space); with an
    anchor, a second program picks the optimal center closest to the anchor
    in L1.

    Args:
        halfspaces: half-spaces of one state-action pair.
        anchor: optional distribution to break ties towards, such as the
          empirical frequencies or the posterior mean.
        lp_method: linear programming solver.

    Returns:
        (theta, psi) where psi is the largest distance from theta to the
        half-spaces.

    Raises:
        EmptyHalfspaceError: some half-space is empty.
        SolverError: the linear programming solver failed.
    """
    if not halfspaces:
        raise ValueError("minimax_center: at least one half-space is needed.")
    n = halfspaces[0].v.size
    for halfspace in halfspaces:
        if halfspace.v.size != n:
            raise ValueError(
                "minimax_center: value functions have different lengths.")
        halfspace.check_nonempty()
    a_ub, b_ub, a_eq, b_eq, psi_index = _center_program(halfspaces)
    c = np.zeros(a_ub.shape[1])
    c[psi_index] = 1
    result = linear_programming.solve_linear_program(c, a_ub, b_ub, a_eq, b_eq,
                                                     lp_method)
    x = result.x
    if anchor is not None:
        anchor = np.asarray(anchor, dtype=float)
        input_validators.validate_shape(anchor, (n,), "anchor",
                                        "minimax_center")
        # Extra variables u >= |p - anchor|; minimize sum(u).
        num_vars = a_ub.shape[1]
        a_ub = np.hstack([a_ub, np.zeros((a_ub.shape[0], n))])
        a_eq = np.hstack([a_eq, np.zeros((a_eq.shape[0], n))])
        extra = np.zeros((2 * n + 1, num_vars + n))
        identity = np.eye(n)
        extra[:n, :n] = identity
        extra[:n, num_vars:] = -identity
        extra[n:2 * n, :n] = -identity
        extra[n:2 * n, num_vars:] = -identity
        extra[2 * n, psi_index] = 1
        a_ub = np.vstack([a_ub, extra])
        b_ub = np.concatenate(
            [b_ub, anchor, -anchor, [result.objective + _CENTER_SLACK]])
        c = np.zeros(num_vars + n)
        c[num_vars:] = 1
        x = linear_programming.solve_linear_program(c, a_ub, b_ub, a_eq, b_eq,
                                                    lp_method).x
    theta = np.maximum(x[:n], 0)
    theta /= theta.sum()
    return theta, _max_distance(theta, halfspaces)


def center_anchor(samples: bayes.PosteriorSamples,
                  dataset: Optional[mdp.Dataset] = None) -> np.ndarray:
    """Distributions the RSVF centers are pulled towards, array (S, A, S').

    The empirical frequencies of the pairs with data, the posterior mean of
    the others (and of all pairs without a dataset). Successors never
    observed from (s, a) get no anchor mass.
    """
    mean = bayes.posterior_mean(samples)
    if dataset is None:
        return mean
    if (dataset.num_states, dataset.num_actions,
            dataset.num_next_states) != mean.shape:
        raise ValueError(
            f"center_anchor: dataset dimensions ({dataset.num_states}, "
            f"{dataset.num_actions}, {dataset.num_next_states}) don't match "
            f"the posterior samples {mean.shape}.")
    empirical = mdp.empirical_model(dataset, dataset.num_states,
                                    dataset.num_actions)
    return np.where(dataset.counts[:, :, None] > 0, empirical, mean)


def rsvf_ambiguity_set(
    samples: bayes.PosteriorSamples,
    value_functions: Sequence[mdp.ValueFunction],
    zeta: float,
    lp_method: linear_programming.LpMethod = linear_programming.LpMethod.
    DENSE_SIMPLEX,
    anchor: Optional[np.ndarray] = None
) -> robust.AmbiguitySet:
    """Minimax balls for every (s, a) given the value functions.

    Args:
        samples: posterior samples.
        value_functions: the POV set.
        zeta: confidence of every half-space.
        lp_method: solver of the center programs.
        anchor: array (S, A, S'), among the minimax centers of (s, a) the one
          closest to anchor[s, a] is used; the posterior mean by default.
    """
    value_functions = list(value_functions)
    if anchor is None:
        anchor = bayes.posterior_mean(samples)
    theta = np.empty(samples.samples.shape[:2] + (samples.num_next_states,))
    psi = np.empty(samples.samples.shape[:2])
    for s in range(samples.num_states):
        for a in range(samples.num_actions):
            draws = samples.for_pair(s, a)
            halfspaces = [
                SafetyHalfspace(v, quantile_threshold_g(draws, v, zeta), s, a)
                for v in value_functions
            ]
            theta[s, a], psi[s, a] = minimax_center(halfspaces, anchor[s, a],
                                                    lp_method)
    return robust.AmbiguitySet(theta, psi)


def termination_status(samples: bayes.PosteriorSamples,
                        sets: robust.AmbiguitySet, v: mdp.ValueFunction,
                        zeta: float) -> np.ndarray:
    """(S, A) booleans, whether each set intersects K(v)."""
    status = np.zeros(sets.psi.shape, dtype=bool)
    for s in range(sets.num_states):
        for a in range(sets.num_actions):
            g = quantile_threshold_g(samples.for_pair(s, a), v, zeta)
            status[s, a] = termination_check(sets.nominal[s, a],
                                             sets.psi[s, a],
                                             SafetyHalfspace(v, g, s, a))
    return status


def rsvf_solve(
    rewards: np.ndarray,
    discount: float,
    initial_dist: np.ndarray,
    samples: bayes.PosteriorSamples,
    delta: float,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    tol: float = mdp.DEFAULT_TOLERANCE,
    lp_method: linear_programming.LpMethod = linear_programming.LpMethod.
    DENSE_SIMPLEX,
    dataset: Optional[mdp.Dataset] = None
) -> RsvfSolution:
    """Computes a policy and a safe estimate of its return with RSVF.

    Starts from the optimal value function of the posterior mean model. Each
    iteration adds the current value function to the POV set, rebuilds the
    sets and solves the robust MDP. It stops when the sets of all (s, a)
    intersect K of the new robust value function. Otherwise the pairs which
    fail the check switch to BCI sets and the robust MDP is solved again,
    until every set intersects K of the returned value function.

    Args:
        rewards: array (S, A).
        discount: discount factor in [0, 1).
        initial_dist: initial state distribution.
        samples: posterior samples of the transition probabilities.
        delta: total failure probability, split evenly over (s, a).
        max_iter: maximal number of POV iterations.
        tol: tolerance of robust value iteration.
        lp_method: solver of the center programs.
        dataset: observed transitions; when given, the centers are pulled
          towards the empirical frequencies instead of the posterior mean.
    """
    input_validators.validate_delta(delta, "rsvf_solve")
    if max_iter < 1:
        raise ValueError(f"rsvf_solve: max_iter must be at least 1, not "
                         f"{max_iter}.")
    rewards = np.asarray(rewards, dtype=float)
    num_states, num_actions = rewards.shape
    if samples.samples.shape[:2] != rewards.shape or (samples.num_next_states
                                                      != num_states):
        raise ValueError(
            f"rsvf_solve: posterior samples of shape {samples.samples.shape} "
            f"don't match rewards of shape {rewards.shape}.")
    budget = frequentist_sets.ConfidenceBudget(delta, num_states, num_actions)
    zeta = 1 - budget.delta_per_pair
    anchor = center_anchor(samples, dataset)

    mean_model = mdp.TabularMdp(rewards, bayes.posterior_mean(samples),
                                discount, initial_dist)
    v_hat, policy = mdp.value_iteration(mean_model, tol)
    pov = PovSet()
    trace = []
    iterations = 0
    sets, terminated = None, None
    for _ in range(max_iter):
        if not pov.add(v_hat):
            logging.info("rsvf_solve: the robust value function is already in "
                         "the POV set after %d iterations", iterations)
            break
        iterations += 1
        sets = rsvf_ambiguity_set(samples, pov, zeta, lp_method, anchor)
        v_hat, policy = robust.robust_value_iteration(rewards, discount, sets,
                                                      tol)
        trace.append(mdp.total_return(v_hat, initial_dist))
        terminated = termination_status(samples, sets, v_hat, zeta)
        if terminated.all():
            diagnostics = RsvfDiagnostics(iterations, terminated,
                                          np.zeros_like(terminated),
                                          sets.psi.copy(), sets.nominal.copy(),
                                          trace, len(pov))
            return RsvfSolution(policy, v_hat, trace[-1], diagnostics, sets)

    logging.warning(
        "rsvf_solve: no termination after %d iterations, using BCI sets for "
        "%d of %d state-action pairs", iterations, int((~terminated).sum()),
        terminated.size)
    # BCI balls hold at least zeta of the draws and K(v) holds more than
    # 1 - zeta of them, so they intersect K(v) for every v.
    bci_sets = bayes.bci_ambiguity_set(samples, budget)
    rsvf_sets = sets
    fallback = np.zeros_like(terminated)
    while not terminated.all():
        newly_failed = ~terminated & ~fallback
        if not newly_failed.any():
            logging.warning(
                "rsvf_solve: %d BCI sets miss K of the value function",
                int((~terminated).sum()))
            break
        fallback |= newly_failed
        sets = rsvf_sets.replace_pairs(fallback, bci_sets)
        v_hat, policy = robust.robust_value_iteration(rewards, discount, sets,
                                                      tol)
        trace.append(mdp.total_return(v_hat, initial_dist))
        terminated = termination_status(samples, sets, v_hat, zeta)
    diagnostics = RsvfDiagnostics(iterations, terminated, fallback,
                                  sets.psi.copy(), sets.nominal.copy(), trace,
                                  len(pov))
    return RsvfSolution(policy, v_hat, trace[-1], diagnostics, sets)
