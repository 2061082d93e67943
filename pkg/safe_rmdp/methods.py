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
"""Computes a policy and a safe return estimate with one of the methods."""

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from safe_rmdp import bayes
from safe_rmdp import frequentist_sets
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import report_generator
from safe_rmdp import robust
from safe_rmdp import rsvf
from safe_rmdp.domains import base


class MethodId(enum.Enum):
    MEAN_TRANSITION = "MeanTransition"
    HOEFFDING = "Hoeffding"
    HOEFFDING_MONOTONE = "HoeffdingMonotone"
    BCI = "BCI"
    RSVF = "RSVF"

    @property
    def needs_posterior(self) -> bool:
        return self in (MethodId.BCI, MethodId.RSVF)

    @classmethod
    def parse(cls, name: str) -> 'MethodId':
        """Looks up a method by its value or member name, ignoring case."""
        key = name.strip().lower()
        for method in cls:
            if key in (method.value.lower(), method.name.lower()):
                return method
        raise ValueError(f"Unknown method {name!r}, expected one of "
                         f"{[m.value for m in cls]}.")


@dataclass
class SolveOptions:
    """Options shared by all methods.

    Attributes:
        delta: total probability of failure, split evenly over (s, a).
        tol: tolerance of (robust) value iteration.
        max_iter: maximal number of RSVF iterations.
        good_turing: whether the Hoeffding sets exclude successors which
          were never observed.
        lp_method: linear programming solver of the monotone and RSVF
          programs.
        rsvf_anchor: distribution the RSVF centers are pulled towards.
    """
    delta: float = 0.05
    tol: float = mdp.DEFAULT_TOLERANCE
    max_iter: int = rsvf.DEFAULT_MAX_ITERATIONS
    good_turing: bool = False
    lp_method: linear_programming.LpMethod = (
        linear_programming.LpMethod.DENSE_SIMPLEX)
    rsvf_anchor: rsvf.CenterAnchor = rsvf.CenterAnchor.POSTERIOR_MEAN

    def __post_init__(self):
        input_validators.validate_delta(self.delta, "SolveOptions")
        input_validators.validate_positive(self.tol, "tol", "SolveOptions")
        if self.max_iter < 1:
            raise ValueError(f"SolveOptions: max_iter must be at least 1, not "
                             f"{self.max_iter}.")
        self.lp_method = linear_programming.LpMethod(self.lp_method)
        self.rsvf_anchor = rsvf.CenterAnchor(self.rsvf_anchor)


@dataclass(frozen=True, eq=False)
class SafeSolution:
    """Result of solve.

    Attributes:
        method: the method which computed it.
        policy: deterministic policy, array (S,).
        value: robust value function of the policy, array (S,).
        safe_return: estimate of the return of policy, p0^T value.
        ambiguity_set: the sets the policy is robust to; radius 0 for
          MeanTransition.
        budget: how delta was split over the state-action pairs.
        diagnostics: RSVF diagnostics, None for the other methods.
    """
    method: MethodId
    policy: mdp.Policy
    value: mdp.ValueFunction
    safe_return: float
    ambiguity_set: robust.AmbiguitySet
    budget: frequentist_sets.ConfidenceBudget
    diagnostics: Optional[rsvf.RsvfDiagnostics] = None


def make_budget(problem: base.DecisionProblem,
                delta: float) -> frequentist_sets.ConfidenceBudget:
    """Splits delta over the state-action pairs of the problem."""
    return frequentist_sets.ConfidenceBudget(
        delta, problem.num_next_states, problem.num_actions,
        problem.num_states * problem.num_actions)


def _check_inputs(method: MethodId, problem: base.DecisionProblem,
                  dataset: mdp.Dataset,
                  posterior: Optional[bayes.PosteriorSamples]):
    expected = (problem.num_states, problem.num_actions,
                problem.num_next_states)
    if (dataset.num_states, dataset.num_actions,
            dataset.num_next_states) != expected:
        raise ValueError(
            f"solve: dataset dimensions ({dataset.num_states}, "
            f"{dataset.num_actions}, {dataset.num_next_states}) don't match "
            f"the problem {expected}.")
    if posterior is None:
        if method.needs_posterior:
            raise ValueError(f"solve: {method.value} needs posterior samples.")
        return
    shape = (posterior.num_states, posterior.num_actions,
             posterior.num_next_states)
    if shape != expected:
        raise ValueError(f"solve: posterior samples of dimensions {shape} "
                         f"don't match the problem {expected}.")


def _robust_solve(problem: base.DecisionProblem, sets: robust.AmbiguitySet,
                  tol: float):
    if problem.is_single_step:
        return robust.robust_bellman_backup(problem.rewards, problem.discount,
                                            sets, problem.terminal_values)
    return robust.robust_value_iteration(problem.rewards, problem.discount,
                                         sets, tol)


def _psi_range(sets: robust.AmbiguitySet) -> str:
    return f"radius {sets.psi.min():.4g} (min) .. {sets.psi.max():.4g} (max)"


def _mean_transition(problem, dataset, posterior, options, report):
    if posterior is None:
        nominal = mdp.empirical_model(dataset, dataset.num_states,
                                      dataset.num_actions)
        report.add_stage("Nominal model: empirical transition frequencies")
    else:
        nominal = bayes.posterior_mean(posterior)
        report.add_stage("Nominal model: posterior mean")
    sets = robust.AmbiguitySet(nominal, np.zeros(nominal.shape[:2]))
    if problem.is_single_step:
        value, policy = _robust_solve(problem, sets, options.tol)
        report.add_stage("Bellman update with fixed successor values")
    else:
        value, policy = mdp.value_iteration(problem.to_mdp(nominal),
                                            options.tol)
        report.add_stage(f"Value iteration with tol={options.tol}")
    return value, policy, sets, None


def _hoeffding(problem, dataset, budget, options, report):
    sets = frequentist_sets.hoeffding_ambiguity_set(dataset, budget,
                                                    options.good_turing)
    support = ("observed successors only"
               if options.good_turing else "all successors")
    report.add_stage(f"Hoeffding sets: {_psi_range(sets)} around the "
                     f"empirical model, {support}")
    return sets


def _hoeffding_monotone(problem, dataset, budget, options, report):
    sets = frequentist_sets.hoeffding_monotone_ambiguity_set(
        dataset, budget, options.lp_method)
    report.add_stage(f"Monotone Hoeffding sets: {_psi_range(sets)} around the "
                     f"empirical model, lp_method={options.lp_method.value}")
    return sets


def _anchor_dataset(dataset, options):
    if options.rsvf_anchor == rsvf.CenterAnchor.EMPIRICAL:
        return dataset
    return None


def _anchor_description(options) -> str:
    if options.rsvf_anchor == rsvf.CenterAnchor.EMPIRICAL:
        return "centered near the empirical frequencies"
    return "centered near the posterior mean"


def _single_step_rsvf(problem, dataset, posterior, budget, options, report):
    zeta = 1 - budget.delta_per_pair
    v = problem.terminal_values
    anchor = rsvf.center_anchor(posterior, _anchor_dataset(dataset, options))
    sets = rsvf.rsvf_ambiguity_set(posterior, [v], zeta, options.lp_method,
                                   anchor)
    report.add_stage(f"RSVF sets for the successor values: {_psi_range(sets)}"
                     f", zeta={zeta:.6g}, {_anchor_description(options)}")
    value, policy = _robust_solve(problem, sets, options.tol)
    terminated = rsvf.termination_status(posterior, sets, v, zeta)
    diagnostics = rsvf.RsvfDiagnostics(
        iterations=1,
        terminated=terminated,
        fallback=np.zeros_like(terminated),
        psi=sets.psi.copy(),
        theta=sets.nominal.copy(),
        return_trace=[mdp.total_return(value, problem.initial_dist)],
        pov_size=1)
    return value, policy, sets, diagnostics


def _rsvf(problem, dataset, posterior, budget, options, report):
    if problem.is_single_step:
        return _single_step_rsvf(problem, dataset, posterior, budget, options,
                                 report)
    solution = rsvf.rsvf_solve(problem.rewards, problem.discount,
                               problem.initial_dist, posterior, options.delta,
                               options.max_iter, options.tol, options.lp_method,
                               _anchor_dataset(dataset, options))
    diagnostics = solution.diagnostics
    report.add_stage(
        lambda: f"RSVF: {diagnostics.iterations} iterations, POV set of size "
        f"{diagnostics.pov_size}, {int(diagnostics.fallback.sum())} pairs "
        "with BCI fallback")
    report.add_stage(f"RSVF sets: {_psi_range(solution.ambiguity_set)}, "
                     f"{_anchor_description(options)}")
    return (solution.value, solution.policy, solution.ambiguity_set,
            diagnostics)


def solve(
    method: MethodId,
    problem: base.DecisionProblem,
    dataset: mdp.Dataset,
    posterior: Optional[bayes.PosteriorSamples] = None,
    options: Optional[SolveOptions] = None,
    out_explain_report: Optional[report_generator.ExplainSolveReport] = None
) -> SafeSolution:
    """Computes a policy and a safe estimate of its return.

    Args:
        method: how the ambiguity sets are built.
        problem: rewards, discount, initial distribution and, for single-step
          problems, the successor values.
        dataset: observed transitions.
        posterior: posterior samples; required by BCI and RSVF. MeanTransition
          uses the posterior mean when given and the empirical model
          otherwise.
        options: solve options.
        out_explain_report: an output argument, if specified it will contain
          the explain report of the computation.

    Raises:
        ValueError: inconsistent inputs.
        SolverError: a linear program failed.
    """
    options = options or SolveOptions()
    method = MethodId(method)
    _check_inputs(method, problem, dataset, posterior)
    budget = make_budget(problem, options.delta)
    report = report_generator.ReportGenerator(options, method.value)
    if out_explain_report is not None:
        out_explain_report._set_report_generator(report)
    if posterior is not None:
        report.add_stage(
            f"Posterior: {posterior.num_samples} samples per state-action pair")
    report.add_stage(f"Budget: delta / {budget.num_pairs} = "
                     f"{budget.delta_per_pair:.6g} per state-action pair")

    diagnostics = None
    if method == MethodId.MEAN_TRANSITION:
        value, policy, sets, _ = _mean_transition(problem, dataset, posterior,
                                                  options, report)
    elif method == MethodId.RSVF:
        value, policy, sets, diagnostics = _rsvf(problem, dataset, posterior,
                                                 budget, options, report)
    else:
        if method == MethodId.HOEFFDING:
            sets = _hoeffding(problem, dataset, budget, options, report)
        elif method == MethodId.HOEFFDING_MONOTONE:
            sets = _hoeffding_monotone(problem, dataset, budget, options,
                                       report)
        else:
            sets = bayes.bci_ambiguity_set(posterior, budget)
            report.add_stage(
                f"BCI sets: {_psi_range(sets)} around the posterior mean")
        value, policy = _robust_solve(problem, sets, options.tol)
        if problem.is_single_step:
            report.add_stage("Robust Bellman update with fixed successor "
                             "values")
        else:
            report.add_stage(f"Robust value iteration with tol={options.tol}")

    safe_return = mdp.total_return(value, problem.initial_dist)
    report.add_stage(f"Safe return estimate: {safe_return:.6g}")
    logging.info("solve: %s estimated a safe return of %g", method.value,
                 safe_return)
    return SafeSolution(method, np.asarray(policy, dtype=int),
                        np.asarray(value, dtype=float), safe_return, sets,
                        budget, diagnostics)
