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
"""Experiment configuration and result rows."""

import dataclasses
import enum
import json
import math
from typing import Any, Dict, List, Optional, Sequence

from safe_rmdp import bayes
from safe_rmdp import input_validators
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import rsvf
from safe_rmdp.methods import MethodId
from safe_rmdp.methods import SolveOptions
from safe_rmdp.domains import base


class Protocol(enum.Enum):
    # A new ground truth is drawn from the prior in every replication.
    BAYESIAN = "bayesian"
    # One ground truth, drawn from the master seed, for all replications.
    FIXED_TRUTH = "fixed_truth"


@dataclasses.dataclass
class RunConfig:
    """Everything an experiment depends on.

    Fields set to None take the domain defaults in resolve().

    Attributes:
        domain: name of a domain in safe_rmdp.domains.DOMAINS.
        methods: methods to compare, all of them by default.
        delta: total probability of failure.
        sample_sizes: grid of samples per state-action pair.
        replications: number of replications per sample size.
        seed: master seed; all randomness derives from it.
        num_posterior_samples: posterior samples per state-action pair.
        max_iter: maximal number of RSVF iterations.
        tol: tolerance of (robust) value iteration.
        good_turing: Good-Turing support restriction of the Hoeffding sets;
          on for the sparse domains by default.
        lp_method: linear programming solver.
        rsvf_anchor: distribution the RSVF centers are pulled towards;
          the empirical frequencies for riverswim by default.
        protocol: how ground truths are drawn.
        jobs: number of worker processes.
        output: path of the per-replication CSV.
        aggregate_output: path of the aggregated CSV, next to output by
          default.
        domain_params: overrides of the domain parameters.
    """
    domain: str = "single_state_dirichlet"
    methods: Sequence[MethodId] = tuple(MethodId)
    delta: Optional[float] = None
    sample_sizes: Optional[Sequence[int]] = None
    replications: Optional[int] = None
    seed: int = 0
    num_posterior_samples: int = bayes.DEFAULT_NUM_SAMPLES
    max_iter: int = rsvf.DEFAULT_MAX_ITERATIONS
    tol: float = mdp.DEFAULT_TOLERANCE
    good_turing: Optional[bool] = None
    lp_method: Optional[linear_programming.LpMethod] = None
    rsvf_anchor: Optional[rsvf.CenterAnchor] = None
    protocol: Protocol = Protocol.BAYESIAN
    jobs: int = 1
    output: str = "results.csv"
    aggregate_output: Optional[str] = None
    domain_params: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.methods, str):
            self.methods = [self.methods]
        self.methods = tuple(
            m if isinstance(m, MethodId) else MethodId.parse(m)
            for m in self.methods)
        if not self.methods:
            raise ValueError("RunConfig: methods must not be empty.")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("RunConfig: methods must not repeat.")
        if self.delta is not None:
            input_validators.validate_delta(self.delta, "RunConfig")
        if self.sample_sizes is not None:
            self.sample_sizes = tuple(int(n) for n in self.sample_sizes)
            if not self.sample_sizes or min(self.sample_sizes) < 0:
                raise ValueError("RunConfig: sample_sizes must be a non-empty "
                                 "list of non-negative counts.")
        if self.replications is not None and self.replications < 1:
            raise ValueError(f"RunConfig: replications must be at least 1, "
                             f"not {self.replications}.")
        if self.num_posterior_samples < 1:
            raise ValueError("RunConfig: num_posterior_samples must be at "
                             f"least 1, not {self.num_posterior_samples}.")
        if self.max_iter < 1:
            raise ValueError(f"RunConfig: max_iter must be at least 1, not "
                             f"{self.max_iter}.")
        input_validators.validate_positive(self.tol, "tol", "RunConfig")
        if self.jobs < 1:
            raise ValueError(f"RunConfig: jobs must be at least 1, not "
                             f"{self.jobs}.")
        if self.lp_method is not None:
            self.lp_method = linear_programming.LpMethod(self.lp_method)
        if self.rsvf_anchor is not None:
            self.rsvf_anchor = rsvf.CenterAnchor(self.rsvf_anchor)
        self.protocol = Protocol(self.protocol)
        if not isinstance(self.domain_params, dict):
            raise ValueError("RunConfig: domain_params must be an object.")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """Builds a config, rejecting unknown keys."""
        if not isinstance(data, dict):
            raise ValueError("RunConfig: expected a JSON object.")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"RunConfig: unknown keys {unknown}, expected "
                             f"some of {sorted(known)}.")
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> 'RunConfig':
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def resolve(self, domain: base.Domain) -> 'RunConfig':
        """Returns a copy with the domain defaults filled in."""
        return dataclasses.replace(
            self,
            delta=self.delta if self.delta is not None else
            domain.default_delta,
            sample_sizes=self.sample_sizes or domain.default_sample_sizes,
            replications=self.replications or domain.default_replications,
            lp_method=self.lp_method or domain.default_lp_method,
            good_turing=(domain.default_good_turing
                         if self.good_turing is None else self.good_turing),
            rsvf_anchor=self.rsvf_anchor or domain.default_rsvf_anchor,
            aggregate_output=self.aggregate_output or
            aggregate_path(self.output),
            domain_params=domain.params_dict())

    def solve_options(self) -> SolveOptions:
        if self.delta is None:
            raise ValueError("RunConfig: resolve() the config first.")
        return SolveOptions(
            delta=self.delta,
            tol=self.tol,
            max_iter=self.max_iter,
            good_turing=bool(self.good_turing),
            lp_method=self.lp_method or
            linear_programming.LpMethod.DENSE_SIMPLEX,
            rsvf_anchor=self.rsvf_anchor or rsvf.CenterAnchor.POSTERIOR_MEAN)

    def to_dict(self) -> Dict[str, Any]:
        """JSON compatible dict, enums by their values."""
        result = {}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, enum.Enum):
                value = value.value
            elif field.name == "methods":
                value = [m.value for m in value]
            elif isinstance(value, tuple):
                value = list(value)
            elif field.name == "domain_params":
                value = {
                    k: list(v) if isinstance(v, tuple) else v
                    for k, v in value.items()
                }
            result[field.name] = value
        return result


def aggregate_path(output: str) -> str:
    """results.csv -> results.aggregate.csv"""
    stem = output[:-4] if output.endswith(".csv") else output
    return f"{stem}.aggregate.csv"


def config_echo_path(output: str) -> str:
    return f"{output}.config.json"


RESULT_COLUMNS = ("method", "sample_size", "replication", "seed",
                  "safe_return", "true_return", "true_opt", "regret",
                  "violation", "error")


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    """One replication of one method.

    Attributes:
        method: the method.
        sample_size: samples per state-action pair.
        replication: index of the replication.
        seed: seed of the replication, shared by all methods.
        safe_return: the method's estimate of the return of its policy.
        true_return: true return of the method's policy.
        true_opt: true optimal return.
        regret: |true_opt - safe_return|.
        violation: safe_return > true_return.
        error: message of the exception when the method failed, in which case
          the numbers are NaN.
    """
    method: MethodId
    sample_size: int
    replication: int
    seed: int
    safe_return: float
    true_return: float
    true_opt: float
    regret: float
    violation: bool
    error: str = ""

    @classmethod
    def failed(cls, method: MethodId, sample_size: int,
               replication: int, seed: int, error: str) -> 'ExperimentResult':
        return cls(method, sample_size, replication, seed, math.nan, math.nan,
                   math.nan, math.nan, False, error)

    @property
    def ok(self) -> bool:
        return not self.error


AGGREGATE_COLUMNS = ("method", "sample_size", "replications", "errors",
                     "mean_regret", "std_error_regret", "violation_rate",
                     "violation_ci_low", "violation_ci_high",
                     "mean_safe_return", "mean_true_return")


@dataclasses.dataclass(frozen=True)
class AggregateRow:
    """Statistics of the successful replications of a (method, sample size).

    Attributes:
        method: the method.
        sample_size: samples per state-action pair.
        replications: number of successful replications.
        errors: number of failed replications.
        mean_regret: mean of the regret.
        std_error_regret: standard error of mean_regret.
        violation_rate: fraction of replications with a violation.
        violation_ci_low: lower end of the Wilson 95% interval of the rate.
        violation_ci_high: upper end of the Wilson 95% interval of the rate.
        mean_safe_return: mean of the safe return estimates.
        mean_true_return: mean of the true returns of the policies.
    """
    method: MethodId
    sample_size: int
    replications: int
    errors: int
    mean_regret: float
    std_error_regret: float
    violation_rate: float
    violation_ci_low: float
    violation_ci_high: float
    mean_safe_return: float
    mean_true_return: float


def methods_in_order(rows: List[ExperimentResult]) -> List[MethodId]:
    """Methods in order of first appearance."""
    return list(dict.fromkeys(row.method for row in rows))
