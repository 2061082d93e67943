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
"""Replications of the dataset -> ambiguity set -> policy pipeline.

Replication i at sample size n draws the ground truth, the dataset and the
posterior samples from seeds derived from (master seed, n, i). All methods
of a replication see the same data, so methods are compared on paired
samples.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from safe_rmdp import bayes
from safe_rmdp import domains
from safe_rmdp import methods
from safe_rmdp import pipeline_backend
from safe_rmdp import sampling_utils

from experiments import data_structures
from experiments import metrics


def replication_seed(master_seed: int, sample_size: int,
                     replication: int) -> int:
    return sampling_utils.derive_seed(master_seed, sample_size, replication)


def fixed_truth_seed(master_seed: int) -> int:
    return sampling_utils.derive_seed(master_seed, "truth")


def run_methods(
    domain: domains.Domain,
    method_ids: Sequence[methods.MethodId],
    sample_size: int,
    options: methods.SolveOptions,
    seed: int,
    replication: int = 0,
    num_posterior_samples: int = bayes.DEFAULT_NUM_SAMPLES,
    truth: Optional[domains.GroundTruth] = None
) -> List[data_structures.ExperimentResult]:
    """Runs one replication for several methods on the same data.

    Failures are recorded in the error column of the affected rows and never
    raised.

    Args:
        domain: the benchmark.
        method_ids: methods to run.
        sample_size: samples per state-action pair.
        options: solve options shared by the methods.
        seed: seed of the replication.
        replication: index recorded in the rows.
        num_posterior_samples: posterior samples per state-action pair.
        truth: fixed ground truth; drawn from the prior when None.
    """
    try:
        if truth is None:
            truth = domain.sample_ground_truth(
                sampling_utils.derive_seed(seed, "truth"))
        observation = domain.simulate_dataset(
            truth, sample_size, sampling_utils.derive_seed(seed, "data"))
        true_opt = domain.optimal_return(truth)
        # MeanTransition solves the posterior mean model too.
        posterior = domain.sample_posterior(
            observation, num_posterior_samples,
            sampling_utils.derive_seed(seed, "posterior"))
    except Exception as e:  # pylint: disable=broad-except
        logging.warning("Replication %d with %d samples failed: %s",
                        replication, sample_size, e)
        return [
            data_structures.ExperimentResult.failed(method, sample_size,
                                                    replication, seed, repr(e))
            for method in method_ids
        ]

    rows = []
    for method in method_ids:
        try:
            solution = methods.solve(method, domain.problem,
                                     observation.dataset, posterior, options)
            true_return = domain.true_return(truth, solution.policy)
            rows.append(
                data_structures.ExperimentResult(
                    method=method,
                    sample_size=sample_size,
                    replication=replication,
                    seed=seed,
                    safe_return=solution.safe_return,
                    true_return=true_return,
                    true_opt=true_opt,
                    regret=metrics.regret(true_opt, solution.safe_return),
                    violation=bool(solution.safe_return > true_return)))
        except Exception as e:  # pylint: disable=broad-except
            logging.warning("%s failed in replication %d with %d samples: %s",
                            method.value, replication, sample_size, e)
            rows.append(
                data_structures.ExperimentResult.failed(
                    method, sample_size, replication, seed, repr(e)))
    return rows


def run_replication(domain: domains.Domain,
                    method: methods.MethodId,
                    sample_size: int,
                    delta: float,
                    seed: int,
                    num_posterior_samples: int = bayes.DEFAULT_NUM_SAMPLES,
                    **options) -> data_structures.ExperimentResult:
    """One replication of one method.

    Args:
        domain: the benchmark.
        method: the method.
        sample_size: samples per state-action pair.
        delta: total probability of failure.
        seed: seed of the replication.
        num_posterior_samples: posterior samples per state-action pair.
        **options: further fields of methods.SolveOptions.
    """
    solve_options = methods.SolveOptions(delta=delta, **options)
    return run_methods(domain, [methods.MethodId(method)], sample_size,
                       solve_options, seed, 0, num_posterior_samples)[0]


@dataclass(frozen=True)
class ReplicationTask:
    sample_size: int
    replication: int
    seed: int


class _ReplicationRunner:
    """Runs a task with all methods; picklable for worker processes."""

    def __init__(self, domain, config: data_structures.RunConfig, truth):
        self._domain = domain
        self._config = config
        self._options = config.solve_options()
        self._truth = truth

    def __call__(self, task: ReplicationTask):
        return run_methods(self._domain, self._config.methods,
                           task.sample_size, self._options, task.seed,
                           task.replication,
                           self._config.num_posterior_samples, self._truth)


def make_tasks(config: data_structures.RunConfig) -> List[ReplicationTask]:
    return [
        ReplicationTask(n, i, replication_seed(config.seed, n, i))
        for n in config.sample_sizes
        for i in range(config.replications)
    ]


def run_experiment(
    config: data_structures.RunConfig,
    backend: Optional[pipeline_backend.PipelineBackend] = None,
    domain: Optional[domains.Domain] = None
) -> List[data_structures.ExperimentResult]:
    """Runs every method on every replication of every sample size.

    Args:
        config: the experiment, resolved or not.
        backend: where replications run; derived from config.jobs when None.
        domain: the domain of config, built from config when None.

    Returns:
        rows ordered by sample size, replication and method.
    """
    if domain is None:
        domain = domains.make_domain(config.domain, config.domain_params)
    config = config.resolve(domain)
    if backend is None:
        backend = pipeline_backend.make_backend(config.jobs)
    truth = None
    if config.protocol == data_structures.Protocol.FIXED_TRUTH:
        truth = domain.sample_ground_truth(fixed_truth_seed(config.seed))
    logging.info(
        "Running %s: %d sample sizes x %d replications x %d methods",
        domain.name, len(config.sample_sizes), config.replications,
        len(config.methods))
    rows = backend.flat_map(make_tasks(config),
                            _ReplicationRunner(domain, config, truth),
                            "Run replications")
    return backend.to_list(rows, "Collect rows")
