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
"""Command line of safe-rmdp.

Usage:
    safe-rmdp solve MDP_JSON DATASET_CSV [--method=RSVF] [--delta=0.05]
        [--seed=0] [--samples=1000] [--posterior=SAMPLES_CSV] [--explain]
        [--output=solution.json]
    safe-rmdp experiment CONFIG_JSON [--jobs=4] [--output=results.csv]
    safe-rmdp domains [--json]

Dashed spellings such as --max-iter are accepted as well.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 solver failure.
"""

import json
import sys

import numpy as np
from absl import app
from absl import flags
from absl import logging

from safe_rmdp import bayes
from safe_rmdp import domains
from safe_rmdp import linear_programming
from safe_rmdp import methods
from safe_rmdp import report_generator
from safe_rmdp import rsvf
from safe_rmdp import serialization

from experiments import data_structures
from experiments import metrics
from experiments import replication
from experiments import results

FLAGS = flags.FLAGS

flags.DEFINE_enum("method", methods.MethodId.RSVF.value,
                  [m.value for m in methods.MethodId],
                  "Method of the solve command.")
flags.DEFINE_float("delta", None, "Total probability of failure; 0.05 for "
                   "solve, the config value or domain default for experiment.")
flags.DEFINE_integer("seed", None, "Master seed, overrides the config.")
flags.DEFINE_integer("samples", None,
                     "Posterior samples per state-action pair.")
flags.DEFINE_integer("max_iter", None, "Maximal number of RSVF iterations.")
flags.DEFINE_integer("jobs", None, "Worker processes of the experiment.")
flags.DEFINE_string("output", None,
                    "Output file; stdout for solve when unset.")
flags.DEFINE_string("posterior", None,
                    "CSV of external posterior samples for solve.")
flags.DEFINE_float("prior_alpha", 1.0,
                   "Concentration of the uniform Dirichlet prior for solve.")
flags.DEFINE_enum("lp_method", None,
                  [m.value for m in linear_programming.LpMethod],
                  "Linear programming solver.")
flags.DEFINE_bool(
    "good_turing", None,
    "Good-Turing support restriction of the Hoeffding sets; off for solve, "
    "the config value or domain default for experiment.")
flags.DEFINE_enum(
    "rsvf_anchor", None, [a.value for a in rsvf.CenterAnchor],
    "Distribution the RSVF centers are pulled towards; empirical for solve, "
    "the config value or domain default for experiment.")
flags.DEFINE_bool("explain", False,
                  "Attach a readable description of the solve.")
flags.DEFINE_bool("json", False, "Machine readable output of domains.")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _write_output(text: str, output):
    if output:
        with open(output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _solve_posterior(method: methods.MethodId, dataset):
    if FLAGS.posterior:
        return bayes.ingest_posterior_samples(FLAGS.posterior)
    if not method.needs_posterior:
        return None
    posterior = bayes.dirichlet_posterior(FLAGS.prior_alpha, dataset)
    num_samples = FLAGS.samples or bayes.DEFAULT_NUM_SAMPLES
    return bayes.sample_posterior(posterior, num_samples, FLAGS.seed or 0)


def cmd_solve(mdp_path: str, dataset_path: str) -> int:
    """Emits the policy, value function, safe return and ambiguity set."""
    model = serialization.read_mdp_json(mdp_path)
    dataset = serialization.read_dataset_csv(dataset_path, model.num_states,
                                             model.num_actions)
    problem = domains.DecisionProblem(model.rewards, model.discount,
                                      model.initial_dist)
    method = methods.MethodId(FLAGS.method)
    options = methods.SolveOptions(
        delta=0.05 if FLAGS.delta is None else FLAGS.delta,
        max_iter=FLAGS.max_iter or rsvf.DEFAULT_MAX_ITERATIONS,
        good_turing=bool(FLAGS.good_turing),
        lp_method=FLAGS.lp_method or linear_programming.LpMethod.DENSE_SIMPLEX,
        rsvf_anchor=FLAGS.rsvf_anchor or rsvf.CenterAnchor.EMPIRICAL)
    posterior = _solve_posterior(method, dataset)
    report = report_generator.ExplainSolveReport()
    solution = methods.solve(method, problem, dataset, posterior, options,
                             report)
    result = serialization.solution_to_dict(solution)
    result["seed"] = FLAGS.seed or 0
    if FLAGS.explain:
        result["explain"] = report.text()
        sys.stderr.write(report.text() + "\n")
    _write_output(json.dumps(result, indent=2) + "\n", FLAGS.output)
    return EXIT_OK


def load_run_config(path: str) -> data_structures.RunConfig:
    """Reads the config and applies the command line overrides."""
    config = data_structures.RunConfig.load(path)
    overrides = {
        "delta": FLAGS.delta,
        "seed": FLAGS.seed,
        "num_posterior_samples": FLAGS.samples,
        "max_iter": FLAGS.max_iter,
        "jobs": FLAGS.jobs,
        "output": FLAGS.output,
        "lp_method": FLAGS.lp_method,
        "good_turing": FLAGS.good_turing,
        "rsvf_anchor": FLAGS.rsvf_anchor,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        if "output" in overrides and "aggregate_output" not in overrides:
            overrides["aggregate_output"] = None
        config = data_structures.RunConfig.from_dict({
            **config.to_dict(),
            **overrides
        })
    return config


def cmd_experiment(config_path: str) -> int:
    """Writes per-replication and aggregated CSVs and prints a summary."""
    config = load_run_config(config_path)
    domain = domains.make_domain(config.domain, config.domain_params)
    config = config.resolve(domain)
    echo = results.write_config_echo(config, config.output)
    logging.info("Resolved config written to %s", echo)
    rows = replication.run_experiment(config, domain=domain)
    results.write_results_csv(rows, config.output)
    summary = metrics.aggregate(rows)
    results.write_aggregate_csv(summary, config.aggregate_output)
    errors = sum(not row.ok for row in rows)
    if errors:
        logging.warning("%d of %d rows failed, see the error column of %s",
                        errors, len(rows), config.output)
    sys.stdout.write(results.format_summary(summary) + "\n")
    return EXIT_OK


def domains_listing() -> dict:
    listing = {}
    for name, entry in domains.DOMAINS.items():
        cls = entry.domain_class
        listing[name] = {
            "default_delta": cls.default_delta,
            "default_replications": cls.default_replications,
            "default_sample_sizes": list(cls.default_sample_sizes),
            "default_lp_method": cls.default_lp_method.value,
            "default_good_turing": cls.default_good_turing,
            "default_rsvf_anchor": cls.default_rsvf_anchor.value,
            "params": domains.default_params(name),
        }
    return listing


def cmd_domains_list() -> int:
    listing = domains_listing()
    if FLAGS.json:
        sys.stdout.write(json.dumps(listing, indent=2) + "\n")
        return EXIT_OK
    for name, info in listing.items():
        sys.stdout.write(f"{name}\n")
        for key, value in info["params"].items():
            sys.stdout.write(f"  {key}={value}\n")
    return EXIT_OK


_COMMANDS = {
    "solve": (cmd_solve, 2),
    "experiment": (cmd_experiment, 1),
    "domains": (cmd_domains_list, 0),
}


def run(argv) -> int:
    """Dispatches argv[1:] (flags already parsed) to a command.

    Raises:
        app.UsageError: unknown command or wrong number of arguments.
    """
    if len(argv) < 2 or argv[1] not in _COMMANDS:
        raise app.UsageError(
            f"Expected one of the commands {sorted(_COMMANDS)}.")
    command, num_args = _COMMANDS[argv[1]]
    args = argv[2:]
    if len(args) != num_args:
        raise app.UsageError(
            f"{argv[1]} takes {num_args} arguments, got {len(args)}.")
    try:
        return command(*args)
    except (linear_programming.SolverError, np.linalg.LinAlgError) as e:
        logging.error("Solver failure: %s", e)
        return EXIT_SOLVER
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        logging.error("Invalid input: %s", e)
        return EXIT_INPUT


def main(argv):
    return run(argv)


def normalize_flag_names(argv):
    """Rewrites --max-iter style flags to the defined --max_iter names.

    Arguments after a bare "--" and unknown flags are left as they are.
    """
    normalized = []
    for i, arg in enumerate(argv):
        if arg == "--":
            return normalized + list(argv[i:])
        if arg.startswith("--") and "-" in arg[2:].split("=", 1)[0]:
            name, sep, value = arg[2:].partition("=")
            candidate = name.replace("-", "_")
            negated = name[2:].lstrip("-").replace("-", "_")
            if candidate in FLAGS:
                arg = f"--{candidate}{sep}{value}"
            elif name.startswith("no") and negated in FLAGS:
                arg = f"--no{negated}{sep}{value}"
        normalized.append(arg)
    return normalized


def entry_point():
    app.run(main, argv=normalize_flag_names(sys.argv))


if __name__ == "__main__":
    entry_point()
