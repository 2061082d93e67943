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
"""Solve Methods Test"""

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from safe_rmdp import bayes
from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import methods
from safe_rmdp import report_generator
from safe_rmdp import rsvf
from safe_rmdp.domains import DecisionProblem
from safe_rmdp.methods import MethodId


def mdp_problem(seed=0, num_states=3, num_actions=2):
    rng = np.random.default_rng(seed)
    problem = DecisionProblem(rng.uniform(size=(num_states, num_actions)), 0.9,
                              np.full(num_states, 1 / num_states))
    samples = rng.integers(0, num_states, size=(15 * num_states, 3))
    samples[:, 1] %= num_actions
    dataset = mdp.Dataset.from_samples(samples, num_states, num_actions)
    posterior = bayes.sample_posterior(bayes.dirichlet_posterior(1.0, dataset),
                                       100, seed)
    return problem, dataset, posterior


def single_step_problem(seed=0):
    rng = np.random.default_rng(seed)
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    problem = DecisionProblem(np.zeros((1, 1)), 1.0, np.ones(1), values)
    successors = rng.choice(5, size=20, p=rng.dirichlet(np.ones(5)))
    dataset = mdp.Dataset(tuple((0, 0, int(s)) for s in successors), 1, 1, 5)
    posterior = bayes.sample_posterior(bayes.dirichlet_posterior(1.0, dataset),
                                       500, seed)
    return problem, dataset, posterior


class MethodIdTest(parameterized.TestCase):

    @parameterized.parameters(("RSVF", MethodId.RSVF), ("rsvf", MethodId.RSVF),
                              ("HoeffdingMonotone",
                               MethodId.HOEFFDING_MONOTONE),
                              ("hoeffding_monotone",
                               MethodId.HOEFFDING_MONOTONE),
                              (" MeanTransition ", MethodId.MEAN_TRANSITION))
    def test_parse(self, name, expected):
        self.assertEqual(expected, MethodId.parse(name))

    def test_parse_unknown(self):
        with self.assertRaisesRegex(ValueError, "Unknown method 'UCRL'"):
            MethodId.parse("UCRL")

    def test_needs_posterior(self):
        self.assertEqual({MethodId.BCI, MethodId.RSVF},
                         {m for m in MethodId if m.needs_posterior})


class SolveOptionsTest(parameterized.TestCase):

    def test_lp_method_from_string(self):
        options = methods.SolveOptions(lp_method="highs")
        self.assertEqual(linear_programming.LpMethod.HIGHS, options.lp_method)

    def test_rsvf_anchor_from_string(self):
        options = methods.SolveOptions(rsvf_anchor="empirical")
        self.assertEqual(rsvf.CenterAnchor.EMPIRICAL, options.rsvf_anchor)
        self.assertEqual(rsvf.CenterAnchor.POSTERIOR_MEAN,
                         methods.SolveOptions().rsvf_anchor)

    @parameterized.named_parameters(
        dict(testcase_name="delta", kwargs=dict(delta=1.0),
             error="delta must be"),
        dict(testcase_name="tol", kwargs=dict(tol=0), error="tol must be"),
        dict(testcase_name="max_iter",
             kwargs=dict(max_iter=0),
             error="max_iter must be"),
        dict(testcase_name="lp_method",
             kwargs=dict(lp_method="cplex"),
             error="cplex"),
        dict(testcase_name="rsvf_anchor",
             kwargs=dict(rsvf_anchor="median"),
             error="median"),
    )
    def test_invalid(self, kwargs, error):
        with self.assertRaisesRegex(ValueError, error):
            methods.SolveOptions(**kwargs)


class BudgetTest(parameterized.TestCase):

    def test_mdp(self):
        problem, _, _ = mdp_problem(num_states=4, num_actions=3)
        budget = methods.make_budget(problem, 0.12)
        self.assertEqual((4, 3, 12), (budget.num_states, budget.num_actions,
                                      budget.num_pairs))
        self.assertAlmostEqual(0.01, budget.delta_per_pair)

    def test_single_step(self):
        problem, _, _ = single_step_problem()
        budget = methods.make_budget(problem, 0.05)
        self.assertEqual((5, 1, 1), (budget.num_states, budget.num_actions,
                                     budget.num_pairs))
        self.assertEqual(0.05, budget.delta_per_pair)


class SolveTest(parameterized.TestCase):

    def test_mean_transition_is_value_iteration(self):
        problem, dataset, _ = mdp_problem()
        solution = methods.solve(MethodId.MEAN_TRANSITION, problem, dataset)
        model = problem.to_mdp(mdp.empirical_model(dataset, 3, 2))
        v, policy = mdp.value_iteration(model)
        np.testing.assert_array_equal(v, solution.value)
        np.testing.assert_array_equal(policy, solution.policy)
        self.assertEqual(mdp.total_return(v, problem.initial_dist),
                         solution.safe_return)
        np.testing.assert_array_equal(0, solution.ambiguity_set.psi)
        self.assertIsNone(solution.diagnostics)

    def test_mean_transition_uses_posterior_mean(self):
        problem, dataset, posterior = mdp_problem()
        solution = methods.solve(MethodId.MEAN_TRANSITION, problem, dataset,
                                 posterior)
        np.testing.assert_allclose(bayes.posterior_mean(posterior),
                                   solution.ambiguity_set.nominal)

    @parameterized.parameters(MethodId.HOEFFDING, MethodId.HOEFFDING_MONOTONE,
                              MethodId.BCI, MethodId.RSVF)
    def test_robust_below_nominal(self, method):
        problem, dataset, posterior = mdp_problem(seed=1)
        solution = methods.solve(method, problem, dataset, posterior)
        nominal = methods.solve(MethodId.MEAN_TRANSITION, problem, dataset,
                                None if method in (
                                    MethodId.HOEFFDING,
                                    MethodId.HOEFFDING_MONOTONE) else posterior)
        if method != MethodId.RSVF:
            self.assertLessEqual(solution.safe_return,
                                 nominal.safe_return + 1e-4)
        self.assertEqual(method, solution.method)
        self.assertEqual((3,), solution.policy.shape)
        self.assertAlmostEqual(
            mdp.total_return(solution.value, problem.initial_dist),
            solution.safe_return)

    def test_monotone_not_below_hoeffding(self):
        problem, dataset, _ = mdp_problem(seed=2)
        options = methods.SolveOptions(good_turing=False)
        hoeffding = methods.solve(MethodId.HOEFFDING, problem, dataset,
                                  options=options)
        monotone = methods.solve(MethodId.HOEFFDING_MONOTONE, problem, dataset,
                                 options=options)
        self.assertGreaterEqual(monotone.safe_return,
                                hoeffding.safe_return - 1e-4)

    def test_rsvf_diagnostics(self):
        problem, dataset, posterior = mdp_problem(seed=3)
        solution = methods.solve(MethodId.RSVF, problem, dataset, posterior)
        self.assertIsNotNone(solution.diagnostics)
        self.assertGreaterEqual(solution.diagnostics.iterations, 1)

    @parameterized.parameters(list(MethodId))
    def test_single_step(self, method):
        problem, dataset, posterior = single_step_problem()
        solution = methods.solve(method, problem, dataset, posterior)
        self.assertEqual((1,), solution.value.shape)
        self.assertBetween(solution.safe_return, 1.0 - 1e-9, 5.0 + 1e-9)

    def test_single_step_rsvf_dominates_bci(self):
        problem, dataset, posterior = single_step_problem(seed=4)
        rsvf_solution = methods.solve(MethodId.RSVF, problem, dataset,
                                      posterior)
        bci_solution = methods.solve(MethodId.BCI, problem, dataset, posterior)
        self.assertGreaterEqual(rsvf_solution.safe_return,
                                bci_solution.safe_return - 1e-6)
        diagnostics = rsvf_solution.diagnostics
        self.assertEqual(1, diagnostics.iterations)

    def test_single_step_rsvf_anchor(self):
        problem, dataset, posterior = single_step_problem(seed=6)
        values = problem.terminal_values
        g = rsvf.quantile_threshold_g(posterior.for_pair(0, 0), values, 0.95)
        empirical = mdp.empirical_model(dataset, 1, 1)[0, 0] @ values
        estimates = {}
        for anchor in rsvf.CenterAnchor:
            options = methods.SolveOptions(rsvf_anchor=anchor)
            estimates[anchor] = methods.solve(MethodId.RSVF, problem, dataset,
                                              posterior, options).safe_return
        self.assertAlmostEqual(g,
                               estimates[rsvf.CenterAnchor.POSTERIOR_MEAN],
                               places=6)
        self.assertAlmostEqual(min(empirical, g),
                               estimates[rsvf.CenterAnchor.EMPIRICAL],
                               places=6)

    def test_mean_transition_single_step(self):
        problem, dataset, _ = single_step_problem()
        solution = methods.solve(MethodId.MEAN_TRANSITION, problem, dataset)
        expected = mdp.empirical_model(dataset, 1, 1)[0, 0] @ np.arange(1, 6)
        self.assertAlmostEqual(expected, solution.safe_return)

    @parameterized.parameters(MethodId.BCI, MethodId.RSVF)
    def test_requires_posterior(self, method):
        problem, dataset, _ = mdp_problem()
        with self.assertRaisesRegex(ValueError, "needs posterior samples"):
            methods.solve(method, problem, dataset)

    def test_dataset_mismatch(self):
        problem, _, _ = mdp_problem()
        with self.assertRaisesRegex(ValueError, "dataset dimensions"):
            methods.solve(MethodId.HOEFFDING, problem, mdp.Dataset((), 3, 3))

    def test_posterior_mismatch(self):
        problem, dataset, _ = mdp_problem()
        posterior = bayes.PosteriorSamples.point_mass(np.full((3, 1, 3), 1 / 3))
        with self.assertRaisesRegex(ValueError, "posterior samples of"):
            methods.solve(MethodId.BCI, problem, dataset, posterior)

    def test_deterministic(self):
        problem, dataset, posterior = mdp_problem(seed=5)
        first = methods.solve(MethodId.RSVF, problem, dataset, posterior)
        second = methods.solve(MethodId.RSVF, problem, dataset, posterior)
        self.assertEqual(first.safe_return, second.safe_return)
        np.testing.assert_array_equal(first.policy, second.policy)


class ExplainReportTest(parameterized.TestCase):

    def test_report(self):
        problem, dataset, posterior = single_step_problem()
        report = report_generator.ExplainSolveReport()
        solution = methods.solve(MethodId.BCI,
                                 problem,
                                 dataset,
                                 posterior,
                                 out_explain_report=report)
        text = report.text()
        self.assertTrue(text.startswith("Method: BCI\nSolveOptions:"))
        self.assertIn(" delta=0.05", text)
        self.assertIn(" lp_method=dense_simplex", text)
        self.assertIn("1. Posterior: 500 samples per state-action pair", text)
        self.assertIn("BCI sets: radius", text)
        self.assertIn(f"Safe return estimate: {solution.safe_return:.6g}",
                      text)

    def test_rsvf_report_after_solve(self):
        problem, dataset, posterior = mdp_problem()
        report = report_generator.ExplainSolveReport()
        methods.solve(MethodId.RSVF,
                      problem,
                      dataset,
                      posterior,
                      out_explain_report=report)
        self.assertRegex(report.text(), r"RSVF: \d+ iterations")
        self.assertIn("centered near the posterior mean", report.text())


if __name__ == '__main__':
    absltest.main()
