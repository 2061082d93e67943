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
"""Population Test"""

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from safe_rmdp import linear_programming
from safe_rmdp import mdp
from safe_rmdp import sampling_utils
from safe_rmdp.domains import population
from safe_rmdp.domains.population import PopulationParams


class DiscretizeTest(parameterized.TestCase):

    def test_rows_are_distributions(self):
        params = PopulationParams()
        transitions = population.discretize(params.prior_mean, params, 2_000,
                                            sampling_utils.make_rng(0))
        self.assertEqual((20, 2, 20), transitions.shape)
        np.testing.assert_allclose(1.0, transitions.sum(axis=2))

    def test_no_treatment_effect(self):
        params = PopulationParams()
        transitions = population.discretize(np.array([1.3, 0.0, 0.0]), params,
                                            2_000, sampling_utils.make_rng(1))
        np.testing.assert_array_equal(transitions[:, 0], transitions[:, 1])

    def test_treatment_reduces_growth(self):
        params = PopulationParams()
        transitions = population.discretize(np.array([1.3, 0.05, 0.0]), params,
                                            5_000, sampling_utils.make_rng(2))
        levels = np.arange(20)
        expected_bin = transitions @ levels
        self.assertTrue(
            np.all(expected_bin[5:, 1] < expected_bin[5:, 0]))

    def test_capacity(self):
        params = PopulationParams(obs_sigma=0.0, growth_sigma=0.0)
        transitions = population.discretize(np.array([3.0, 0.0, 0.0]), params,
                                            1_000, sampling_utils.make_rng(3))
        # Tripling from the upper half of the range always hits the cap.
        np.testing.assert_array_equal(1.0, transitions[10:, 0, 19])

    def test_rewards(self):
        params = PopulationParams()
        rewards = population.population_rewards(params)
        self.assertEqual(-1.25, rewards[0, population.NO_TREATMENT])
        self.assertEqual(-11.25, rewards[0, population.TREATMENT])
        self.assertEqual(-48.75, rewards[19, population.NO_TREATMENT])


class ParameterPosteriorTest(parameterized.TestCase):

    def test_no_data_gives_prior(self):
        params = PopulationParams()
        mean, covariance = population.parameter_posterior(
            mdp.Dataset((), 20, 2), params)
        np.testing.assert_allclose(params.prior_mean, mean)
        np.testing.assert_allclose(np.diag(np.square(params.prior_std)),
                                   covariance,
                                   atol=1e-15)

    def test_data_moves_growth_rate(self):
        params = PopulationParams()
        # Doubling from bin 4 to bin 9 without treatment, observed many times.
        dataset = mdp.Dataset(((4, 0, 9),) * 200, 20, 2)
        features, ratios, weights = population.growth_regression(
            dataset, params)
        self.assertEqual((1, 3), features.shape)
        self.assertAlmostEqual(params.midpoints[9] / params.midpoints[4],
                               ratios[0])
        self.assertGreater(weights[0], 0)
        mean, covariance = population.parameter_posterior(dataset, params)
        self.assertGreater(mean[0], params.growth_rate)
        self.assertLess(covariance[0, 0], params.prior_std[0]**2)
        # No treatment data, so beta1 and beta2 keep their prior means.
        np.testing.assert_allclose(params.prior_mean[1:], mean[1:])

    def test_top_bin_is_censored(self):
        params = PopulationParams()
        dataset = mdp.Dataset(((15, 0, 19),), 20, 2)
        features, _, _ = population.growth_regression(dataset, params)
        self.assertEqual(0, features.shape[0])


class PopulationDomainTest(parameterized.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.domain = population.PopulationDomain(
            PopulationParams(posterior_discretization_steps=200))

    def test_defaults(self):
        self.assertEqual(0.10, self.domain.default_delta)
        self.assertEqual(linear_programming.LpMethod.HIGHS,
                         self.domain.default_lp_method)
        self.assertEqual((20, 2), self.domain.problem.rewards.shape)
        np.testing.assert_allclose(np.full(20, 0.05),
                                   self.domain.problem.initial_dist)

    def test_template_is_stochastic(self):
        np.testing.assert_allclose(
            1.0, self.domain.template.transitions.sum(axis=2))

    def test_ground_truth_is_deterministic(self):
        first = self.domain.sample_ground_truth(11)
        second = self.domain.sample_ground_truth(11)
        np.testing.assert_array_equal(first.transitions, second.transitions)
        self.assertEqual(0.9, first.discount)

    def test_posterior(self):
        truth = self.domain.sample_ground_truth(0)
        observation = self.domain.simulate_dataset(truth, 2, 1)
        posterior = self.domain.sample_posterior(observation, 3, 2)
        self.assertEqual((20, 2, 3, 20), posterior.samples.shape)
        np.testing.assert_allclose(1.0, posterior.samples.sum(axis=-1))

    @parameterized.named_parameters(
        dict(testcase_name="steps",
             kwargs=dict(discretization_steps=99_999),
             error="at least 100000"),
        dict(testcase_name="bins", kwargs=dict(num_bins=10), error="num_bins"),
        dict(testcase_name="prior_std",
             kwargs=dict(prior_std=(0.1, 0.1)),
             error="3 entries"),
        dict(testcase_name="sigma",
             kwargs=dict(obs_sigma=-1.0),
             error="obs_sigma must be non-negative"),
    )
    def test_invalid_params(self, kwargs, error):
        with self.assertRaisesRegex(ValueError, error):
            PopulationParams(**kwargs)


if __name__ == '__main__':
    absltest.main()
