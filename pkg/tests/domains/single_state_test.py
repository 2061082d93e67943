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
"""Single-state domains Test"""

import math

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from safe_rmdp import domains
from safe_rmdp.domains import single_state
from safe_rmdp.domains.single_state import InventoryParams


class DirichletSingleStateTest(parameterized.TestCase):

    def test_problem(self):
        problem = single_state.SingleStateDirichletDomain().problem
        self.assertTrue(problem.is_single_step)
        self.assertEqual((1, 1, 5), (problem.num_states, problem.num_actions,
                                     problem.num_next_states))
        np.testing.assert_array_equal([1, 2, 3, 4, 5], problem.terminal_values)
        self.assertEqual(1.0, problem.discount)

    def test_ground_truth_is_deterministic(self):
        domain = single_state.SingleStateDirichletDomain()
        first = domain.sample_ground_truth(7).transitions
        np.testing.assert_array_equal(first,
                                      domain.sample_ground_truth(7).transitions)
        self.assertFalse(
            np.array_equal(first, domain.sample_ground_truth(8).transitions))
        self.assertAlmostEqual(1.0, first.sum())

    def test_dataset_and_posterior(self):
        domain = single_state.SingleStateDirichletDomain()
        truth = domain.sample_ground_truth(0)
        observation = domain.simulate_dataset(truth, 30, 1)
        self.assertEqual(30, observation.dataset.counts[0, 0])
        posterior = domain.sample_posterior(observation, 40, 2)
        self.assertEqual((1, 1, 40, 5), posterior.samples.shape)

    def test_returns(self):
        domain = single_state.SingleStateDirichletDomain()
        truth = domain.sample_ground_truth(3)
        expected = truth.transitions[0, 0] @ np.arange(1, 6)
        self.assertAlmostEqual(expected, domain.true_return(truth, [0]))
        self.assertAlmostEqual(expected, domain.optimal_return(truth))

    def test_budget_has_one_pair(self):
        budget = single_state.SingleStateDirichletDomain().budget(0.05)
        self.assertEqual(1, budget.num_pairs)
        self.assertEqual(0.05, budget.delta_per_pair)

    def test_invalid_params(self):
        with self.assertRaisesRegex(ValueError, "same length"):
            single_state.DirichletSingleStateParams(alpha=(1, 1))
        with self.assertRaisesRegex(ValueError, "alpha must be positive"):
            single_state.DirichletSingleStateParams(alpha=(1, 1, 0, 1, 1))


class NormalMeanPosteriorTest(parameterized.TestCase):

    def test_single_observation(self):
        mean, std = single_state.normal_mean_posterior(3.0, 1.0, 1.0, [5.0])
        self.assertAlmostEqual(4.0, mean)
        self.assertAlmostEqual(math.sqrt(0.5), std)

    def test_no_observations(self):
        mean, std = single_state.normal_mean_posterior(3.0, 2.0, 1.0, [])
        self.assertEqual((3.0, 2.0), (mean, std))

    def test_many_observations(self):
        mean, std = single_state.normal_mean_posterior(0.0, 1.0, 1.0,
                                                       np.full(99, 2.0))
        self.assertAlmostEqual(1.98, mean)
        self.assertAlmostEqual(0.1, std)


class InventoryTest(parameterized.TestCase):

    def test_distribution_sums_to_one(self):
        params = InventoryParams()
        p = single_state.inventory_distribution([0.0, 2.5, 9.0], params)
        self.assertEqual((3, 5), p.shape)
        np.testing.assert_allclose(1.0, p.sum(axis=1))
        self.assertTrue(np.all(p >= 0))

    @parameterized.parameters((0.0, 4), (1.0, 3), (2.0, 2), (3.0, 1), (4.0, 0),
                              (9.0, 0), (-3.0, 4))
    def test_concentrated_demand(self, mean_demand, level_index):
        params = InventoryParams(demand_std=0.01)
        p = single_state.inventory_distribution(mean_demand, params)
        self.assertAlmostEqual(1.0, p[level_index], places=6)

    @parameterized.parameters((0.0, 4), (0.4, 4), (1.0, 3), (1.6, 2), (2.0, 2),
                              (3.4, 1), (4.6, 0), (12.0, 0), (-1.0, 4))
    def test_demand_to_level_index(self, demand, level_index):
        params = InventoryParams()
        self.assertEqual(
            level_index,
            single_state.demand_to_level_index(np.array([demand]), params)[0])

    def test_simulated_levels_match_demands(self):
        domain = single_state.InventoryDomain()
        truth = domain.sample_ground_truth(0)
        self.assertIsNotNone(truth.parameter)
        observation = domain.simulate_dataset(truth, 25, 1)
        self.assertLen(observation.outcomes, 25)
        levels = [s_next for _, _, s_next in observation.dataset.samples]
        np.testing.assert_array_equal(
            single_state.demand_to_level_index(observation.outcomes,
                                               domain.params), levels)

    def test_posterior(self):
        domain = single_state.InventoryDomain()
        observation = domain.simulate_dataset(domain.sample_ground_truth(4),
                                              10, 5)
        posterior = domain.sample_posterior(observation, 200, 6)
        self.assertEqual((1, 1, 200, 5), posterior.samples.shape)
        np.testing.assert_allclose(1.0, posterior.samples.sum(axis=-1))

    def test_posterior_needs_demands(self):
        domain = single_state.InventoryDomain()
        observation = domains.Observation(
            domain.simulate_dataset(domain.sample_ground_truth(0), 5,
                                    1).dataset)
        with self.assertRaisesRegex(ValueError, "observed demands"):
            domain.sample_posterior(observation, 10, 0)

    def test_invalid_params(self):
        with self.assertRaisesRegex(ValueError, "inventory must be at least 2"):
            InventoryParams(inventory=1)


if __name__ == '__main__':
    absltest.main()
