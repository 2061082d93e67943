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
"""Metrics Test"""

import math

from absl.testing import absltest
from absl.testing import parameterized

from safe_rmdp.methods import MethodId

from experiments import data_structures
from experiments import metrics


def result(method, n, safe, true, opt, replication=0, error=""):
    if error:
        return data_structures.ExperimentResult.failed(method, n, replication,
                                                       0, error)
    return data_structures.ExperimentResult(method, n, replication, 0, safe,
                                            true, opt, abs(opt - safe),
                                            safe > true)


class RegretTest(parameterized.TestCase):

    @parameterized.parameters((10, 7, 3), (7, 10, 3), (2.5, 2.5, 0))
    def test_regret(self, true_opt, safe, expected):
        self.assertEqual(expected, metrics.regret(true_opt, safe))

    @parameterized.parameters((math.nan, 1.0), (1.0, math.inf))
    def test_not_finite(self, true_opt, safe):
        with self.assertRaisesRegex(ValueError, "must be finite"):
            metrics.regret(true_opt, safe)


class WilsonIntervalTest(parameterized.TestCase):

    def test_interval(self):
        low, high = metrics.wilson_interval(10, 200)
        self.assertAlmostEqual(0.0274, low, delta=1e-4)
        self.assertAlmostEqual(0.0896, high, delta=1e-4)

    def test_no_successes(self):
        low, high = metrics.wilson_interval(0, 200)
        self.assertEqual(0.0, low)
        self.assertAlmostEqual(0.0188, high, delta=1e-4)

    def test_all_successes(self):
        low, high = metrics.wilson_interval(50, 50)
        self.assertEqual(1.0, high)
        self.assertLess(low, 1.0)

    def test_wider_with_confidence(self):
        low95, high95 = metrics.wilson_interval(5, 40)
        low99, high99 = metrics.wilson_interval(5, 40, confidence=0.99)
        self.assertLess(low99, low95)
        self.assertGreater(high99, high95)

    @parameterized.parameters((1, 0), (-1, 10), (11, 10))
    def test_invalid(self, successes, trials):
        with self.assertRaises(ValueError):
            metrics.wilson_interval(successes, trials)


class AggregateTest(parameterized.TestCase):

    def test_statistics(self):
        rows = [
            result(MethodId.BCI, 5, 1.0, 2.0, 3.0),
            result(MethodId.BCI, 5, 2.5, 2.0, 3.0, replication=1),
            result(MethodId.BCI, 5, 2.0, 2.0, 4.0, replication=2),
        ]
        (row,) = metrics.aggregate(rows)
        self.assertEqual((MethodId.BCI, 5, 3, 0),
                         (row.method, row.sample_size, row.replications,
                          row.errors))
        # Regrets 2, 0.5 and 2.
        self.assertAlmostEqual(1.5, row.mean_regret)
        self.assertAlmostEqual(math.sqrt(0.75) / math.sqrt(3),
                               row.std_error_regret)
        self.assertAlmostEqual(1 / 3, row.violation_rate)
        self.assertLess(row.violation_ci_low, 1 / 3)
        self.assertGreater(row.violation_ci_high, 1 / 3)
        self.assertAlmostEqual(11 / 6, row.mean_safe_return)
        self.assertAlmostEqual(2.0, row.mean_true_return)

    def test_errors_are_excluded(self):
        rows = [
            result(MethodId.RSVF, 10, 1.0, 2.0, 2.0),
            result(MethodId.RSVF, 10, 0, 0, 0, replication=1, error="boom"),
        ]
        (row,) = metrics.aggregate(rows)
        self.assertEqual(1, row.replications)
        self.assertEqual(1, row.errors)
        self.assertEqual(1.0, row.mean_regret)
        self.assertEqual(0.0, row.std_error_regret)

    def test_only_errors(self):
        (row,) = metrics.aggregate(
            [result(MethodId.HOEFFDING, 10, 0, 0, 0, error="boom")])
        self.assertEqual(0, row.replications)
        self.assertTrue(math.isnan(row.mean_regret))
        self.assertTrue(math.isnan(row.violation_ci_low))

    def test_cell_order(self):
        rows = [
            result(MethodId.RSVF, 20, 1, 1, 1),
            result(MethodId.BCI, 20, 1, 1, 1),
            result(MethodId.RSVF, 5, 1, 1, 1),
            result(MethodId.BCI, 5, 1, 1, 1),
        ]
        cells = [(row.method, row.sample_size)
                 for row in metrics.aggregate(rows)]
        self.assertEqual([(MethodId.RSVF, 5), (MethodId.RSVF, 20),
                          (MethodId.BCI, 5), (MethodId.BCI, 20)], cells)


if __name__ == '__main__':
    absltest.main()
