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
"""Result Files Test"""

import io
import json
import math
import os

from absl.testing import absltest
from absl.testing import parameterized

from safe_rmdp import domains
from safe_rmdp.methods import MethodId

from experiments import data_structures
from experiments import metrics
from experiments import results


def rows():
    return [
        data_structures.ExperimentResult(MethodId.BCI, 5, 0, 123, 0.1, 0.3,
                                         0.7, 0.6, False),
        data_structures.ExperimentResult(MethodId.RSVF, 5, 0, 123, 1 / 3, 0.2,
                                         0.7, 0.7 - 1 / 3, True),
        data_structures.ExperimentResult.failed(MethodId.HOEFFDING, 5, 0, 123,
                                                "ValueError('bad, input')"),
    ]


class WriteResultsTest(parameterized.TestCase):

    def test_format(self):
        f = io.StringIO()
        results.write_results(rows()[:2], f)
        lines = f.getvalue().splitlines()
        self.assertEqual(",".join(data_structures.RESULT_COLUMNS), lines[0])
        self.assertEqual("BCI,5,0,123,0.1,0.3,0.7,0.6,0,", lines[1])
        self.assertEqual(
            f"RSVF,5,0,123,{1 / 3!r},0.2,0.7,{0.7 - 1 / 3!r},1,", lines[2])

    def test_read_back(self):
        path = os.path.join(self.create_tempdir().full_path, "results.csv")
        results.write_results_csv(rows(), path)
        loaded = results.read_results_csv(path)
        self.assertEqual(rows()[:2], loaded[:2])
        self.assertEqual("ValueError('bad, input')", loaded[2].error)
        self.assertTrue(math.isnan(loaded[2].safe_return))

    def test_read_wrong_columns(self):
        path = os.path.join(self.create_tempdir().full_path, "results.csv")
        with open(path, "w") as f:
            f.write("method,n\nBCI,5\n")
        with self.assertRaisesRegex(ValueError, "expected columns"):
            results.read_results_csv(path)

    def test_aggregate(self):
        f = io.StringIO()
        results.write_aggregate(metrics.aggregate(rows()), f)
        lines = f.getvalue().splitlines()
        self.assertEqual(",".join(data_structures.AGGREGATE_COLUMNS), lines[0])
        self.assertLen(lines, 4)
        self.assertTrue(lines[3].startswith("Hoeffding,5,0,1,nan,"))


class ConfigEchoTest(parameterized.TestCase):

    def test_echo(self):
        output = os.path.join(self.create_tempdir().full_path, "out.csv")
        config = data_structures.RunConfig(output=output).resolve(
            domains.make_domain("single_state_dirichlet"))
        path = results.write_config_echo(config, output)
        self.assertEqual(output + ".config.json", path)
        with open(path) as f:
            echo = json.load(f)
        self.assertEqual(config.to_dict(), echo)


class FormatSummaryTest(parameterized.TestCase):

    def test_summary(self):
        summary = results.format_summary(metrics.aggregate(rows()))
        lines = summary.splitlines()
        self.assertLen(lines, 4)
        self.assertIn("mean regret", lines[0])
        self.assertTrue(lines[1].startswith("BCI"))
        self.assertIn("[", lines[1])
        self.assertTrue(lines[3].rstrip().endswith("-"))


if __name__ == '__main__':
    absltest.main()
