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
"""Report Generator Test"""

import unittest

import safe_rmdp
from safe_rmdp.report_generator import ReportGenerator


class ReportGeneratorTest(unittest.TestCase):

    def test_report_empty(self):
        self.assertEqual("", ReportGenerator(None, "test_method").report())

    def test_report_options(self):
        expected_report = ("Method: test_method\n"
                           "SolveOptions:\n"
                           " delta=0.1\n"
                           " tol=1e-06\n"
                           " max_iter=5\n"
                           " good_turing=False\n"
                           " lp_method=highs\n"
                           " rsvf_anchor=posterior_mean\n"
                           "Computation:\n"
                           " 1. Stage1 \n"
                           " 2. Stage2")
        options = safe_rmdp.SolveOptions(delta=0.1,
                                         max_iter=5,
                                         good_turing=False,
                                         lp_method=safe_rmdp.LpMethod.HIGHS)
        report_generator = ReportGenerator(options, "test_method")
        report_generator.add_stage("Stage1 ")  # add string
        report_generator.add_stage(lambda: "Stage2")  # add lambda returning str
        self.assertEqual(expected_report, report_generator.report())

    def test_lazy_stage(self):
        report_generator = ReportGenerator(safe_rmdp.SolveOptions(), "RSVF")
        result = []
        report_generator.add_stage(lambda: f"{len(result)} iterations")
        result.extend([1, 2, 3])
        self.assertIn(" 1. 3 iterations", report_generator.report())


class ExplainSolveReportTest(unittest.TestCase):

    def test_report_empty(self):
        report = safe_rmdp.ExplainSolveReport()
        with self.assertRaisesRegex(ValueError,
                                    "The report_generator is not set"):
            report.text()

    def test_generate(self):
        report = safe_rmdp.ExplainSolveReport()
        report_generator = ReportGenerator(safe_rmdp.SolveOptions(),
                                           "test_method")
        report_generator.add_stage("stage 1")
        report_generator.add_stage("stage 2")
        report._set_report_generator(report_generator)

        text = report.text()
        self.assertIn("stage 1", text)
        self.assertIn("stage 2", text)


if __name__ == "__main__":
    unittest.main()
