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
"""Explain solve reports.

An explain report contains a human readable description of how a safe
estimate was computed. It includes
1. The solve options (i.e. safe_rmdp.methods.SolveOptions)
2. The main stages of the computation.

Example of the report

    Method: BCI
    SolveOptions:
     delta=0.05
     tol=1e-06
     max_iter=20
     good_turing=False
     lp_method=dense_simplex
     rsvf_anchor=posterior_mean
    Computation:
     1. Posterior: 1000 samples per state-action pair
     2. Budget: delta / 1 = 0.05 per state-action pair
     3. BCI sets: radius 0.3132 (min) .. 0.3132 (max) around the posterior mean
     4. Robust Bellman update with fixed successor values
     5. Safe return estimate: 2.7512
"""

import dataclasses
import enum
from typing import Callable, Optional, Union


def options_to_readable_string(options) -> str:
    """One line per field of a dataclass, enums by their values."""
    lines = [f"{type(options).__name__}:"]
    for field in dataclasses.fields(options):
        value = getattr(options, field.name)
        if isinstance(value, enum.Enum):
            value = value.value
        lines.append(f" {field.name}={value}")
    return "\n".join(lines)


class ReportGenerator:
    """Generates a report based on the options and stages of one solve.

    Each ReportGenerator corresponds to one solve which contains an ordered
    set of stages.
    """

    def __init__(self, options, method_name: str):
        self._options_str = None
        if options is not None:
            self._options_str = options_to_readable_string(options)
        self._method_name = method_name
        self._stages = []

    def add_stage(self, stage_description: Union[Callable, str]) -> None:
        """Add a stage description to the report.

        Args:
            stage_description: description of the stage. It might be a
              Callable that returns str, for descriptions which need results
              that are not available yet when the stage is added.
        """
        self._stages.append(stage_description)

    def report(self) -> str:
        """Constructs a report based on stages and options."""
        if not self._options_str:
            return ""
        result = [f"Method: {self._method_name}", self._options_str]
        result.append("Computation:")
        for i, stage_str in enumerate(self._stages):
            if callable(stage_str):
                stage_str = stage_str()
            result.append(f" {i+1}. {stage_str}")
        return "\n".join(result)


class ExplainSolveReport:
    """Container of the explain report of 1 solve."""

    def __init__(self):
        self._report_generator: Optional[ReportGenerator] = None

    def _set_report_generator(self, report_generator: ReportGenerator):
        self._report_generator = report_generator

    def text(self) -> str:
        """Returns the text of the report.

        Raises:
            ValueError when this function is called before the report was
              passed to methods.solve().
        """
        if self._report_generator is None:
            raise ValueError("The report_generator is not set.\nWas this object"
                             " passed as an argument to methods.solve()?")
        return self._report_generator.report()
