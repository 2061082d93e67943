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
"""CSV files of experiment results and the config echo."""

import csv
import json
import math
from typing import Iterable, List, TextIO

from safe_rmdp.methods import MethodId

from experiments import data_structures


def _format(value) -> str:
    if isinstance(value, MethodId):
        return value.value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_rows(f: TextIO, columns, rows):
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(getattr(row, c)) for c in columns])


def write_results(rows: Iterable[data_structures.ExperimentResult],
                  f: TextIO):
    _write_rows(f, data_structures.RESULT_COLUMNS, rows)


def write_aggregate(rows: Iterable[data_structures.AggregateRow], f: TextIO):
    _write_rows(f, data_structures.AGGREGATE_COLUMNS, rows)


def write_results_csv(rows: Iterable[data_structures.ExperimentResult],
                      path: str):
    with open(path, "w", newline="") as f:
        write_results(rows, f)


def write_aggregate_csv(rows: Iterable[data_structures.AggregateRow],
                        path: str):
    with open(path, "w", newline="") as f:
        write_aggregate(rows, f)


def read_results_csv(path: str) -> List[data_structures.ExperimentResult]:
    """Reads a file written by write_results_csv."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != data_structures.RESULT_COLUMNS:
            raise ValueError(
                f"{path}: expected columns "
                f"{','.join(data_structures.RESULT_COLUMNS)}.")
        return [
            data_structures.ExperimentResult(
                method=MethodId(row["method"]),
                sample_size=int(row["sample_size"]),
                replication=int(row["replication"]),
                seed=int(row["seed"]),
                safe_return=float(row["safe_return"]),
                true_return=float(row["true_return"]),
                true_opt=float(row["true_opt"]),
                regret=float(row["regret"]),
                violation=row["violation"] == "1",
                error=row["error"]) for row in reader
        ]


def write_config_echo(config: data_structures.RunConfig, output: str) -> str:
    """Writes the resolved config next to output and returns its path."""
    path = data_structures.config_echo_path(output)
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2)
        f.write("\n")
    return path


def format_summary(rows: Iterable[data_structures.AggregateRow]) -> str:
    """Fixed-width table of the aggregated statistics."""
    lines = [
        f"{'method':<18} {'n':>5} {'reps':>5} {'errors':>6} "
        f"{'mean regret':>12} {'std error':>10} {'violations':>10} "
        f"{'95% CI':>17}"
    ]
    for row in rows:
        ci = (f"[{row.violation_ci_low:.3f}, {row.violation_ci_high:.3f}]"
              if not math.isnan(row.violation_ci_low) else "-")
        lines.append(
            f"{row.method.value:<18} {row.sample_size:>5} "
            f"{row.replications:>5} {row.errors:>6} {row.mean_regret:>12.4f} "
            f"{row.std_error_regret:>10.4f} {row.violation_rate:>10.3f} "
            f"{ci:>17}")
    return "\n".join(lines)
