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
"""Regret and violation statistics of experiment results."""

import collections
import math
from typing import Iterable, List, Tuple

import numpy as np
from scipy import stats

from experiments import data_structures


def regret(true_opt: float, safe_estimate: float) -> float:
    """|true_opt - safe_estimate|."""
    if not (math.isfinite(true_opt) and math.isfinite(safe_estimate)):
        raise ValueError(f"regret: inputs must be finite, got {true_opt} and "
                         f"{safe_estimate}.")
    return abs(true_opt - safe_estimate)


def wilson_interval(successes: int,
                    trials: int,
                    confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval of a binomial proportion."""
    if trials < 1:
        raise ValueError(f"wilson_interval: trials must be positive, not "
                         f"{trials}.")
    if not 0 <= successes <= trials:
        raise ValueError(f"wilson_interval: successes must be in [0, "
                         f"{trials}], not {successes}.")
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = successes / trials
    denominator = 1 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denominator
    half_width = z * math.sqrt(p * (1 - p) / trials +
                               z**2 / (4 * trials**2)) / denominator
    low = 0.0 if successes == 0 else max(0.0, center - half_width)
    high = 1.0 if successes == trials else min(1.0, center + half_width)
    return low, high


def _summarize(method, sample_size, rows) -> data_structures.AggregateRow:
    ok = [row for row in rows if row.ok]
    errors = len(rows) - len(ok)
    if not ok:
        return data_structures.AggregateRow(method, sample_size, 0, errors,
                                            *([math.nan] * 7))
    regrets = np.array([row.regret for row in ok])
    violations = sum(row.violation for row in ok)
    std_error = (float(regrets.std(ddof=1) / math.sqrt(len(ok)))
                 if len(ok) > 1 else 0.0)
    low, high = wilson_interval(violations, len(ok))
    return data_structures.AggregateRow(
        method=method,
        sample_size=sample_size,
        replications=len(ok),
        errors=errors,
        mean_regret=float(regrets.mean()),
        std_error_regret=std_error,
        violation_rate=violations / len(ok),
        violation_ci_low=low,
        violation_ci_high=high,
        mean_safe_return=float(np.mean([row.safe_return for row in ok])),
        mean_true_return=float(np.mean([row.true_return for row in ok])))


def aggregate(
    results: Iterable[data_structures.ExperimentResult]
) -> List[data_structures.AggregateRow]:
    """Statistics per (method, sample size).

    Rows with errors are counted but excluded from the statistics. Cells are
    ordered by method (first appearance) and then by sample size.
    """
    results = list(results)
    cells = collections.defaultdict(list)
    for row in results:
        cells[(row.method, row.sample_size)].append(row)
    order = {
        m: i for i, m in enumerate(data_structures.methods_in_order(results))
    }
    keys = sorted(cells, key=lambda key: (order[key[0]], key[1]))
    return [_summarize(method, n, cells[(method, n)]) for method, n in keys]
