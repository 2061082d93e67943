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
"""File formats: datasets (CSV), MDPs and ambiguity sets (JSON) and solve
results."""

import csv
import json
from typing import Optional

import numpy as np

from safe_rmdp import mdp
from safe_rmdp import methods
from safe_rmdp import robust

DATASET_HEADER = ("s", "a", "sprime")
MDP_FIELDS = ("num_states", "num_actions", "discount", "rewards",
              "transitions", "initial_dist")


def read_dataset_csv(path: str,
                     num_states: int,
                     num_actions: int,
                     num_next_states: Optional[int] = None) -> mdp.Dataset:
    """Reads a CSV with header s,a,sprime and one sample per row."""
    samples = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != DATASET_HEADER:
            raise ValueError(f"{path}: expected header s,a,sprime.")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(
                    f"{path}:{line_number}: expected 3 fields, got {len(row)}.")
            try:
                samples.append(tuple(int(x) for x in row))
            except ValueError as e:
                raise ValueError(f"{path}:{line_number}: {e}") from e
    return mdp.Dataset(tuple(samples), num_states, num_actions,
                       num_next_states)


def write_dataset_csv(dataset: mdp.Dataset, path: str):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(DATASET_HEADER)
        writer.writerows(dataset.samples)


def mdp_to_dict(model: mdp.TabularMdp) -> dict:
    return {
        "num_states": model.num_states,
        "num_actions": model.num_actions,
        "discount": float(model.discount),
        "rewards": model.rewards.tolist(),
        "transitions": model.transitions.tolist(),
        "initial_dist": model.initial_dist.tolist(),
    }


def mdp_from_dict(data: dict) -> mdp.TabularMdp:
    """Parses an MDP, checking the declared sizes against the arrays.

    Raises:
        ValueError: missing or unknown fields, inconsistent sizes or invalid
          probabilities.
    """
    if not isinstance(data, dict):
        raise ValueError("MDP: expected a JSON object.")
    missing = [name for name in MDP_FIELDS if name not in data]
    if missing:
        raise ValueError(f"MDP: missing fields {missing}.")
    unknown = sorted(set(data) - set(MDP_FIELDS))
    if unknown:
        raise ValueError(f"MDP: unknown fields {unknown}.")
    model = mdp.TabularMdp(np.asarray(data["rewards"], dtype=float),
                           np.asarray(data["transitions"], dtype=float),
                           float(data["discount"]),
                           np.asarray(data["initial_dist"], dtype=float))
    if (model.num_states, model.num_actions) != (data["num_states"],
                                                 data["num_actions"]):
        raise ValueError(
            f"MDP: num_states={data['num_states']} and "
            f"num_actions={data['num_actions']} don't match rewards of shape "
            f"{model.rewards.shape}.")
    return model


def read_mdp_json(path: str) -> mdp.TabularMdp:
    with open(path) as f:
        return mdp_from_dict(json.load(f))


def write_mdp_json(model: mdp.TabularMdp, path: str):
    with open(path, "w") as f:
        json.dump(mdp_to_dict(model), f, indent=2)


def ambiguity_set_to_dict(sets: robust.AmbiguitySet) -> dict:
    result = {"nominal": sets.nominal.tolist(), "psi": sets.psi.tolist()}
    if sets.support_mask is not None:
        result["support_mask"] = sets.support_mask.tolist()
    if isinstance(sets, robust.MonotoneConstraintSet):
        result["constraints"] = "monotone"
    return result


def ambiguity_set_from_dict(data: dict) -> robust.AmbiguitySet:
    try:
        nominal, psi = data["nominal"], data["psi"]
    except KeyError as e:
        raise ValueError(f"AmbiguitySet: missing field {e}.") from e
    mask = data.get("support_mask")
    if data.get("constraints") == "monotone":
        return robust.MonotoneConstraintSet(nominal, psi, mask)
    return robust.AmbiguitySet(nominal, psi, mask)


def solution_to_dict(solution: methods.SafeSolution) -> dict:
    """JSON compatible description of a solve result."""
    budget = solution.budget
    result = {
        "method": solution.method.value,
        "policy": [int(a) for a in solution.policy],
        "value": [float(x) for x in solution.value],
        "safe_return": float(solution.safe_return),
        "budget": {
            "delta": float(budget.delta),
            "num_pairs": int(budget.num_pairs),
            "delta_per_pair": float(budget.delta_per_pair),
        },
        "ambiguity_set": ambiguity_set_to_dict(solution.ambiguity_set),
    }
    if solution.diagnostics is not None:
        result["diagnostics"] = solution.diagnostics.to_dict()
    return result
