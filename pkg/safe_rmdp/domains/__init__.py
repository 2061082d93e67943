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
"""Benchmark domains by name."""

import dataclasses
from typing import Dict, Mapping, NamedTuple, Optional, Type

from safe_rmdp.domains.base import DecisionProblem
from safe_rmdp.domains.base import Domain
from safe_rmdp.domains.base import GroundTruth
from safe_rmdp.domains.base import Observation
from safe_rmdp.domains.base import SingleStepTruth
from safe_rmdp.domains.population import PopulationDomain
from safe_rmdp.domains.population import PopulationParams
from safe_rmdp.domains.riverswim import RiverSwimDomain
from safe_rmdp.domains.riverswim import RiverSwimParams
from safe_rmdp.domains.single_state import DirichletSingleStateParams
from safe_rmdp.domains.single_state import InventoryDomain
from safe_rmdp.domains.single_state import InventoryParams
from safe_rmdp.domains.single_state import SingleStateDirichletDomain


class DomainEntry(NamedTuple):
    domain_class: Type[Domain]
    params_class: type


DOMAINS: Dict[str, DomainEntry] = {
    SingleStateDirichletDomain.name:
        DomainEntry(SingleStateDirichletDomain, DirichletSingleStateParams),
    InventoryDomain.name:
        DomainEntry(InventoryDomain, InventoryParams),
    RiverSwimDomain.name:
        DomainEntry(RiverSwimDomain, RiverSwimParams),
    PopulationDomain.name:
        DomainEntry(PopulationDomain, PopulationParams),
}


def _entry(name: str) -> DomainEntry:
    if name not in DOMAINS:
        raise ValueError(
            f"Unknown domain {name!r}, expected one of {sorted(DOMAINS)}.")
    return DOMAINS[name]


def default_params(name: str) -> dict:
    """Default parameters of the domain as a JSON compatible dict."""
    params = dataclasses.asdict(_entry(name).params_class())
    return {
        k: list(v) if isinstance(v, tuple) else v for k, v in params.items()
    }


def make_domain(name: str,
                overrides: Optional[Mapping[str, object]] = None) -> Domain:
    """Builds the domain with default parameters updated by overrides.

    Raises:
        ValueError: unknown domain, unknown parameter or invalid value.
    """
    entry = _entry(name)
    overrides = dict(overrides or {})
    known = {f.name for f in dataclasses.fields(entry.params_class)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ValueError(f"Unknown parameters {unknown} of domain {name!r}, "
                         f"expected some of {sorted(known)}.")
    return entry.domain_class(entry.params_class(**overrides))
