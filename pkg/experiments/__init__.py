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
from experiments.data_structures import AggregateRow
from experiments.data_structures import ExperimentResult
from experiments.data_structures import Protocol
from experiments.data_structures import RunConfig
from experiments.metrics import aggregate
from experiments.metrics import regret
from experiments.metrics import wilson_interval
from experiments.replication import run_experiment
from experiments.replication import run_replication
