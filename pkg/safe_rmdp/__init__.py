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
from safe_rmdp.report_generator import ExplainSolveReport
from safe_rmdp.mdp import Dataset
from safe_rmdp.mdp import TabularMdp
from safe_rmdp.robust import AmbiguitySet
from safe_rmdp.robust import MonotoneConstraintSet
from safe_rmdp.frequentist_sets import ConfidenceBudget
from safe_rmdp.bayes import DirichletPosterior
from safe_rmdp.bayes import PosteriorSamples
from safe_rmdp.linear_programming import LpMethod
from safe_rmdp.linear_programming import SolverError
from safe_rmdp.rsvf import CenterAnchor
from safe_rmdp.rsvf import EmptyHalfspaceError
from safe_rmdp.rsvf import RsvfDiagnostics
from safe_rmdp.methods import MethodId
from safe_rmdp.methods import SafeSolution
from safe_rmdp.methods import SolveOptions
from safe_rmdp.methods import solve
from safe_rmdp.pipeline_backend import LocalBackend
from safe_rmdp.pipeline_backend import MultiProcLocalBackend
from safe_rmdp.pipeline_backend import PipelineBackend

__version__ = '0.1.0'
