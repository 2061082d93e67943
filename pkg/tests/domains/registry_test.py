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
"""Domain Registry Test"""

import json

from absl.testing import absltest
from absl.testing import parameterized

from safe_rmdp import domains


class RegistryTest(parameterized.TestCase):

    def test_names(self):
        self.assertEqual(
            {
                "single_state_dirichlet", "single_state_inventory",
                "riverswim", "population"
            }, set(domains.DOMAINS))

    @parameterized.parameters(sorted(domains.DOMAINS))
    def test_default_params_are_json(self, name):
        params = domains.default_params(name)
        self.assertEqual(params, json.loads(json.dumps(params)))

    def test_make_domain_with_overrides(self):
        domain = domains.make_domain("riverswim", {"num_states": 4})
        self.assertEqual(4, domain.problem.num_states)
        self.assertEqual("riverswim", domain.name)

    def test_make_domain_from_json_lists(self):
        domain = domains.make_domain("single_state_dirichlet",
                                     {"alpha": [2, 2, 2, 2, 2]})
        self.assertEqual((2.0,) * 5, domain.params.alpha)

    def test_unknown_domain(self):
        with self.assertRaisesRegex(ValueError, "Unknown domain 'gridworld'"):
            domains.make_domain("gridworld")

    def test_unknown_parameter(self):
        with self.assertRaisesRegex(ValueError, "Unknown parameters"):
            domains.make_domain("single_state_inventory", {"stock": 3})

    def test_invalid_value(self):
        with self.assertRaisesRegex(ValueError, "discount"):
            domains.make_domain("riverswim", {"discount": 1.0})


if __name__ == '__main__':
    absltest.main()
