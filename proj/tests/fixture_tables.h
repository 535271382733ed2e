// Copyright 2026 The petbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PETBENCH_TESTS_FIXTURE_TABLES_H_
#define PETBENCH_TESTS_FIXTURE_TABLES_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "petbench/data_core.h"

namespace petbench::testing {

// Seeded mixed table with dependent numeric and categorical columns.
// Two latent normals drive everything; "region" is independent noise.
inline DataTable MixedFixture(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<double> age(n), income(n);
  std::vector<std::string> job(n), region(n), label(n);
  const char* jobs[] = {"manual", "clerical", "technical", "manager"};
  const char* regions[] = {"north", "south", "west"};
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = normal(rng);
    const double z2 = 0.6 * z1 + 0.8 * normal(rng);
    age[i] = std::round(40.0 + 12.0 * z1);
    income[i] = std::round(std::exp(10.0 + 0.5 * z2));
    const double j = 0.7 * z2 + 0.7 * normal(rng);
    job[i] = jobs[j < -0.8 ? 0 : j < 0.0 ? 1 : j < 0.8 ? 2 : 3];
    region[i] = regions[pick(rng)];
    label[i] = z2 + 0.5 * normal(rng) > 0.3 ? "high" : "low";
  }
  return DataTable({Column::Numeric("age", age), Column::Categorical("job", job),
                    Column::Numeric("income", income), Column::Categorical("region", region),
                    Column::Categorical("label", label)});
}

}  // namespace petbench::testing

#endif  // PETBENCH_TESTS_FIXTURE_TABLES_H_
