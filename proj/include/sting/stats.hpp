// Copyright 2026 The STING Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

namespace sting::stats {

/// Linear-interpolation percentile (q in [0, 1]) of already sorted values.
double percentile_sorted(std::span<const double> sorted, double q);
/// Sorts a copy; empty input is a precondition violation.
double percentile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct BoxStats {
  double min = 0, p25 = 0, median = 0, p75 = 0, max = 0;
};
BoxStats box(std::vector<double> values);

}  // namespace sting::stats
