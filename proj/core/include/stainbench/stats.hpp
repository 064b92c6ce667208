// Copyright 2026 The stainbench Authors.
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

namespace stainbench {

/// Percentile p in [0, 100] with linear interpolation between order
/// statistics: position p/100 * (n - 1) in the sorted sample. Reorders
/// `values`. Throws ValidationError on an empty sample.
double percentile_inplace(std::span<double> values, double p);

/// Two percentiles of the same sample, sharing one partial sort.
struct PercentilePair {
  double low;
  double high;
};
PercentilePair percentiles_inplace(std::span<double> values, double p_low, double p_high);

/// Copying convenience wrapper around percentile_inplace.
double percentile(std::vector<double> values, double p);

}  // namespace stainbench
