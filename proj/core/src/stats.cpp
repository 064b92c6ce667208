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

#include "stainbench/stats.hpp"

#include <algorithm>
#include <cmath>

#include "stainbench/error.hpp"

namespace stainbench {
namespace {

// Value at fractional rank `pos` of `values`, selecting in [first, end).
double interpolated_at(std::span<double> values, std::size_t first, double pos) {
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  auto begin = values.begin();
  std::nth_element(begin + static_cast<std::ptrdiff_t>(first), begin + static_cast<std::ptrdiff_t>(lo),
                   values.end());
  const double a = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return a;
  // Smallest element above rank lo is the next order statistic.
  const double b = *std::min_element(begin + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + frac * (b - a);
}

void check(std::span<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("percentile outside [0, 100]");
}

}  // namespace

double percentile_inplace(std::span<double> values, double p) {
  check(values, p);
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  return interpolated_at(values, 0, pos);
}

PercentilePair percentiles_inplace(std::span<double> values, double p_low, double p_high) {
  check(values, p_low);
  check(values, p_high);
  if (p_low > p_high) throw ValidationError("percentile pair out of order");
  const double n1 = static_cast<double>(values.size() - 1);
  const double pos_low = p_low / 100.0 * n1;
  const double pos_high = p_high / 100.0 * n1;
  const double low = interpolated_at(values, 0, pos_low);
  // After the first selection everything at or above floor(pos_low) is >= it,
  // so the second selection can be restricted to that suffix.
  const double high = interpolated_at(values, static_cast<std::size_t>(std::floor(pos_low)), pos_high);
  return {low, high};
}

double percentile(std::vector<double> values, double p) { return percentile_inplace(values, p); }

}  // namespace stainbench
