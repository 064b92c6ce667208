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

#include <cstddef>
#include <cstdint>
#include <span>

#include "stainbench/match.hpp"

namespace stainbench {

inline constexpr std::size_t kDefaultResamples = 10000;

struct BootstrapOptions {
  std::size_t n_resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  unsigned threads = 0;
};

struct BootstrapResult {
  double f1 = 0.0;  // pooled point estimate
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Percentile bootstrap of the pooled F1 over evaluation units (crops).
///
/// Resample i draws |units| units with replacement from the stream
/// Rng(derive_seed(seed, i)), pools their counts and records the F1. The
/// interval is the (1 - confidence)/2 and (1 + confidence)/2 percentiles of
/// the resampled F1 values (linear interpolation). The result is a pure
/// function of (units, options) regardless of thread count.
/// Throws ValidationError on empty input or n_resamples == 0.
BootstrapResult bootstrap_f1(std::span<const Counts> units, const BootstrapOptions& options = {});

}  // namespace stainbench
