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

#include "stainbench/bootstrap.hpp"

#include <vector>

#include "stainbench/error.hpp"
#include "stainbench/parallel.hpp"
#include "stainbench/rng.hpp"
#include "stainbench/stats.hpp"

namespace stainbench {

BootstrapResult bootstrap_f1(std::span<const Counts> units, const BootstrapOptions& options) {
  if (units.empty()) throw ValidationError("bootstrap needs at least one evaluation unit");
  if (options.n_resamples == 0) throw ValidationError("bootstrap needs n_resamples >= 1");
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw ValidationError("bootstrap confidence must be in (0, 1)");
  }

  Counts pooled;
  for (const auto& u : units) pooled += u;

  std::vector<double> f1s(options.n_resamples);
  const std::uint64_t n = units.size();
  parallel_for(options.n_resamples, options.threads, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, i));
    Counts sample;
    for (std::uint64_t k = 0; k < n; ++k) sample += units[rng.below(n)];
    f1s[i] = prf1(sample).f1;
  });

  const double tail = (1.0 - options.confidence) / 2.0 * 100.0;
  const auto [low, high] = percentiles_inplace(f1s, tail, 100.0 - tail);
  return {prf1(pooled).f1, low, high};
}

}  // namespace stainbench
