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

#include <benchmark/benchmark.h>

#include <vector>

#include "stainbench/bootstrap.hpp"
#include "stainbench/fid.hpp"
#include "stainbench/match.hpp"
#include "stainbench/postproc.hpp"
#include "stainbench/rng.hpp"
#include "stainbench/stain.hpp"
#include "stainbench/synth.hpp"

using namespace stainbench;

namespace {

SynthSpec tissue_spec(int size, int blobs) {
  SynthSpec s;
  s.width = s.height = size;
  s.seed = 1;
  Rng rng(2);
  for (int i = 0; i < blobs; ++i) {
    s.blobs.push_back({rng.uniform(15, size - 15), rng.uniform(15, size - 15), rng.uniform(7, 12),
                       {rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)}});
  }
  return s;
}

StainProfile reference_profile() {
  StainProfile p;
  p.stain_matrix = reference_stain_matrix();
  p.max_concentrations = {1.4, 1.4};
  return p;
}

}  // namespace

static void BM_Normalize(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto img = make_stained(tissue_spec(size, size / 8)).image;
  const auto source = reference_profile();
  auto target = source;
  target.max_concentrations = {1.1, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(normalize(img, source, target, kDefaultReferenceWhite, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.pixel_count()));
}
BENCHMARK(BM_Normalize)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_FitStainProfile(benchmark::State& state) {
  std::vector<RasterImage> imgs;
  for (int i = 0; i < state.range(0); ++i) {
    auto spec = tissue_spec(512, 40);
    spec.seed = static_cast<std::uint64_t>(i);
    imgs.push_back(make_stained(spec).image);
  }
  StainFitOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_stain_profile(imgs, o));
}
BENCHMARK(BM_FitStainProfile)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Postprocess(benchmark::State& state) {
  auto spec = tissue_spec(static_cast<int>(state.range(0)), 60);
  spec.fp_rate = 0.1;
  const auto pm = make_probability_map(spec).map;
  for (auto _ : state) benchmark::DoNotOptimize(postprocess(pm));
}
BENCHMARK(BM_Postprocess)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_Match(benchmark::State& state) {
  Rng rng(3);
  std::vector<DetectionBox> dets;
  std::vector<AnnotationPoint> anns;
  for (int i = 0; i < state.range(0); ++i) {
    dets.push_back({rng.uniform(0, 4096), rng.uniform(0, 4096), 50, 50, std::nullopt});
    anns.push_back({rng.uniform(0, 4096), rng.uniform(0, 4096), "img"});
  }
  for (auto _ : state) benchmark::DoNotOptimize(match(dets, anns));
}
BENCHMARK(BM_Match)->Arg(100)->Arg(1000);

static void BM_Bootstrap(benchmark::State& state) {
  Rng rng(4);
  std::vector<Counts> crops;
  for (int i = 0; i < state.range(0); ++i) crops.push_back({rng.below(6), rng.below(3), rng.below(3)});
  BootstrapOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_f1(crops, o));
}
BENCHMARK(BM_Bootstrap)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Fid(benchmark::State& state) {
  const auto d = state.range(0);
  Rng rng(5);
  FeatureSet a, b;
  a.vectors.resize(500, d);
  b.vectors.resize(500, d);
  for (Eigen::Index i = 0; i < a.vectors.size(); ++i) {
    a.vectors.data()[i] = rng.normal();
    b.vectors.data()[i] = rng.normal() + 0.1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(fid(a, b));
}
BENCHMARK(BM_Fid)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
