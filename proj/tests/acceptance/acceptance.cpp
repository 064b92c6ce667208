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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "stainbench/bootstrap.hpp"
#include "stainbench/fid.hpp"
#include "stainbench/formats.hpp"
#include "stainbench/harness.hpp"
#include "stainbench/losses.hpp"
#include "stainbench/match.hpp"
#include "stainbench/png_io.hpp"
#include "stainbench/postproc.hpp"
#include "stainbench/stain.hpp"
#include "stainbench/synth.hpp"
#include "stainbench/tensor_io.hpp"

using namespace stainbench;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1 ---------------------------------------------------------------------

Outcome metric_arithmetic() {
  const double f1 = f1_from(0.686, 0.685);
  return {std::abs(f1 - 0.6855) <= 0.0005, fmt::format("f1(0.686, 0.685) = {:.6f}", f1)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome single_image_scenario() {
  // One bump on the annotated figure and one spurious bump elsewhere.
  SynthSpec spec;
  spec.image_id = "scenario";
  spec.width = spec.height = 512;
  spec.blobs = {{150, 140, 10, {1.0, 0.2}}};
  spec.fp_rate = 1.0;
  spec.seed = 1;
  const auto pm = make_probability_map(spec);
  if (pm.spurious.size() != 1) return {false, "generator did not plant the spurious bump"};

  const DetectionSet dets{spec.image_id, postprocess(pm.map)};
  const AnnotationSet anns{spec.image_id, 512, 512, "scanner", {{150, 140, spec.image_id}}};
  EvalConfig cfg;
  cfg.n_resamples = 100;
  const auto run = evaluate_run({dets}, {anns}, cfg);
  const auto& r = run.reports.front();
  const bool pass = dets.detections.size() == 2 && r.counts == Counts{1, 1, 0} && r.precision == 0.5 &&
                    r.recall == 1.0 && r.f1 == 2.0 / 3.0;
  return {pass, fmt::format("boxes={} tp={} fp={} fn={} P={} R={} F1={:.17g}", dets.detections.size(), r.counts.tp,
                            r.counts.fp, r.counts.fn, r.precision, r.recall, r.f1)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome macenko_recovery() {
  CorpusSpec c;
  c.count = 50;
  c.width = c.height = 512;
  c.scanner = "truth";
  c.seed = 2026;
  const auto truth = reference_stain_matrix();
  c.stain_matrix = truth;
  std::vector<RasterImage> imgs;
  for (const auto& spec : make_corpus(c)) imgs.push_back(make_stained(spec).image);

  const auto profile = fit_stain_profile(imgs);
  const double ah = angle_degrees(profile.stain_matrix.col(0), truth.col(0));
  const double ae = angle_degrees(profile.stain_matrix.col(1), truth.col(1));

  double err = 0;
  std::size_t n = 0;
  for (const auto& img : imgs) {
    const auto out = normalize(img, profile, profile);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      const auto* a = img.data().data() + 3 * i;
      bool tissue = true;
      for (int k = 0; k < 3; ++k) tissue &= intensity_to_od(a[k]) > 0.15;
      if (!tissue) continue;
      const auto* b = out.data().data() + 3 * i;
      for (int k = 0; k < 3; ++k) err += std::abs(int(a[k]) - int(b[k]));
      n += 3;
    }
  }
  const double mae = n ? err / static_cast<double>(n) : 1e9;
  return {ah < 2.0 && ae < 2.0 && mae <= 2.0,
          fmt::format("H {:.3f} deg, E {:.3f} deg, self-normalize MAE {:.3f} over {} tissue px", ah, ae, mae, n / 3)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome postprocess_oracle() {
  Rng rng(404);
  std::size_t boxes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pm = oracle::random_blobby_map(rng, 64, 64);
    const PostprocessOptions o;
    const auto got = postprocess(pm, o);
    const auto want = oracle::brute_force_postprocess(pm, o.threshold, o.box_size, o.min_extent);
    if (got.size() != want.size()) return {false, fmt::format("map {}: {} boxes vs {}", trial, got.size(), want.size())};
    for (std::size_t i = 0; i < got.size(); ++i) {
      const bool same = got[i].center_x == want[i].center_x && got[i].center_y == want[i].center_y &&
                        got[i].width == want[i].width && got[i].height == want[i].height &&
                        std::abs(*got[i].score - *want[i].score) <= 1e-12;
      if (!same) return {false, fmt::format("map {} box {} differs", trial, i)};
    }
    boxes += got.size();
  }
  return {true, fmt::format("200 maps, {} boxes identical", boxes)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome fid_checks() {
  Rng rng(505);
  const auto a = oracle::random_gaussian_set(rng, 500, 64);
  const double same = fid(a, a);

  FeatureSet x, y;
  x.vectors.resize(6, 1);
  y.vectors.resize(6, 1);
  x.vectors << -1.5, -0.5, 0.25, 0.75, 0.5, 0.5;
  y.vectors = x.vectors.array() + 2.0;
  const double gap = fid(x, y);

  const auto b = oracle::random_gaussian_set(rng, 500, 64, 0.1);
  const auto q = oracle::random_orthogonal(rng, 64);
  const double plain = fid(a, b);
  const double rotated = fid(FeatureSet{a.vectors * q}, FeatureSet{b.vectors * q});
  const bool pass = std::abs(same) <= 1e-8 && std::abs(gap - 4.0) <= 1e-8 && std::abs(plain - rotated) <= 1e-6;
  return {pass, fmt::format("identical {:.3e}, gap {:.12f}, rotation delta {:.3e}", same, gap, std::abs(plain - rotated))};
}

// ---- 6 ---------------------------------------------------------------------

// Per crop: Poisson(5) true figures, each found with probability 0.8, plus
// Poisson(1) spurious detections. Expected counts give the population F1.
constexpr double kFigures = 5.0;
constexpr double kHitRate = 0.8;
constexpr double kSpurious = 1.0;

std::vector<Counts> coverage_crops(Rng& rng, int n) {
  std::vector<Counts> crops;
  for (int i = 0; i < n; ++i) {
    Counts c;
    const auto m = oracle::poisson(rng, kFigures);
    for (std::uint64_t k = 0; k < m; ++k) (rng.bernoulli(kHitRate) ? c.tp : c.fn) += 1;
    c.fp = oracle::poisson(rng, kSpurious);
    crops.push_back(c);
  }
  return crops;
}

Outcome bootstrap_checks() {
  Rng rng(606);
  const auto crops = coverage_crops(rng, 100);
  BootstrapOptions o;
  o.seed = 42;
  o.threads = 1;
  const auto r1 = bootstrap_f1(crops, o);
  o.threads = 0;
  const auto r2 = bootstrap_f1(crops, o);
  const bool reproducible = r1.ci_low == r2.ci_low && r1.ci_high == r2.ci_high && r1.f1 == r2.f1;

  const std::vector<Counts> identical(100, Counts{2, 1, 1});
  const auto d = bootstrap_f1(identical, o);
  const bool zero_width = d.ci_low == d.ci_high;

  const double tp = kFigures * kHitRate;
  const double true_f1 = 2 * tp / (2 * tp + kSpurious + kFigures * (1 - kHitRate));
  int covered = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng gen(derive_seed(7001, trial));
    const auto sample = coverage_crops(gen, 100);
    BootstrapOptions t;
    t.seed = derive_seed(7002, trial);
    const auto r = bootstrap_f1(sample, t);
    covered += r.ci_low <= true_f1 && true_f1 <= r.ci_high;
  }
  return {reproducible && zero_width && covered >= 93,
          fmt::format("reproducible={} zero-width={} coverage {}/100 of true F1 {:.4f}", reproducible, zero_width,
                      covered, true_f1)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome loss_identities() {
  Rng rng(707);
  int focal_exact = 0;
  for (int i = 0; i < 100; ++i) {
    const auto p = oracle::random_probability_grid(rng, 16, 16);
    const auto y = oracle::random_binary_grid(rng, 16, 16);
    focal_exact += focal_loss(p, y, 0.0, 0.5) == 0.5 * bce(p, y);
  }
  const auto y = oracle::random_binary_grid(rng, 16, 16);
  const double dice = dice_loss(y, y);

  bool vanish = true;
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const auto a = oracle::random_feature_map(rng, 8, 6, 7);
    const auto b = oracle::random_feature_map(rng, 8, 6, 7);
    vanish &= style_loss(a, a) == 0.0 && content_loss(a, a) == 0.0;
    const double ws = oracle::naive_style_loss(a, b);
    const double wc = oracle::naive_content_loss(a, b);
    worst = std::max(worst, std::abs(style_loss(a, b) - ws) / ws);
    worst = std::max(worst, std::abs(content_loss(a, b) - wc) / wc);
  }
  return {focal_exact == 100 && dice == 0.0 && vanish && worst <= 1e-6,
          fmt::format("focal exact {}/100, dice(perfect) {}, vanish={}, max rel err {:.2e}", focal_exact, dice, vanish,
                      worst)};
}

// ---- 8 ---------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + STAINBENCH_CLI_PATH + "\" " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

Outcome throughput() {
  const auto dir = oracle::temp_dir("acceptance_throughput");

  SynthSpec big;
  big.width = big.height = 5120;
  big.seed = 8;
  Rng rng(808);
  for (int i = 0; i < 4000; ++i) {
    const double r = rng.uniform(7, 12);
    big.blobs.push_back({rng.uniform(20, 5100), rng.uniform(20, 5100), r, {rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)}});
  }
  write_png_rgb(dir / "big.png", make_stained(big).image);
  StainProfile source;
  source.stain_matrix = reference_stain_matrix();
  source.max_concentrations = {1.4, 1.4};
  StainProfile target = source;
  target.stain_matrix.col(0) = Eigen::Vector3d(0.65, 0.70, 0.29).normalized();
  target.stain_matrix.col(1) = Eigen::Vector3d(0.07, 0.99, 0.11).normalized();
  target.max_concentrations = {1.2, 1.0};
  write_text_file(dir / "source.json", stain_profile_to_json(source));
  write_text_file(dir / "target.json", stain_profile_to_json(target));

  auto t0 = Clock::now();
  const int norm_rc = run_cli(fmt::format("normalize {} --source {} --target {} -o {}", (dir / "big.png").string(),
                                          (dir / "source.json").string(), (dir / "target.json").string(),
                                          (dir / "big_norm.png").string()));
  const double norm_s = seconds_since(t0);

  // 500 images of 1024x1024 at 512 px crops: 2000 crops.
  CorpusSpec c;
  c.count = 500;
  c.width = c.height = 1024;
  c.tile_size = 512;
  c.blobs_per_image = 12;
  c.seed = 88;
  std::string dets = "[", anns = "[";
  Rng noise(809);
  for (const auto& spec : make_corpus(c)) {
    AnnotationSet a{spec.image_id, spec.width, spec.height, spec.scanner, {}};
    DetectionSet d{spec.image_id, {}};
    for (const auto& b : spec.blobs) {
      a.points.push_back({b.cx, b.cy, spec.image_id});
      if (noise.bernoulli(0.85)) d.detections.push_back({b.cx + noise.uniform(-5, 5), b.cy + noise.uniform(-5, 5), 50, 50, std::nullopt});
      if (noise.bernoulli(0.15)) d.detections.push_back({noise.uniform(0, 1023), noise.uniform(0, 1023), 50, 50, std::nullopt});
    }
    anns += (anns.size() > 1 ? "," : "") + annotation_set_to_json(a);
    dets += (dets.size() > 1 ? "," : "") + detection_set_to_json(d);
  }
  write_text_file(dir / "anns.json", anns + "]");
  write_text_file(dir / "dets.json", dets + "]");

  t0 = Clock::now();
  const int eval_rc = run_cli(fmt::format("evaluate --dets {} --anns {} --resamples 10000 --seed 1 -o {}",
                                          (dir / "dets.json").string(), (dir / "anns.json").string(),
                                          (dir / "report").string()));
  const double eval_s = seconds_since(t0);
  std::size_t crops = 0;
  if (eval_rc == 0) {
    const auto csv = read_text_file(dir / "report" / "report.csv");
    const auto pos = csv.find("\nall,");
    if (pos != std::string::npos) {
      const auto line = csv.substr(pos + 1, csv.find('\n', pos + 1) - pos - 1);
      std::vector<std::string> cols;
      std::size_t start = 0;
      for (std::size_t k; (k = line.find(',', start)) != std::string::npos; start = k + 1) cols.push_back(line.substr(start, k - start));
      cols.push_back(line.substr(start));
      if (cols.size() >= 10) crops = std::stoul(cols[9]);
    }
  }
  fs::remove_all(dir);
  const bool pass = norm_rc == 0 && eval_rc == 0 && crops == 2000 && norm_s <= 10.0 && eval_s <= 60.0;
  return {pass, fmt::format("normalize 5120x5120 {:.2f} s (rc {}), evaluate {} crops x 10000 resamples {:.2f} s (rc {})",
                            norm_s, norm_rc, crops, eval_s, eval_rc)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric arithmetic", metric_arithmetic},
      {"single-image TP/FP scenario", single_image_scenario},
      {"Macenko recovery", macenko_recovery},
      {"post-processing oracle equivalence", postprocess_oracle},
      {"FID identities", fid_checks},
      {"bootstrap reproducibility and coverage", bootstrap_checks},
      {"loss identities", loss_identities},
      {"throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu: %s  %s: %s [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
