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

#include <cmath>
#include <regex>

#include <Eigen/LU>

#include "doctest.h"
#include "oracles.hpp"
#include "stainbench/error.hpp"
#include "stainbench/stain.hpp"
#include "stainbench/synth.hpp"

using namespace stainbench;

namespace {

Eigen::Matrix<double, 3, 2> alternate_stain_matrix() {
  Eigen::Matrix<double, 3, 2> m;
  m << 0.650, 0.268, 0.704, 0.570, 0.286, 0.776;
  m.col(0).normalize();
  m.col(1).normalize();
  return m;
}

std::vector<RasterImage> corpus(const Eigen::Matrix<double, 3, 2>& m, int count, std::uint64_t seed) {
  CorpusSpec c;
  c.count = count;
  c.width = 256;
  c.height = 256;
  c.tile_size = 256;
  c.stain_matrix = m;
  c.blobs_per_image = 10;
  c.min_separation = 30;
  c.seed = seed;
  std::vector<RasterImage> out;
  for (const auto& spec : make_corpus(c)) out.push_back(make_stained(spec).image);
  return out;
}

bool is_tissue(const std::uint8_t* p, double beta = 0.15) {
  for (int c = 0; c < 3; ++c) {
    if (intensity_to_od(p[c]) <= beta) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fit recovers the generating stain matrix") {
  const auto truth = reference_stain_matrix();
  const auto imgs = corpus(truth, 20, 11);
  const auto profile = fit_stain_profile(imgs);
  CHECK(angle_degrees(profile.stain_matrix.col(0), truth.col(0)) < 2.0);
  CHECK(angle_degrees(profile.stain_matrix.col(1), truth.col(1)) < 2.0);
  CHECK_NOTHROW(validate(profile));
  CHECK(profile.max_concentrations[0] > 0.0);
  CHECK(profile.max_concentrations[1] > 0.0);

  const auto alt = alternate_stain_matrix();
  const auto alt_profile = fit_stain_profile(corpus(alt, 20, 12));
  CHECK(angle_degrees(alt_profile.stain_matrix.col(0), alt.col(0)) < 2.0);
  CHECK(angle_degrees(alt_profile.stain_matrix.col(1), alt.col(1)) < 2.0);
}

TEST_CASE("fit does not depend on the thread count") {
  const auto imgs = corpus(reference_stain_matrix(), 6, 4);
  StainFitOptions one;
  one.threads = 1;
  StainFitOptions four;
  four.threads = 4;
  const auto a = fit_stain_profile(imgs, one);
  const auto b = fit_stain_profile(imgs, four);
  CHECK(a.stain_matrix == b.stain_matrix);
  CHECK(a.max_concentrations == b.max_concentrations);
}

TEST_CASE("fit is stable under duplicating the corpus") {
  const auto imgs = corpus(reference_stain_matrix(), 8, 21);
  auto doubled = imgs;
  doubled.insert(doubled.end(), imgs.begin(), imgs.end());
  const auto a = fit_stain_profile(imgs);
  const auto b = fit_stain_profile(doubled);
  CHECK(angle_degrees(a.stain_matrix.col(0), b.stain_matrix.col(0)) <= 0.5);
  CHECK(angle_degrees(a.stain_matrix.col(1), b.stain_matrix.col(1)) <= 0.5);
}

TEST_CASE("fit error paths") {
  std::vector<RasterImage> white(3, RasterImage(64, 64, 255));
  CHECK_THROWS_WITH_AS(fit_stain_profile(white), "insufficient tissue", ValidationError);

  // Grey pixels all lie on the (1,1,1) optical density ray.
  Rng rng(8);
  std::vector<RasterImage> grey;
  for (int i = 0; i < 3; ++i) {
    RasterImage img(64, 64);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
      const auto v = static_cast<std::uint8_t>(20 + rng.below(150));
      img.data()[3 * p] = img.data()[3 * p + 1] = img.data()[3 * p + 2] = v;
    }
    grey.push_back(img);
  }
  CHECK_THROWS_WITH_AS(fit_stain_profile(grey), "degenerate stain plane", ValidationError);

  // Pixels along a single synthetic stain direction, quantized to 8 bits.
  SynthSpec spec;
  spec.width = spec.height = 64;
  spec.noise_sigma = 0.0;
  spec.blobs = {{32, 32, 30, {1.5, 0.0}}};
  const std::vector<RasterImage> single{make_stained(spec).image};
  CHECK_THROWS_WITH_AS(fit_stain_profile(single), "degenerate stain plane", ValidationError);

  CHECK_THROWS_AS(fit_stain_profile(std::vector<RasterImage>{}), ValidationError);
  StainFitOptions bad;
  bad.alpha = 50;
  CHECK_THROWS_AS(fit_stain_profile(grey, bad), ValidationError);
}

TEST_CASE("profile validation") {
  StainProfile p;
  p.stain_matrix = reference_stain_matrix();
  p.max_concentrations = {1.0, 1.0};
  CHECK_NOTHROW(validate(p));
  auto swapped = p;
  swapped.stain_matrix.col(0) = p.stain_matrix.col(1);
  swapped.stain_matrix.col(1) = p.stain_matrix.col(0);
  CHECK_THROWS_AS(validate(swapped), ValidationError);
  auto negative = p;
  negative.stain_matrix(2, 1) = -0.1;
  negative.stain_matrix.col(1).normalize();
  CHECK_THROWS_AS(validate(negative), ValidationError);
  auto zero = p;
  zero.max_concentrations[1] = 0.0;
  CHECK_THROWS_AS(validate(zero), ValidationError);
}

TEST_CASE("deconvolution examples") {
  StainProfile p;
  p.stain_matrix = reference_stain_matrix();
  p.max_concentrations = {1.0, 1.0};
  const auto c = deconvolve(p, p.stain_matrix.col(0));
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(c[1]) <= 1e-6);

  const auto white = concentrations(RasterImage(2, 2, 255), p);
  for (const auto& v : white.values) {
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }

  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d od(rng.uniform(0, 2.5), rng.uniform(0, 2.5), rng.uniform(0, 2.5));
    const auto got = deconvolve(p, od);
    const auto want = oracle::normal_equations_solve(p.stain_matrix, od);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-9));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-9));
  }

  const auto img = oracle::random_image(rng, 16, 16);
  const auto map = concentrations(img, p);
  const auto od = rgb_to_od(img);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto o = od.at(i);
    const auto want = oracle::normal_equations_solve(p.stain_matrix, Eigen::Vector3d(o[0], o[1], o[2]));
    CHECK(map.values[i][0] == doctest::Approx(want[0]).epsilon(1e-9));
    CHECK(map.values[i][1] == doctest::Approx(want[1]).epsilon(1e-9));
    CHECK(map.values[i][0] >= 0.0);
    CHECK(map.values[i][1] >= 0.0);
  }
}

TEST_CASE("normalize with identical profiles reproduces the image") {
  const auto imgs = corpus(reference_stain_matrix(), 6, 31);
  const auto p = fit_stain_profile(imgs);
  for (const auto& img : imgs) {
    const auto out = normalize(img, p, p);
    double err = 0;
    std::size_t n = 0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const auto* a = img.pixel(x, y);
        const auto* b = out.pixel(x, y);
        if (is_tissue(a)) {
          for (int c = 0; c < 3; ++c) err += std::abs(int(a[c]) - int(b[c]));
          n += 3;
        } else if (a[0] == 255 && a[1] == 255 && a[2] == 255) {
          for (int c = 0; c < 3; ++c) CHECK(b[c] >= 250);
        }
      }
    }
    REQUIRE(n > 0);
    CHECK(err / static_cast<double>(n) <= 2.0);
  }
}

TEST_CASE("normalized pixels lie in the target stain plane") {
  const auto a_imgs = corpus(reference_stain_matrix(), 6, 41);
  const auto b_imgs = corpus(alternate_stain_matrix(), 6, 42);
  const auto pa = fit_stain_profile(a_imgs);
  const auto pb = fit_stain_profile(b_imgs);
  const Eigen::Matrix<double, 3, 2> mb = pb.stain_matrix;
  const Eigen::Matrix3d projector = mb * (mb.transpose() * mb).inverse() * mb.transpose();
  const Eigen::Matrix3d residual_op = Eigen::Matrix3d::Identity() - projector;

  for (const auto& img : a_imgs) {
    const auto od = normalize_od(img, pa, pb);
    for (std::size_t i = 0; i < od.pixel_count(); ++i) {
      const auto o = od.at(i);
      CHECK((residual_op * Eigen::Vector3d(o[0], o[1], o[2])).norm() <= 1e-3);
    }
    // After 8-bit quantization the residual is bounded by the rounding error
    // of each channel in optical density units.
    const auto rgb = normalize(img, pa, pb);
    const auto back = rgb_to_od(rgb);
    for (std::size_t i = 0; i < back.pixel_count(); ++i) {
      const auto* px = rgb.data().data() + 3 * i;
      if (px[0] <= 1 || px[1] <= 1 || px[2] <= 1) continue;
      double bound = 0;
      for (int c = 0; c < 3; ++c) {
        const double step = std::log10(px[c] / (px[c] - 0.5));
        bound += step * step;
      }
      const auto o = back.at(i);
      CHECK((residual_op * Eigen::Vector3d(o[0], o[1], o[2])).norm() <= std::sqrt(bound) + 1e-9);
    }
  }
}

TEST_CASE("normalization is idempotent in profile space") {
  const auto a_imgs = corpus(reference_stain_matrix(), 10, 51);
  const auto b_imgs = corpus(alternate_stain_matrix(), 10, 52);
  const auto pa = fit_stain_profile(a_imgs);
  const auto pb = fit_stain_profile(b_imgs);
  std::vector<RasterImage> moved;
  for (const auto& img : a_imgs) moved.push_back(normalize(img, pa, pb));
  const auto refit = fit_stain_profile(moved);
  CHECK(angle_degrees(refit.stain_matrix.col(0), pb.stain_matrix.col(0)) <= 2.0);
  CHECK(angle_degrees(refit.stain_matrix.col(1), pb.stain_matrix.col(1)) <= 2.0);
}

TEST_CASE("normalize results do not depend on the thread count") {
  const auto imgs = corpus(reference_stain_matrix(), 2, 61);
  const auto p = fit_stain_profile(imgs);
  auto q = p;
  q.max_concentrations = {p.max_concentrations[0] * 1.3, p.max_concentrations[1] * 0.8};
  CHECK(normalize(imgs[0], p, q, 255.0, 1) == normalize(imgs[0], p, q, 255.0, 3));
}

TEST_CASE("profile JSON round trip") {
  StainProfile p;
  p.stain_matrix = alternate_stain_matrix();
  p.max_concentrations = {1.2345678901234567, 0.9876543210987654};
  const auto text = stain_profile_to_json(p);
  const auto back = stain_profile_from_json(text);
  CHECK((back.stain_matrix - p.stain_matrix).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(back.max_concentrations[0] == doctest::Approx(p.max_concentrations[0]).epsilon(1e-14));
  CHECK(text.find("1.23456789012346") != std::string::npos);
  CHECK(stain_profile_to_json(back) == text);
  CHECK_THROWS_AS(stain_profile_from_json("{}"), ValidationError);
  CHECK_THROWS_AS(stain_profile_from_json(R"({"stain_matrix": [[1,0],[0,1],[0,0]], "max_concentrations": [1]})"),
                  ValidationError);
}
