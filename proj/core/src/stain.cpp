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

#include "stainbench/stain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/parallel.hpp"
#include "stainbench/stats.hpp"

namespace stainbench {
namespace {

constexpr std::size_t kMinTissuePixels = 100;
constexpr double kMinSingularValue = 1e-9;
constexpr double kMinStainAngleDeg = 1.0;
constexpr double kNegativeTolerance = 1e-6;
constexpr double kOrderTieTolerance = 1e-12;

using Rgb = std::array<std::uint8_t, 3>;

Eigen::Vector3d od_of(const Rgb& px, const std::array<double, 256>& lut) {
  return {lut[px[0]], lut[px[1]], lut[px[2]]};
}

// Folds one row into the 3x3 upper-triangular factor R of the rows seen so
// far (Givens rotations), so R^T R equals the pooled scatter matrix while
// keeping the singular values accurate to machine precision.
void qr_append_row(Eigen::Matrix3d& r, Eigen::Vector3d row) {
  for (int k = 0; k < 3; ++k) {
    const double a = r(k, k);
    const double b = row(k);
    if (b == 0.0) continue;
    const double h = std::hypot(a, b);
    const double c = a / h;
    const double s = b / h;
    for (int j = k; j < 3; ++j) {
      const double rj = r(k, j);
      const double xj = row(j);
      r(k, j) = c * rj + s * xj;
      row(j) = -s * rj + c * xj;
    }
  }
}

// Chooses the sign of `v` that makes it non-negative (within tolerance),
// clamps residual negatives to 0 and renormalizes.
Eigen::Vector3d physical_direction(Eigen::Vector3d v) {
  if (v.minCoeff() < -kNegativeTolerance) {
    v = -v;
    if (v.minCoeff() < -kNegativeTolerance) throw ValidationError("non-physical stain vector");
  }
  v = v.cwiseMax(0.0);
  const double n = v.norm();
  if (n == 0.0) throw ValidationError("non-physical stain vector");
  return v / n;
}

Eigen::Matrix<double, 2, 3> pseudo_inverse(const Eigen::Matrix<double, 3, 2>& m) {
  const Eigen::Matrix2d gram = m.transpose() * m;
  return gram.inverse() * m.transpose();
}

}  // namespace

double angle_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

void validate(const StainProfile& profile) {
  const auto& m = profile.stain_matrix;
  for (int c = 0; c < 2; ++c) {
    if (!m.col(c).allFinite()) throw ValidationError("stain profile: non-finite entries");
    if (std::abs(m.col(c).norm() - 1.0) > 1e-9) throw ValidationError("stain profile: column is not unit norm");
    if (m.col(c).minCoeff() < 0.0) throw ValidationError("stain profile: negative stain entry");
    if (!(profile.max_concentrations[static_cast<std::size_t>(c)] > 0.0) ||
        !std::isfinite(profile.max_concentrations[static_cast<std::size_t>(c)])) {
      throw ValidationError("stain profile: concentration ceiling must be positive");
    }
  }
  if (angle_degrees(m.col(0), m.col(1)) <= kMinStainAngleDeg) {
    throw ValidationError("stain profile: stain columns are not independent");
  }
  if (m(0, 0) < m(0, 1)) throw ValidationError("stain profile: haematoxylin column must come first");
}

StainProfile fit_stain_profile(std::span<const RasterImage> images, const StainFitOptions& options) {
  if (images.empty()) throw ValidationError("fit_stain_profile: no images");
  if (!(options.alpha > 0.0 && options.alpha < 50.0)) throw ValidationError("alpha must be in (0, 50)");
  if (!(options.beta > 0.0)) throw ValidationError("beta must be > 0");
  if (!(options.ceiling_percentile > 0.0 && options.ceiling_percentile <= 100.0)) {
    throw ValidationError("ceiling percentile must be in (0, 100]");
  }
  const auto lut = od_lookup_table(options.i0);

  // A pixel is tissue iff every channel OD exceeds beta; OD is monotone in
  // intensity, so this is a per-channel intensity test.
  std::array<bool, 256> is_tissue_level{};
  for (int v = 0; v < 256; ++v) is_tissue_level[static_cast<std::size_t>(v)] = lut[static_cast<std::size_t>(v)] > options.beta;

  std::vector<std::vector<Rgb>> per_image(images.size());
  parallel_for(images.size(), options.threads, [&](std::size_t i) {
    const auto data = images[i].data();
    auto& out = per_image[i];
    for (std::size_t p = 0; p + 2 < data.size(); p += 3) {
      if (is_tissue_level[data[p]] && is_tissue_level[data[p + 1]] && is_tissue_level[data[p + 2]]) {
        out.push_back({data[p], data[p + 1], data[p + 2]});
      }
    }
  });
  std::vector<Rgb> tissue;
  for (auto& v : per_image) {
    tissue.insert(tissue.end(), v.begin(), v.end());
    std::vector<Rgb>().swap(v);
  }
  if (tissue.size() < kMinTissuePixels) throw ValidationError("insufficient tissue");

  Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
  for (const auto& px : tissue) qr_append_row(r, od_of(px, lut));
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullV);
  if (svd.singularValues()(1) < kMinSingularValue) throw ValidationError("degenerate stain plane");

  Eigen::Vector3d v1 = svd.matrixV().col(0);
  Eigen::Vector3d v2 = svd.matrixV().col(1);
  // The leading direction of a non-negative cloud is single-signed; pointing
  // it into the positive octant keeps every projection angle in (-pi/2, pi/2).
  if (v1.sum() < 0.0) v1 = -v1;
  Eigen::Index largest = 0;
  v2.cwiseAbs().maxCoeff(&largest);
  if (v2(largest) < 0.0) v2 = -v2;

  std::vector<double> angles(tissue.size());
  for (std::size_t i = 0; i < tissue.size(); ++i) {
    const Eigen::Vector3d od = od_of(tissue[i], lut);
    angles[i] = std::atan2(od.dot(v2), od.dot(v1));
  }
  const auto [phi_min, phi_max] = percentiles_inplace(angles, options.alpha, 100.0 - options.alpha);
  std::vector<double>().swap(angles);

  Eigen::Vector3d a = physical_direction(v1 * std::cos(phi_min) + v2 * std::sin(phi_min));
  Eigen::Vector3d b = physical_direction(v1 * std::cos(phi_max) + v2 * std::sin(phi_max));
  if (angle_degrees(a, b) <= kMinStainAngleDeg) throw ValidationError("degenerate stain plane");
  if (std::abs(a(0) - b(0)) <= kOrderTieTolerance) throw ValidationError("ambiguous stain order");
  // Eosin absorbs less red than haematoxylin.
  if (a(0) < b(0)) std::swap(a, b);

  StainProfile profile;
  profile.stain_matrix.col(0) = a;
  profile.stain_matrix.col(1) = b;

  std::vector<double> conc_h(tissue.size());
  std::vector<double> conc_e(tissue.size());
  for (std::size_t i = 0; i < tissue.size(); ++i) {
    const auto c = deconvolve(profile, od_of(tissue[i], lut));
    conc_h[i] = c[0];
    conc_e[i] = c[1];
  }
  profile.max_concentrations = {percentile_inplace(conc_h, options.ceiling_percentile),
                                percentile_inplace(conc_e, options.ceiling_percentile)};
  if (!(profile.max_concentrations[0] > 0.0 && profile.max_concentrations[1] > 0.0)) {
    throw ValidationError("degenerate stain plane");
  }
  return profile;
}

std::array<double, 2> deconvolve(const StainProfile& profile, const Eigen::Vector3d& od) {
  const Eigen::Vector2d c = pseudo_inverse(profile.stain_matrix) * od;
  return {std::max(0.0, c(0)), std::max(0.0, c(1))};
}

ConcentrationMap concentrations(const RasterImage& img, const StainProfile& profile, double i0) {
  validate(profile);
  const auto lut = od_lookup_table(i0);
  const Eigen::Matrix<double, 2, 3> pinv = pseudo_inverse(profile.stain_matrix);
  ConcentrationMap map{img.width(), img.height(), std::vector<std::array<double, 2>>(img.pixel_count())};
  const auto data = img.data();
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const Eigen::Vector3d od(lut[data[3 * i]], lut[data[3 * i + 1]], lut[data[3 * i + 2]]);
    const Eigen::Vector2d c = pinv * od;
    map.values[i] = {std::max(0.0, c(0)), std::max(0.0, c(1))};
  }
  return map;
}

OdImage normalize_od(const RasterImage& img, const StainProfile& source, const StainProfile& target, double i0,
                     unsigned threads) {
  validate(source);
  validate(target);
  const auto lut = od_lookup_table(i0);
  const Eigen::Matrix<double, 2, 3> pinv = pseudo_inverse(source.stain_matrix);
  const Eigen::Vector2d scale(target.max_concentrations[0] / source.max_concentrations[0],
                              target.max_concentrations[1] / source.max_concentrations[1]);
  const Eigen::Matrix<double, 3, 2>& out_basis = target.stain_matrix;

  OdImage out(img.width(), img.height());
  const auto src = img.data();
  auto dst = out.data();
  const auto width = static_cast<std::size_t>(img.width());
  parallel_for(static_cast<std::size_t>(img.height()), threads, [&](std::size_t row) {
    for (std::size_t i = row * width; i < (row + 1) * width; ++i) {
      const Eigen::Vector3d od(lut[src[3 * i]], lut[src[3 * i + 1]], lut[src[3 * i + 2]]);
      const Eigen::Vector2d c = (pinv * od).cwiseMax(0.0).cwiseProduct(scale);
      const Eigen::Vector3d mapped = out_basis * c;
      dst[3 * i] = mapped(0);
      dst[3 * i + 1] = mapped(1);
      dst[3 * i + 2] = mapped(2);
    }
  });
  return out;
}

RasterImage normalize(const RasterImage& img, const StainProfile& source, const StainProfile& target, double i0,
                      unsigned threads) {
  const OdImage od = normalize_od(img, source, target, i0, threads);
  RasterImage out(img.width(), img.height());
  const auto src = od.data();
  auto dst = out.data();
  const auto row_len = static_cast<std::size_t>(img.width()) * 3;
  parallel_for(static_cast<std::size_t>(img.height()), threads, [&](std::size_t row) {
    for (std::size_t i = row * row_len; i < (row + 1) * row_len; ++i) dst[i] = od_to_intensity(src[i], i0);
  });
  return out;
}

std::string stain_profile_to_json(const StainProfile& profile) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::string(buf);
  };
  const auto& m = profile.stain_matrix;
  std::string out = "{\n  \"stain_matrix\": [\n";
  for (int r = 0; r < 3; ++r) {
    out += "    [" + num(m(r, 0)) + ", " + num(m(r, 1)) + "]" + (r < 2 ? ",\n" : "\n");
  }
  out += "  ],\n  \"max_concentrations\": [" + num(profile.max_concentrations[0]) + ", " +
         num(profile.max_concentrations[1]) + "]\n}";
  return out;
}

StainProfile stain_profile_from_json(const std::string& text) {
  StainProfile p;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& rows = j.at("stain_matrix");
    if (!rows.is_array() || rows.size() != 3) throw ValidationError("stain profile: stain_matrix must be 3x2");
    for (int r = 0; r < 3; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (!row.is_array() || row.size() != 2) throw ValidationError("stain profile: stain_matrix must be 3x2");
      p.stain_matrix(r, 0) = row[0].get<double>();
      p.stain_matrix(r, 1) = row[1].get<double>();
    }
    const auto& mc = j.at("max_concentrations");
    if (!mc.is_array() || mc.size() != 2) throw ValidationError("stain profile: max_concentrations must have 2 entries");
    p.max_concentrations = {mc[0].get<double>(), mc[1].get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("stain profile: ") + e.what());
  }
  // Columns were rounded to 15 digits on output; restore exact unit norm.
  for (int c = 0; c < 2; ++c) {
    const double n = p.stain_matrix.col(c).norm();
    if (std::abs(n - 1.0) > 1e-12) throw ValidationError("stain profile: column is not unit norm");
    p.stain_matrix.col(c) /= n;
  }
  validate(p);
  return p;
}

}  // namespace stainbench
