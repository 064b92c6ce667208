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

#include "stainbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/parallel.hpp"
#include "stainbench/rng.hpp"

namespace stainbench {
namespace {

constexpr double kMaxNoiseSigma = 0.02;
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kPlantStream = 2;
constexpr std::uint64_t kPlacementStream = 3;
constexpr int kPlacementAttempts = 1000;

// Gaussian width whose kBumpPeak * exp(-r^2 / 2 sigma^2) = 0.5 level set is
// a disk of `radius`.
double bump_sigma(double radius) { return radius / std::sqrt(2.0 * std::log(kBumpPeak / 0.5)); }

void check_stain_matrix(const Eigen::Matrix<double, 3, 2>& m) {
  for (int c = 0; c < 2; ++c) {
    if (!m.col(c).allFinite() || m.col(c).minCoeff() < 0.0) {
      throw ValidationError("synth: stain matrix entries must be finite and non-negative");
    }
    if (std::abs(m.col(c).norm() - 1.0) > 1e-6) throw ValidationError("synth: stain matrix columns must be unit norm");
  }
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError(std::string("synth: ") + name + " must be in [0, 1]");
}

struct Placement {
  double x;
  double y;
};

// Uniform position for a disk of radius r, inside a random tile when tiles
// are in use.
Placement random_position(Rng& rng, int width, int height, int tile_size, double margin) {
  if (tile_size > 0 && tile_size <= width && tile_size <= height) {
    const int cols = width / tile_size;
    const int rows = height / tile_size;
    const auto t = static_cast<int>(rng.below(static_cast<std::uint64_t>(cols) * static_cast<std::uint64_t>(rows)));
    const double ox = (t % cols) * tile_size;
    const double oy = (t / cols) * tile_size;
    return {rng.uniform(ox + margin, ox + tile_size - 1 - margin), rng.uniform(oy + margin, oy + tile_size - 1 - margin)};
  }
  return {rng.uniform(margin, width - 1 - margin), rng.uniform(margin, height - 1 - margin)};
}

Eigen::Matrix<double, 3, 2> matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("stain_matrix must be 3 rows of 2");
  Eigen::Matrix<double, 3, 2> m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 2) throw ValidationError("stain_matrix must be 3 rows of 2");
    m(r, 0) = row[0].get<double>();
    m(r, 1) = row[1].get<double>();
  }
  return m;
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_matrix_opt(const nlohmann::json& j, Eigen::Matrix<double, 3, 2>& out) {
  if (j.contains("stain_matrix")) out = matrix_from_json(j.at("stain_matrix"));
}

SynthSpec parse_spec(const nlohmann::json& j) {
  SynthSpec s;
  read_opt(j, "image_id", s.image_id);
  read_opt(j, "scanner", s.scanner);
  read_opt(j, "width", s.width);
  read_opt(j, "height", s.height);
  read_matrix_opt(j, s.stain_matrix);
  read_opt(j, "background_od", s.background_od);
  read_opt(j, "fp_rate", s.fp_rate);
  read_opt(j, "fn_rate", s.fn_rate);
  read_opt(j, "noise_sigma", s.noise_sigma);
  read_opt(j, "seed", s.seed);
  read_opt(j, "spurious_clearance", s.spurious_clearance);
  read_opt(j, "tile_size", s.tile_size);
  if (j.contains("blobs")) {
    for (const auto& b : j.at("blobs")) {
      Blob blob;
      blob.cx = b.at("cx").get<double>();
      blob.cy = b.at("cy").get<double>();
      blob.radius = b.at("radius").get<double>();
      read_opt(b, "concentration", blob.concentration);
      s.blobs.push_back(blob);
    }
  }
  validate(s);
  return s;
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Eigen::Matrix<double, 3, 2> reference_stain_matrix() {
  Eigen::Matrix<double, 3, 2> m;
  m << 0.5626, 0.2159,
       0.7201, 0.8012,
       0.4062, 0.5581;
  m.col(0).normalize();
  m.col(1).normalize();
  return m;
}

SynthSpec::SynthSpec() : stain_matrix(reference_stain_matrix()) {}
CorpusSpec::CorpusSpec() : stain_matrix(reference_stain_matrix()) {}

void validate(const SynthSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw ValidationError("synth: image dimensions must be >= 1");
  check_stain_matrix(spec.stain_matrix);
  for (const double b : spec.background_od) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("synth: background_od must be finite and >= 0");
  }
  check_rate(spec.fp_rate, "fp_rate");
  check_rate(spec.fn_rate, "fn_rate");
  if (!(spec.noise_sigma >= 0.0 && spec.noise_sigma <= kMaxNoiseSigma)) {
    throw ValidationError("synth: noise_sigma must be in [0, 0.02]");
  }
  if (spec.tile_size < 0) throw ValidationError("synth: tile_size must be >= 0");
  for (const auto& b : spec.blobs) {
    if (!(b.radius > 0.0)) throw ValidationError("synth: blob radius must be > 0");
    if (!(b.cx >= 0.0 && b.cx <= spec.width - 1 && b.cy >= 0.0 && b.cy <= spec.height - 1)) {
      throw ValidationError("synth: blob centre outside image");
    }
    if (!(b.concentration[0] >= 0.0 && b.concentration[1] >= 0.0)) {
      throw ValidationError("synth: blob concentrations must be >= 0");
    }
  }
}

StainedImage make_stained(const SynthSpec& spec) {
  validate(spec);
  StainedImage out{RasterImage(spec.width, spec.height), {}};
  for (const auto& b : spec.blobs) out.annotations.push_back({b.cx, b.cy, spec.image_id});

  const std::uint64_t noise_seed = derive_seed(spec.seed, kNoiseStream);
  const auto width = static_cast<std::size_t>(spec.width);
  const Eigen::Vector3d background(spec.background_od[0], spec.background_od[1], spec.background_od[2]);
  auto pixels = out.image.data();

  // Rows are independent streams so rendering can be split across threads
  // without changing a single byte.
  parallel_for(static_cast<std::size_t>(spec.height), 0, [&](std::size_t row) {
    const double y = static_cast<double>(row);
    std::vector<std::array<double, 2>> conc(width, {0.0, 0.0});
    for (const auto& b : spec.blobs) {
      const double dy = y - b.cy;
      if (std::abs(dy) >= b.radius) continue;
      const auto x0 = static_cast<std::size_t>(std::max(0.0, std::ceil(b.cx - b.radius)));
      const auto x1 = static_cast<std::size_t>(std::min<double>(static_cast<double>(width) - 1, std::floor(b.cx + b.radius)));
      for (std::size_t x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) - b.cx;
        const double r = std::sqrt(dx * dx + dy * dy);
        if (r >= b.radius) continue;
        const double taper = 0.5 * (1.0 + std::cos(std::numbers::pi * r / b.radius));
        conc[x][0] += b.concentration[0] * taper;
        conc[x][1] += b.concentration[1] * taper;
      }
    }
    Rng rng(derive_seed(noise_seed, row));
    for (std::size_t x = 0; x < width; ++x) {
      Eigen::Vector3d od = background + spec.stain_matrix * Eigen::Vector2d(conc[x][0], conc[x][1]);
      if (spec.noise_sigma > 0.0) {
        for (int c = 0; c < 3; ++c) od(c) += spec.noise_sigma * rng.normal();
      }
      std::uint8_t* px = &pixels[3 * (row * width + x)];
      for (int c = 0; c < 3; ++c) px[c] = od_to_intensity(std::max(0.0, od(c)));
    }
  });
  return out;
}

SynthProbabilityMap make_probability_map(const SynthSpec& spec) {
  validate(spec);
  SynthProbabilityMap out;
  out.map = ProbabilityMap{spec.width, spec.height,
                           std::vector<double>(static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height), 0.0)};

  Rng rng(derive_seed(spec.seed, kPlantStream));
  for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
    const Blob& blob = spec.blobs[i];
    if (rng.bernoulli(spec.fn_rate)) out.dropped.push_back(i);
    else out.kept.push_back(i);
    if (!rng.bernoulli(spec.fp_rate)) continue;

    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const auto [x, y] = random_position(rng, spec.width, spec.height, spec.tile_size, blob.radius + 1.0);
      bool clear = true;
      for (const auto& b : spec.blobs) {
        const double d = std::hypot(x - b.cx, y - b.cy);
        if (d < spec.spurious_clearance || d < b.radius + blob.radius + 2.0) clear = false;
      }
      for (const auto& s : out.spurious) {
        if (std::hypot(x - s.cx, y - s.cy) < s.radius + blob.radius + 2.0) clear = false;
      }
      if (clear) {
        out.spurious.push_back({x, y, blob.radius, blob.concentration});
        break;
      }
    }
  }

  auto stamp = [&](const Blob& b) {
    const double sigma = bump_sigma(b.radius);
    const double reach = sigma * std::sqrt(2.0 * std::log(kBumpPeak / 1e-4));
    const int x0 = std::max(0, static_cast<int>(std::ceil(b.cx - reach)));
    const int x1 = std::min(spec.width - 1, static_cast<int>(std::floor(b.cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(b.cy - reach)));
    const int y1 = std::min(spec.height - 1, static_cast<int>(std::floor(b.cy + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        const double p = kBumpPeak * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        double& cell = out.map.data[static_cast<std::size_t>(y) * static_cast<std::size_t>(spec.width) +
                                    static_cast<std::size_t>(x)];
        cell = std::max(cell, p);
      }
    }
  };
  for (const auto i : out.kept) stamp(spec.blobs[i]);
  for (const auto& s : out.spurious) stamp(s);
  return out;
}

std::vector<SynthSpec> make_corpus(const CorpusSpec& corpus) {
  if (corpus.count < 1) throw ValidationError("corpus: count must be >= 1");
  if (corpus.blobs_per_image < 0) throw ValidationError("corpus: blobs_per_image must be >= 0");
  if (!(corpus.radius_min > 0.0 && corpus.radius_min <= corpus.radius_max)) {
    throw ValidationError("corpus: need 0 < radius_min <= radius_max");
  }
  if (corpus.tile_size < 1 || corpus.tile_size > corpus.width || corpus.tile_size > corpus.height) {
    throw ValidationError("corpus: tile_size must fit the image");
  }
  if (2.0 * (corpus.radius_max + 1.0) >= corpus.tile_size) throw ValidationError("corpus: blobs do not fit in a tile");
  for (int s = 0; s < 2; ++s) {
    const auto k = static_cast<std::size_t>(s);
    if (!(corpus.concentration_min[k] >= 0.0 && corpus.concentration_min[k] <= corpus.concentration_max[k])) {
      throw ValidationError("corpus: need 0 <= concentration_min <= concentration_max");
    }
  }
  check_rate(corpus.pure_fraction, "pure_fraction");

  const std::string prefix = corpus.id_prefix.empty() ? corpus.scanner : corpus.id_prefix;
  std::vector<SynthSpec> specs;
  for (int i = 0; i < corpus.count; ++i) {
    SynthSpec s;
    s.image_id = fmt::format("{}_{:04d}", prefix, i);
    s.scanner = corpus.scanner;
    s.width = corpus.width;
    s.height = corpus.height;
    s.stain_matrix = corpus.stain_matrix;
    s.background_od = corpus.background_od;
    s.fp_rate = corpus.fp_rate;
    s.fn_rate = corpus.fn_rate;
    s.noise_sigma = corpus.noise_sigma;
    s.seed = derive_seed(corpus.seed, static_cast<std::uint64_t>(i));
    s.tile_size = corpus.tile_size;

    Rng rng(derive_seed(s.seed, kPlacementStream));
    for (int b = 0; b < corpus.blobs_per_image; ++b) {
      for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        const double radius = rng.uniform(corpus.radius_min, corpus.radius_max);
        const auto [x, y] = random_position(rng, s.width, s.height, s.tile_size, corpus.radius_max + 1.0);
        bool clear = true;
        for (const auto& other : s.blobs) {
          if (std::hypot(x - other.cx, y - other.cy) < corpus.min_separation) clear = false;
        }
        if (!clear) continue;
        std::array<double, 2> c{rng.uniform(corpus.concentration_min[0], corpus.concentration_max[0]),
                                rng.uniform(corpus.concentration_min[1], corpus.concentration_max[1])};
        if (rng.bernoulli(corpus.pure_fraction)) {
          if (rng.bernoulli(0.5)) c[1] = 0.0;
          else c[0] = 0.0;
        }
        s.blobs.push_back({x, y, radius, c});
        break;
      }
    }
    validate(s);
    specs.push_back(std::move(s));
  }
  return specs;
}

Counts expected_counts(const SynthProbabilityMap& pm) {
  return {pm.kept.size(), pm.spurious.size(), pm.dropped.size()};
}

SynthSpec synth_spec_from_json(const std::string& text) {
  return guarded("synth spec", [&] { return parse_spec(nlohmann::json::parse(text)); });
}

std::vector<SynthSpec> synth_specs_from_json(const std::string& text) {
  return guarded("synth spec", [&] {
    const auto j = nlohmann::json::parse(text);
    std::vector<SynthSpec> specs;
    if (j.is_object() && j.contains("count")) return make_corpus(corpus_spec_from_json(text));
    if (j.is_object() && j.contains("images")) {
      for (const auto& item : j.at("images")) specs.push_back(parse_spec(item));
    } else if (j.is_array()) {
      for (const auto& item : j) {
        if (item.contains("count")) {
          auto more = make_corpus(corpus_spec_from_json(item.dump()));
          specs.insert(specs.end(), more.begin(), more.end());
        } else {
          specs.push_back(parse_spec(item));
        }
      }
    } else {
      specs.push_back(parse_spec(j));
    }
    return specs;
  });
}

CorpusSpec corpus_spec_from_json(const std::string& text) {
  return guarded("corpus spec", [&] {
    const auto j = nlohmann::json::parse(text);
    CorpusSpec c;
    read_opt(j, "scanner", c.scanner);
    read_opt(j, "id_prefix", c.id_prefix);
    read_opt(j, "count", c.count);
    read_opt(j, "width", c.width);
    read_opt(j, "height", c.height);
    read_opt(j, "tile_size", c.tile_size);
    read_matrix_opt(j, c.stain_matrix);
    read_opt(j, "background_od", c.background_od);
    read_opt(j, "blobs_per_image", c.blobs_per_image);
    read_opt(j, "radius_min", c.radius_min);
    read_opt(j, "radius_max", c.radius_max);
    read_opt(j, "concentration_min", c.concentration_min);
    read_opt(j, "concentration_max", c.concentration_max);
    read_opt(j, "pure_fraction", c.pure_fraction);
    read_opt(j, "min_separation", c.min_separation);
    read_opt(j, "fp_rate", c.fp_rate);
    read_opt(j, "fn_rate", c.fn_rate);
    read_opt(j, "noise_sigma", c.noise_sigma);
    read_opt(j, "seed", c.seed);
    check_stain_matrix(c.stain_matrix);
    return c;
  });
}

}  // namespace stainbench
