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

#include "stainbench/fid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "stainbench/error.hpp"

namespace stainbench {

GaussianFit fit_gaussian(const FeatureSet& set) {
  if (set.n() < 2) throw ValidationError("FID needs at least 2 vectors per set");
  if (set.d() < 1) throw ValidationError("FID needs dimension >= 1");
  if (!set.vectors.allFinite()) throw ValidationError("feature vectors must be finite");
  GaussianFit g;
  g.mean = set.vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered = set.vectors.rowwise() - g.mean.transpose();
  g.covariance = (centered.transpose() * centered) / static_cast<double>(set.n() - 1);
  return g;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  if (eig.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double fid(const FeatureSet& a, const FeatureSet& b) {
  if (a.d() != b.d()) throw ValidationError("FID dimension mismatch");
  const GaussianFit ga = fit_gaussian(a);
  const GaussianFit gb = fit_gaussian(b);

  const Eigen::MatrixXd root_a = psd_sqrt(ga.covariance);
  Eigen::MatrixXd t = root_a * gb.covariance * root_a;
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  const double trace_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double mean_term = (ga.mean - gb.mean).squaredNorm();
  const double value = mean_term + ga.covariance.trace() + gb.covariance.trace() - 2.0 * trace_sqrt;
  // Rounding can leave a tiny negative for identical inputs.
  return std::max(0.0, value);
}

}  // namespace stainbench
