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

#include <Eigen/Core>

namespace stainbench {

/// n embedding vectors of dimension d, one per row.
struct FeatureSet {
  Eigen::MatrixXd vectors;

  Eigen::Index n() const noexcept { return vectors.rows(); }
  Eigen::Index d() const noexcept { return vectors.cols(); }
};

/// Sample mean and unbiased (1 / (n - 1)) covariance.
struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
GaussianFit fit_gaussian(const FeatureSet& set);

/// Symmetric PSD square root by eigendecomposition, negative eigenvalues
/// clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& symmetric);

/// Frechet distance between Gaussians fitted to `a` and `b`:
///   |mu_a - mu_b|^2 + Tr(S_a + S_b) - 2 Tr((S_a S_b)^(1/2)),
/// the last trace taken as sum(sqrt(eig(S_a^(1/2) S_b S_a^(1/2)))) with
/// negative eigenvalues clamped to zero.
/// Throws ValidationError on dimension mismatch, n < 2, or non-finite input.
double fid(const FeatureSet& a, const FeatureSet& b);

}  // namespace stainbench
