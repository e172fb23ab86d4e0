// Copyright 2026 The lbpursuit Authors
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

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lbp/fem.hpp"
#include "lbp/spectrum.hpp"

namespace lbp
{

enum class FeatureKind { Indicator, Heat, Wks };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// Corresponding feature functions, one per column. Source and target sets
/// of a problem share column count and ordering.
struct FeatureSet {
    Eigen::MatrixXd values;
    FeatureKind kind = FeatureKind::Indicator;
    std::vector<int> landmarks;
    std::vector<int> steps;          ///< heat snapshot step counts
    double dt = 0.0;                 ///< heat step size
    std::vector<double> energies;    ///< WKS log-energies
    double sigma = 0.0;              ///< WKS bandwidth
};

/// Value 1 at each landmark, 0 elsewhere. The M-weighted inner product
/// against a basis then yields M_jj * Phi(j, :).
FeatureSet indicator_features(Eigen::Index num_vertices, const std::vector<int>& landmarks);

/// Crank-Nicolson heat diffusion from each landmark's indicator,
/// (M + dt/2 S) u+ = (M - dt/2 S) u, snapshot after each step count in `steps`.
/// Columns are landmark-major: (l0, s0), (l0, s1), ..., (l1, s0), ...
FeatureSet heat_features(const FemOperators& ops, const std::vector<int>& landmarks,
                         const std::vector<int>& steps, double dt);

/// Same scheme with the deformed mass diag(w) M diag(w).
FeatureSet heat_features(const DeformedOperators& dops, const std::vector<int>& landmarks,
                         const std::vector<int>& steps, double dt);

/// 0.5 * mean vertex mass.
double default_heat_dt(const FemOperators& ops);

/// Wave kernel signature WKS(x, e) = sum_i phi_i(x)^2 g_i(e) / sum_i g_i(e),
/// g_i(e) = exp(-(e - log lambda_i)^2 / (2 sigma^2)). One column per energy.
/// All eigenvalues must be positive.
Eigen::MatrixXd wks_signature(const EigenBasis& basis, const std::vector<double>& energies, double sigma);

/// Wave-kernel features anchored at landmarks: column (landmark y, energy e) is
/// sum_i phi_i(x) phi_i(y) g_i(e) / sum_i g_i(e). Its value at x = y equals
/// wks_signature(y, e). Landmark-major column order.
FeatureSet wks_features(const EigenBasis& basis, const std::vector<int>& landmarks,
                        const std::vector<double>& energies, double sigma);

/// Half the mean gap between consecutive log-eigenvalues.
double default_wks_sigma(const Eigen::VectorXd& values);
/// `count` log-energies evenly spaced over [log l_min + 2 sigma, log l_max - 2 sigma].
std::vector<double> default_wks_energies(const Eigen::VectorXd& values, int count, double sigma);

/// Eigenpairs with strictly positive eigenvalue (drops the constant mode).
EigenBasis nontrivial_part(const EigenBasis& basis, double threshold = 1e-8);

using LandmarkPairs = std::vector<std::pair<int, int>>;

/// Text file, one `source_index target_index` pair per line, zero-based.
LandmarkPairs read_landmarks(const std::filesystem::path& path);
void write_landmarks(const LandmarkPairs& pairs, const std::filesystem::path& path);

}  // namespace lbp
