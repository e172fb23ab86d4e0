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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lbp/mesh.hpp"

namespace lbp
{

/// Inverse of the substitution Psibar = L diag(w) Psi.
Eigen::MatrixXd recover_basis(const Eigen::VectorXd& w, const Eigen::MatrixXd& psibar,
                              const Eigen::VectorXd& sqrt_mass);

/// Per-source-vertex target index.
struct Correspondence {
    std::vector<int> map;
    std::string method = "knn";
    int k = 0;

    std::size_t size() const { return map.size(); }
};

/// Exact nearest target row (Euclidean) for every source row; ties go to
/// the lowest index. Optional per-column weights scale both sides.
Correspondence point_map(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                         const Eigen::VectorXd* column_weights = nullptr);

/// Transfer of a source function: Psi Phi^T M1 h.
Eigen::VectorXd functional_map(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                               const Eigen::VectorXd& source_mass, const Eigen::VectorXd& h);

/// Edge-graph Dijkstra distances from `source` with Euclidean edge lengths.
Eigen::VectorXd graph_geodesics(const TriMesh& mesh, int source);

struct ErrorReport {
    Eigen::VectorXd errors;              ///< distance / sqrt(target area)
    std::vector<double> curve_x;
    std::vector<double> curve_fraction;  ///< fraction with error <= x
    double exact_fraction = 0.0;
    double frac_le_005 = 0.0;
    double mean = 0.0;
    double median = 0.0;
};

/// Normalized geodesic error of `map` against `truth` on the target mesh.
/// The curve samples x uniformly on [0, max_x].
ErrorReport geodesic_errors(const TriMesh& target, const Correspondence& map, const Correspondence& truth,
                            int samples = 101, double max_x = 0.25);

/// u(p) = 1/2 log(ring area on source at p / ring area on target at truth(p)).
Eigen::VectorXd conformal_ground_truth(const TriMesh& source, const TriMesh& target, const Correspondence& truth);

struct ConformalComparison {
    Eigen::VectorXd recovered;   ///< log w
    Eigen::VectorXd truth;
    double mean_abs_diff = 0.0;
    double max_abs_diff = 0.0;
    double relative_mad = 0.0;   ///< mean |u - u_gt| / mean |u_gt|; absolute when u_gt ~ 0
};

/// Compares log w on the target with a ground-truth log factor given per
/// source vertex and carried over by `truth`.
ConformalComparison compare_conformal(const Eigen::VectorXd& w, const Eigen::VectorXd& truth_u,
                                      const Correspondence& truth);

Correspondence read_correspondence(const std::filesystem::path& path);
void write_correspondence(const Correspondence& c, const std::filesystem::path& path);

/// `x,fraction` rows.
void write_error_curve(const ErrorReport& report, const std::filesystem::path& path);
/// {"exact_fraction", "frac_le_005", "mean", "median", "count"}.
void write_error_summary(const ErrorReport& report, const std::filesystem::path& path);
std::string error_summary_json(const ErrorReport& report);

}  // namespace lbp
