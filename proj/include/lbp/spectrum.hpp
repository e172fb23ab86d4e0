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

#include <cstdint>

#include <Eigen/Core>

#include "lbp/fem.hpp"
#include "lbp/stiefel.hpp"

namespace lbp
{

/// Which inner product the eigenfunction columns are orthonormal against.
enum class Metric { Mass, Euclidean };

struct EigenBasis {
    Eigen::VectorXd values;     ///< ascending
    Eigen::MatrixXd vectors;    ///< n x k
    Metric metric = Metric::Mass;

    Eigen::Index size() const { return values.size(); }
};

struct EigenOptions {
    int block_size = 8;          ///< must cover the largest eigenvalue multiplicity of interest
    int max_dimension = 0;       ///< search-space cap; 0 selects max(2k + 2 * block, k + 40)
    int max_restarts = 200;
    double tolerance = 1e-10;    ///< relative Ritz residual of the shift-inverted operator
    std::uint64_t seed = 7;
};

/**
 * The k smallest eigenpairs of S f = lambda M f, M-orthonormal.
 *
 * Shift-invert around a small negative shift with one sparse LDLT of S + tau M.
 * Search directions are grown in blocks (so repeated eigenvalues are found),
 * converged Ritz vectors stay locked in the basis, and the space is thick
 * restarted once it reaches max_dimension. Each eigenvector's first entry
 * above 1e-10 of its max magnitude is made positive.
 */
EigenBasis lb_basis(const FemOperators& ops, int k, const EigenOptions& opts = {});

/// Column-wise ||S phi - lambda M phi|| / max(||S phi||, ||S|| ||phi|| eps^(1/2)).
Eigen::VectorXd relative_residuals(const FemOperators& ops, const EigenBasis& basis);

/// max |Phi^T M Phi - I|.
double mass_orthonormality_error(const FemOperators& ops, const Eigen::MatrixXd& Phi);

/**
 * Warm-started minimizer of tr(X^T Sbar(w) X) subject to X^T X = I.
 * Deliberately not an eigensolver call: starting from `warm` keeps the signs
 * and ordering that the warm frame already carries.
 */
Eigen::MatrixXd reinit_basis(const DeformedOperators& dops, const Eigen::MatrixXd& warm,
                             const stiefel::Options& opts = {});

/// Diagonal of X^T Sbar X (the deformed eigenvalue estimates).
Eigen::VectorXd rayleigh_quotients(const DeformedOperators& dops, const Eigen::MatrixXd& X);

}  // namespace lbp
