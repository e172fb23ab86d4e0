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

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace lbp::stiefel
{

/// Smooth objective over {X in R^{n x k} : X^T X = I}. The gradient is the
/// Euclidean (coordinate) gradient; the minimizer projects it itself.
struct Problem {
    std::function<double(const Eigen::MatrixXd&)> objective;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> gradient;
};

struct Options {
    int max_iterations = 1000;
    /// Stop when ||grad_R|| <= gradient_tolerance * max(1, ||grad_R(X0)||).
    double gradient_tolerance = 1e-6;
    double initial_step = 1e-3;
    double step_min = 1e-10;
    double step_max = 1e2;
    int window = 5;                   ///< nonmonotone reference: max of the last `window` values
    double sufficient_decrease = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 40;
    double reorthonormalize_above = 1e-10;
};

struct Result {
    Eigen::MatrixXd X;
    double value = 0.0;
    std::vector<double> trace;        ///< objective at every accepted iterate, X0 first
    int iterations = 0;
    int reorthonormalizations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

/**
 * Curvilinear update X+ = (I + dt/2 D)^-1 (I - dt/2 D) X with D = Y X^T - X Y^T.
 *
 * D has rank <= 2k, so the inverse is applied through the 2k x 2k system
 * (I + dt/2 V^T U) with U = [Y, X], V = [X, -Y]. Throws NumericalError when
 * that system is singular.
 */
Eigen::MatrixXd cayley_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double dt);

/// Riemannian gradient D X = Y - X Y^T X under the canonical metric.
Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// max |X^T X - I|.
double feasibility_error(const Eigen::MatrixXd& X);

/// Closest matrix with orthonormal columns (polar factor).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& X);

/// Barzilai-Borwein curvilinear search with a nonmonotone Armijo rule.
/// Returns the best feasible iterate seen, so value <= objective(X0).
Result minimize(const Problem& problem, const Eigen::MatrixXd& X0, const Options& opts = {});

}  // namespace lbp::stiefel
