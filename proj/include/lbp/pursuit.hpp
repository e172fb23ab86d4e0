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
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lbp/fem.hpp"
#include "lbp/lbfgs.hpp"
#include "lbp/stiefel.hpp"

namespace lbp
{

struct PursuitWeights {
    double coefficient = 10.0;   ///< r1
    double eigen = 10.0;         ///< r2
    double harmonic = 1.0;       ///< r3
    double area = 0.01;          ///< r4, augmented-Lagrangian penalty
};

/**
 * Immutable problem data. The target basis is parameterized as
 * Psibar = L diag(w) Psi, which moves w out of the orthogonality constraint:
 *
 *   E(w, Psibar) = r1/2 ||C - G^T diag(w) L Psibar||_F^2
 *                + r2/2 tr(Psibar^T Sbar(w) Psibar)
 *                + r3/2 w^T S2 w
 *   s.t. Psibar^T Psibar = I,  w^T M2 w = A
 *
 * with C = F^T M1 Phi and A the source area.
 */
class PursuitProblem
{
public:
    PursuitProblem(FemOperators source, FemOperators target, Eigen::MatrixXd source_basis,
                   Eigen::MatrixXd source_features, Eigen::MatrixXd target_features, PursuitWeights weights);

    const FemOperators& source() const { return source_; }
    const FemOperators& target() const { return target_; }
    const Eigen::MatrixXd& source_basis() const { return source_basis_; }
    const Eigen::MatrixXd& source_features() const { return source_features_; }
    const Eigen::MatrixXd& target_features() const { return target_features_; }
    /// C = F^T M1 Phi (features x basis size).
    const Eigen::MatrixXd& source_coefficients() const { return coefficients_; }
    const PursuitWeights& weights() const { return weights_; }
    double area() const { return area_; }
    Eigen::Index rank() const { return source_basis_.cols(); }

    /// Copy with replaced target features (same shape), e.g. after recomputing
    /// them under a deformed metric.
    PursuitProblem with_target_features(Eigen::MatrixXd target_features) const;

private:
    FemOperators source_;
    FemOperators target_;
    Eigen::MatrixXd source_basis_;
    Eigen::MatrixXd source_features_;
    Eigen::MatrixXd target_features_;
    Eigen::MatrixXd coefficients_;
    PursuitWeights weights_;
    double area_ = 0.0;
};

struct PursuitState {
    Eigen::VectorXd w;
    Eigen::MatrixXd psibar;
    double multiplier = 0.0;     ///< scaled ALM multiplier b
    double eta = 100.0;          ///< proximal step weight
    int outer_iterations = 0;
    int reinitializations = 0;
};

struct EnergyBreakdown {
    double coefficient = 0.0;
    double eigen = 0.0;
    double harmonic = 0.0;
    double area_residual = 0.0;  ///< w^T M2 w - A
    double penalty = 0.0;        ///< r4/2 (residual + b)^2
    double proximal = 0.0;       ///< 1/(2 eta) (||Psibar - Psibar_ref||^2 + ||w - w_ref||^2)

    double model() const { return coefficient + eigen + harmonic; }
    double lagrangian() const { return model() + penalty; }
    double total() const { return lagrangian() + proximal; }
};

/// Energy terms of `state`; proximal terms are measured against `anchor` when given.
EnergyBreakdown energy(const PursuitProblem& problem, const PursuitState& state,
                       const PursuitState* anchor = nullptr);

/// Euclidean gradient of E + 1/(2 eta) ||Psibar - anchor.psibar||^2 with respect to Psibar.
Eigen::MatrixXd grad_psibar(const PursuitProblem& problem, const PursuitState& state,
                            const PursuitState* anchor = nullptr);

/// Gradient of the augmented Lagrangian + 1/(2 eta) ||w - anchor.w||^2 with respect to w.
Eigen::VectorXd grad_w(const PursuitProblem& problem, const PursuitState& state,
                       const PursuitState* anchor = nullptr);

/// w0 = sqrt(A / area(M2)) (area constraint exact), Psibar0 = L Psi for an
/// M2-orthonormal target basis Psi. Psibar0 is orthonormal and equals
/// L diag(w0) (Psi / w0), i.e. the natural basis rescaled to the w0-metric.
PursuitState initial_state(const PursuitProblem& problem, const Eigen::MatrixXd& target_basis, double eta);

struct PamOptions {
    int inner_rounds = 1;        ///< w / multiplier rounds per outer step
    stiefel::Options stiefel{.max_iterations = 30, .gradient_tolerance = 1e-5};
    lbfgs::Options lbfgs{};
};

/// One outer iteration and the quantities of the sufficient-decrease check.
struct StepRecord {
    int iteration = 0;
    EnergyBreakdown energy;           ///< new state; penalty with the multiplier used in the step
    double reference = 0.0;           ///< augmented Lagrangian of the previous state, same multiplier
    double step_psibar = 0.0;         ///< ||dPsibar||_F^2
    double step_w = 0.0;              ///< ||dw||^2
    double proximal = 0.0;            ///< (step_psibar + step_w) / (2 eta)
    double multiplier = 0.0;          ///< after the update
    bool reinitialized = false;
};

/**
 * Proximal alternating step hybridized with the augmented Lagrangian:
 * Psibar by curvilinear Stiefel search on E + prox, then `inner_rounds` of
 * {w by L-BFGS on L(.; b) + prox, b += w^T M2 w - A}. A block update that
 * would raise its own objective is discarded, so with one inner round
 *   L(new; b) + prox <= L(old; b).
 */
PursuitState pam_step(const PursuitProblem& problem, const PursuitState& state, const PamOptions& opts,
                      StepRecord* record = nullptr);

struct SolveOptions {
    PamOptions pam;
    double eta = 100.0;
    int max_outer = 500;
    double tolerance = 1e-6;     ///< relative change of the augmented Lagrangian over `patience` steps
    int patience = 10;

    // Reinitialization (solve_with_reinit only).
    int max_reinit = 5;
    double stall_tolerance = 1e-4;
    int stall_window = 10;
    stiefel::Options reinit_stiefel{.max_iterations = 200, .gradient_tolerance = 1e-6};
    /// Recomputes target features under the metric diag(w) M2 diag(w); empty
    /// for metric-independent features such as indicators.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd& w)> recompute_target_features;
    /// Called after every outer iteration.
    std::function<void(const StepRecord&)> on_step;
};

struct ReinitEvent {
    int iteration = 0;
    double before = 0.0;         ///< augmented Lagrangian before the reset
    double after = 0.0;
    bool accepted = false;
};

struct SolveResult {
    PursuitState state;
    std::vector<StepRecord> history;
    std::vector<ReinitEvent> reinit_events;
    Eigen::MatrixXd target_features;   ///< features in effect at the end
    bool converged = false;
};

/// Basis pursuit without reinitialization, starting from `start`.
SolveResult solve(const PursuitProblem& problem, const PursuitState& start, const SolveOptions& opts);

/// Basis pursuit with warm-started reinitialization when progress stalls.
SolveResult solve_with_reinit(const PursuitProblem& problem, const PursuitState& start, const SolveOptions& opts);

}  // namespace lbp
