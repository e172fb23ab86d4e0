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

#include "lbp/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lbp/error.hpp"
#include "lbp/spectrum.hpp"

namespace lbp
{

PursuitProblem::PursuitProblem(FemOperators source, FemOperators target, Eigen::MatrixXd source_basis,
                               Eigen::MatrixXd source_features, Eigen::MatrixXd target_features,
                               PursuitWeights weights)
    : source_(std::move(source)),
      target_(std::move(target)),
      source_basis_(std::move(source_basis)),
      source_features_(std::move(source_features)),
      target_features_(std::move(target_features)),
      weights_(weights)
{
    if (source_basis_.rows() != source_.size() || source_features_.rows() != source_.size()) {
        throw InputError("pursuit: source basis/features do not match the source mesh");
    }
    if (target_features_.rows() != target_.size()) {
        throw InputError("pursuit: target features do not match the target mesh");
    }
    if (source_features_.cols() != target_features_.cols() || source_features_.cols() == 0) {
        throw InputError("pursuit: source and target feature counts differ (or are zero)");
    }
    if (source_basis_.cols() == 0 || source_basis_.cols() >= target_.size()) {
        throw InputError("pursuit: basis size must be in [1, n_target)");
    }
    for (double r : {weights_.coefficient, weights_.eigen, weights_.harmonic, weights_.area}) {
        if (!(r >= 0.0 && std::isfinite(r))) {
            throw InputError("pursuit: weights must be finite and non-negative");
        }
    }
    area_ = source_.area();
    if (!(area_ > 0.0)) {
        throw InputError("pursuit: source area must be positive");
    }
    coefficients_ = source_features_.transpose() * source_.mass.asDiagonal() * source_basis_;
}

PursuitProblem PursuitProblem::with_target_features(Eigen::MatrixXd target_features) const
{
    if (target_features.rows() != target_features_.rows() || target_features.cols() != target_features_.cols()) {
        throw InputError("pursuit: replacement target features have the wrong shape");
    }
    PursuitProblem copy = *this;
    copy.target_features_ = std::move(target_features);
    return copy;
}

namespace
{

// Largest target size for which the w-subproblem assembles its dense n x n
// coefficient Hessian.
constexpr Eigen::Index kDenseCoefficientLimit = 4000;

void check_state(const PursuitProblem& problem, const PursuitState& state)
{
    if (state.w.size() != problem.target().size() || state.psibar.rows() != problem.target().size() ||
        state.psibar.cols() != problem.rank()) {
        throw InputError("pursuit: state shape does not match the problem");
    }
    if (!(state.eta > 0.0)) {
        throw InputError("pursuit: eta must be positive");
    }
}

// Terms that depend on (w, Psibar) jointly.
struct Coupled {
    Eigen::VectorXd lw;          // L .* w
    Eigen::MatrixXd residual;    // C - G^T diag(lw) Psibar
    Eigen::MatrixXd psi;         // diag(lw)^-1 Psibar
    Eigen::MatrixXd s_psi;       // S2 psi
};

Coupled coupled_terms(const PursuitProblem& problem, const Eigen::VectorXd& w, const Eigen::MatrixXd& psibar)
{
    Coupled c;
    c.lw = problem.target().sqrt_mass.cwiseProduct(w);
    c.residual = problem.source_coefficients() -
                 problem.target_features().transpose() * (c.lw.asDiagonal() * psibar);
    c.psi = c.lw.cwiseInverse().asDiagonal() * psibar;
    c.s_psi = problem.target().stiffness * c.psi;
    return c;
}

double area_residual(const PursuitProblem& problem, const Eigen::VectorXd& w)
{
    return w.cwiseProduct(problem.target().mass).dot(w) - problem.area();
}

}  // namespace

EnergyBreakdown energy(const PursuitProblem& problem, const PursuitState& state, const PursuitState* anchor)
{
    check_state(problem, state);
    const auto& r = problem.weights();
    const Coupled c = coupled_terms(problem, state.w, state.psibar);
    EnergyBreakdown e;
    e.coefficient = 0.5 * r.coefficient * c.residual.squaredNorm();
    e.eigen = 0.5 * r.eigen * c.psi.cwiseProduct(c.s_psi).sum();
    e.harmonic = 0.5 * r.harmonic * state.w.dot(problem.target().stiffness * state.w);
    e.area_residual = area_residual(problem, state.w);
    const double shifted = e.area_residual + state.multiplier;
    e.penalty = 0.5 * r.area * shifted * shifted;
    if (anchor) {
        e.proximal = ((state.psibar - anchor->psibar).squaredNorm() + (state.w - anchor->w).squaredNorm()) /
                     (2.0 * state.eta);
    }
    const bool finite = std::isfinite(e.coefficient) && std::isfinite(e.eigen) && std::isfinite(e.harmonic) &&
                        std::isfinite(e.penalty) && std::isfinite(e.proximal);
    if (!finite) {
        throw NumericalError("pursuit: non-finite energy");
    }
    return e;
}

Eigen::MatrixXd grad_psibar(const PursuitProblem& problem, const PursuitState& state, const PursuitState* anchor)
{
    check_state(problem, state);
    const auto& r = problem.weights();
    const Coupled c = coupled_terms(problem, state.w, state.psibar);
    // d/dPsibar of r1/2 ||C - P^T Psibar||^2 with P = diag(lw) G.
    Eigen::MatrixXd g = -r.coefficient * (c.lw.asDiagonal() * (problem.target_features() * c.residual));
    g += r.eigen * (c.lw.cwiseInverse().asDiagonal() * c.s_psi);
    if (anchor) {
        g += (state.psibar - anchor->psibar) / state.eta;
    }
    return g;
}

Eigen::VectorXd grad_w(const PursuitProblem& problem, const PursuitState& state, const PursuitState* anchor)
{
    check_state(problem, state);
    const auto& r = problem.weights();
    const auto& target = problem.target();
    const Coupled c = coupled_terms(problem, state.w, state.psibar);
    const Eigen::MatrixXd l_psibar = target.sqrt_mass.asDiagonal() * state.psibar;
    // Coefficient term: R depends on w through -G^T diag(w) (L Psibar).
    Eigen::VectorXd g =
        -r.coefficient * (problem.target_features() * c.residual).cwiseProduct(l_psibar).rowwise().sum();
    // Eigen term: psi_ij = Psibar_ij / (L_i w_i), so d psi_ij / d w_i = -psi_ij / w_i.
    g -= r.eigen * c.psi.cwiseProduct(c.s_psi).rowwise().sum().cwiseQuotient(state.w);
    g += r.harmonic * (target.stiffness * state.w);
    g += 2.0 * r.area * (area_residual(problem, state.w) + state.multiplier) * target.mass.cwiseProduct(state.w);
    if (anchor) {
        g += (state.w - anchor->w) / state.eta;
    }
    return g;
}

PursuitState initial_state(const PursuitProblem& problem, const Eigen::MatrixXd& target_basis, double eta)
{
    const auto& target = problem.target();
    if (target_basis.rows() != target.size() || target_basis.cols() != problem.rank()) {
        throw InputError("pursuit: initial target basis has the wrong shape");
    }
    PursuitState s;
    s.eta = eta;
    s.w = Eigen::VectorXd::Constant(target.size(), std::sqrt(problem.area() / target.area()));
    s.psibar = target.sqrt_mass.asDiagonal() * target_basis;
    if (stiefel::feasibility_error(s.psibar) > 1e-8) {
        s.psibar = stiefel::orthonormalize(s.psibar);
    }
    return s;
}

PursuitState pam_step(const PursuitProblem& problem, const PursuitState& state, const PamOptions& opts,
                      StepRecord* record)
{
    check_state(problem, state);
    if (opts.inner_rounds < 1) {
        throw InputError("pursuit: inner_rounds must be >= 1");
    }
    const auto& r = problem.weights();
    const auto& target = problem.target();
    const PursuitState& anchor = state;
    const double reference = energy(problem, state).lagrangian();

    // Psibar block: E(w^j, .) + 1/(2 eta) ||. - Psibar^j||^2 on the Stiefel manifold.
    PursuitState next = state;
    {
        const Eigen::VectorXd lw = target.sqrt_mass.cwiseProduct(state.w);
        const Eigen::VectorXd inv_lw = lw.cwiseInverse();
        const Eigen::MatrixXd P = lw.asDiagonal() * problem.target_features();
        const Eigen::MatrixXd& C = problem.source_coefficients();
        stiefel::Problem sub;
        sub.objective = [&](const Eigen::MatrixXd& X) {
            const Eigen::MatrixXd psi = inv_lw.asDiagonal() * X;
            return 0.5 * r.coefficient * (C - P.transpose() * X).squaredNorm() +
                   0.5 * r.eigen * psi.cwiseProduct(target.stiffness * psi).sum() +
                   (X - anchor.psibar).squaredNorm() / (2.0 * state.eta);
        };
        sub.gradient = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
            const Eigen::MatrixXd psi = inv_lw.asDiagonal() * X;
            Eigen::MatrixXd g = -r.coefficient * (P * (C - P.transpose() * X));
            g += r.eigen * (inv_lw.asDiagonal() * (target.stiffness * psi));
            g += (X - anchor.psibar) / state.eta;
            return g;
        };
        PursuitState trial = state;
        trial.psibar = stiefel::minimize(sub, state.psibar, opts.stiefel).X;
        if (energy(problem, trial, &anchor).total() <= reference) {
            next.psibar = std::move(trial.psibar);
        }
    }

    // w block: L-BFGS on L(., Psibar^{j+1}; b) + 1/(2 eta) ||. - w^j||^2, then the multiplier update.
    // With Psibar fixed and Q = L Psibar, the coefficient term is the quadratic
    // |C|^2 - 2 a^T w + w^T H w with H = (G G^T) .* (Q Q^T), a_i = g_i^T C q_i, and
    // the eigen term is v^T K v in v = 1 / w with K = S2 .* (L^-1 Psibar Psibar^T L^-1)
    // on the sparsity of S2.
    const Eigen::MatrixXd Q = target.sqrt_mass.asDiagonal() * next.psibar;
    const Eigen::MatrixXd& C = problem.source_coefficients();
    const Eigen::MatrixXd& G = problem.target_features();
    const bool dense = target.size() <= kDenseCoefficientLimit;
    Eigen::MatrixXd H;
    Eigen::VectorXd a;
    if (dense) {
        H = (G * G.transpose()).cwiseProduct(Q * Q.transpose());
        a = G.cwiseProduct(Q * C.transpose()).rowwise().sum();
    }
    const double c_norm = C.squaredNorm();
    SparseMatrix K = target.stiffness;
    {
        const Eigen::MatrixXd scaled = target.sqrt_mass.cwiseInverse().asDiagonal() * next.psibar;
        for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
                it.valueRef() *= scaled.row(it.row()).dot(scaled.row(it.col()));
            }
        }
    }
    double used_multiplier = next.multiplier;
    for (int round = 0; round < opts.inner_rounds; ++round) {
        const double b = next.multiplier;
        used_multiplier = b;
        lbfgs::Function phi = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
            if (!(w.array() > 0.0).all()) {
                return std::numeric_limits<double>::infinity();
            }
            double coefficient = 0.0;
            if (dense) {
                const Eigen::VectorXd Hw = H * w;
                coefficient = c_norm - 2.0 * a.dot(w) + w.dot(Hw);
                grad = r.coefficient * (Hw - a);
            } else {
                const Eigen::MatrixXd R = C - G.transpose() * (w.asDiagonal() * Q);
                coefficient = R.squaredNorm();
                grad = -r.coefficient * (G * R).cwiseProduct(Q).rowwise().sum();
            }
            const Eigen::VectorXd v = w.cwiseInverse();
            const Eigen::VectorXd Kv = K * v;
            const Eigen::VectorXd sw = target.stiffness * w;
            const Eigen::VectorXd mw = target.mass.cwiseProduct(w);
            const double shifted = w.dot(mw) - problem.area() + b;
            const Eigen::VectorXd dw = w - anchor.w;

            grad -= r.eigen * Kv.cwiseProduct(v).cwiseProduct(v);
            grad += r.harmonic * sw + 2.0 * r.area * shifted * mw + dw / state.eta;
            return 0.5 * r.coefficient * coefficient + 0.5 * r.eigen * v.dot(Kv) + 0.5 * r.harmonic * w.dot(sw) +
                   0.5 * r.area * shifted * shifted + dw.squaredNorm() / (2.0 * state.eta);
        };
        const lbfgs::Result sol = lbfgs::minimize(phi, next.w, opts.lbfgs);
        PursuitState trial = next;
        trial.w = sol.x;
        if (energy(problem, trial, &anchor).total() <= energy(problem, next, &anchor).total()) {
            next.w = sol.x;
        }
        next.multiplier = b + area_residual(problem, next.w);
    }
    ++next.outer_iterations;

    if (record) {
        PursuitState at_step = next;
        at_step.multiplier = used_multiplier;
        record->iteration = next.outer_iterations;
        record->energy = energy(problem, at_step, &anchor);
        record->reference = reference;
        record->step_psibar = (next.psibar - state.psibar).squaredNorm();
        record->step_w = (next.w - state.w).squaredNorm();
        record->proximal = record->energy.proximal;
        record->multiplier = next.multiplier;
    }
    return next;
}

namespace
{

bool flat(const std::vector<StepRecord>& history, std::size_t since, int window, double tol)
{
    if (window < 1 || history.size() < since + static_cast<std::size_t>(window) + 1) {
        return false;
    }
    const double now = history.back().energy.lagrangian();
    const double then = history[history.size() - 1 - static_cast<std::size_t>(window)].energy.lagrangian();
    return std::abs(then - now) <= tol * std::max(1.0, std::abs(now));
}

}  // namespace

SolveResult solve(const PursuitProblem& problem, const PursuitState& start, const SolveOptions& opts)
{
    SolveResult out;
    out.state = start;
    out.state.eta = opts.eta;
    out.target_features = problem.target_features();
    for (int j = 0; j < opts.max_outer; ++j) {
        StepRecord rec;
        out.state = pam_step(problem, out.state, opts.pam, &rec);
        out.history.push_back(rec);
        if (opts.on_step) {
            opts.on_step(rec);
        }
        if (flat(out.history, 0, opts.patience, opts.tolerance)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

SolveResult solve_with_reinit(const PursuitProblem& problem, const PursuitState& start, const SolveOptions& opts)
{
    SolveResult out;
    out.state = start;
    out.state.eta = opts.eta;
    PursuitProblem current = problem;
    std::size_t since = 0;   // history index of the last reset
    for (int j = 0; j < opts.max_outer; ++j) {
        StepRecord rec;
        out.state = pam_step(current, out.state, opts.pam, &rec);
        out.history.push_back(rec);
        if (opts.on_step) {
            opts.on_step(rec);
        }

        const bool budget_left = out.state.reinitializations < opts.max_reinit;
        if (budget_left && flat(out.history, since, opts.stall_window, opts.stall_tolerance)) {
            ReinitEvent ev;
            ev.iteration = rec.iteration;
            ev.before = energy(current, out.state).lagrangian();
            PursuitState cand = out.state;
            cand.psibar = reinit_basis(deform(current.target(), out.state.w), out.state.psibar, opts.reinit_stiefel);
            std::optional<PursuitProblem> recomputed;
            if (opts.recompute_target_features) {
                recomputed = current.with_target_features(opts.recompute_target_features(out.state.w));
            }
            const PursuitProblem& candidate_problem = recomputed ? *recomputed : current;
            ev.after = energy(candidate_problem, cand).lagrangian();
            ev.accepted = ev.after <= ev.before;
            if (ev.accepted) {
                out.state.psibar = std::move(cand.psibar);
                if (recomputed) {
                    current = std::move(*recomputed);
                }
                out.history.back().reinitialized = true;
            }
            ++out.state.reinitializations;
            out.reinit_events.push_back(ev);
            since = out.history.size();
            continue;
        }
        if (!budget_left && flat(out.history, since, opts.patience, opts.tolerance)) {
            out.converged = true;
            break;
        }
    }
    out.target_features = current.target_features();
    return out;
}

}  // namespace lbp
