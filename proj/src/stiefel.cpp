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

#include "lbp/stiefel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

#include "lbp/error.hpp"

namespace lbp::stiefel
{

namespace
{

// Points X(t) = (I + t/2 D)^-1 (I - t/2 D) X on the Cayley curve of
// D = Y X^T - X Y^T = U V^T with U = [Y, X], V = [X, -Y]. The 2k x 2k blocks
// do not depend on t, so each trial step costs one small solve and one
// n x 2k by 2k x k product.
class CayleyCurve
{
public:
    CayleyCurve(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) : X_(X), Y_(Y)
    {
        const Eigen::Index k = X.cols();
        const Eigen::MatrixXd XtY = X.transpose() * Y;
        const Eigen::MatrixXd XtX = X.transpose() * X;
        VtU_.resize(2 * k, 2 * k);
        VtU_ << XtY, XtX, -(Y.transpose() * Y), -XtY.transpose();
        VtX_.resize(2 * k, k);
        VtX_ << XtX, -XtY.transpose();
    }

    Eigen::MatrixXd at(double t) const
    {
        if (t == 0.0) {
            return X_;
        }
        const Eigen::Index k = X_.cols();
        const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2 * k, 2 * k) + 0.5 * t * VtU_;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        if (!(lu.rcond() >= 1e-14)) {
            throw NumericalError("cayley_step: singular Cayley system");
        }
        const Eigen::MatrixXd Z = lu.solve(VtX_);
        return X_ - t * (Y_ * Z.topRows(k) + X_ * Z.bottomRows(k));
    }

private:
    const Eigen::MatrixXd& X_;
    const Eigen::MatrixXd& Y_;
    Eigen::MatrixXd VtU_;
    Eigen::MatrixXd VtX_;
};

}  // namespace

Eigen::MatrixXd cayley_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double dt)
{
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
        throw InputError("cayley_step: gradient shape does not match X");
    }
    if (dt < 0.0) {
        throw InputError("cayley_step: negative step");
    }
    return CayleyCurve(X, Y).at(dt);
}

Eigen::MatrixXd riemannian_gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y)
{
    return Y - X * (Y.transpose() * X);
}

double feasibility_error(const Eigen::MatrixXd& X)
{
    const Eigen::MatrixXd E = X.transpose() * X - Eigen::MatrixXd::Identity(X.cols(), X.cols());
    return E.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& X)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X.transpose() * X);
    const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return X * (eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose());
}

namespace
{

double checked(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw NumericalError(std::string("stiefel: non-finite ") + what);
    }
    return v;
}

}  // namespace

Result minimize(const Problem& problem, const Eigen::MatrixXd& X0, const Options& opts)
{
    if (opts.step_min <= 0.0 || opts.step_min > opts.step_max || opts.window < 1) {
        throw InputError("stiefel: invalid step bounds or window");
    }
    if (X0.cols() > X0.rows()) {
        throw InputError("stiefel: rank exceeds dimension");
    }

    Eigen::MatrixXd X = X0;
    double f = checked(problem.objective(X), "objective");
    Eigen::MatrixXd G = problem.gradient(X);
    if (G.rows() != X.rows() || G.cols() != X.cols()) {
        throw InputError("stiefel: gradient shape does not match X");
    }
    if (!G.allFinite()) {
        throw NumericalError("stiefel: non-finite gradient");
    }

    Result res;
    res.trace.push_back(f);
    Eigen::MatrixXd best_X = X;
    double best_f = f;

    Eigen::MatrixXd RG = riemannian_gradient(X, G);
    const double grad0 = RG.norm();
    const double grad_stop = opts.gradient_tolerance * std::max(1.0, grad0);
    std::deque<double> recent{f};
    double tau = opts.initial_step;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        res.iterations = it;
        res.gradient_norm = RG.norm();
        if (res.gradient_norm <= grad_stop) {
            res.converged = true;
            break;
        }
        // Directional derivative along the Cayley curve at t = 0: -1/2 ||D||_F^2.
        const Eigen::MatrixXd XtG = X.transpose() * G;
        const double slope = -(G.squaredNorm() - (XtG * XtG).trace());
        const double reference = *std::max_element(recent.begin(), recent.end());

        const CayleyCurve curve(X, G);
        Eigen::MatrixXd Xn;
        double fn = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            try {
                Xn = curve.at(tau);
                fn = problem.objective(Xn);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Numerical) {
                    throw;
                }
                fn = std::numeric_limits<double>::infinity();
            }
            if (std::isfinite(fn) && fn <= reference + opts.sufficient_decrease * tau * slope) {
                accepted = true;
                break;
            }
            tau *= opts.backtrack;
        }
        if (!accepted) {
            // No admissible step along this curve; X is (numerically) stationary.
            break;
        }

        if (feasibility_error(Xn) > opts.reorthonormalize_above) {
            Xn = orthonormalize(Xn);
            fn = checked(problem.objective(Xn), "objective");
            ++res.reorthonormalizations;
        }
        Eigen::MatrixXd Gn = problem.gradient(Xn);
        if (!Gn.allFinite()) {
            throw NumericalError("stiefel: non-finite gradient");
        }
        const Eigen::MatrixXd RGn = riemannian_gradient(Xn, Gn);

        // Alternating Barzilai-Borwein steps.
        const Eigen::MatrixXd S = Xn - X;
        const Eigen::MatrixXd Yd = RGn - RG;
        const double sy = std::abs((S.array() * Yd.array()).sum());
        double next = opts.initial_step;
        if (sy > 0.0) {
            next = (it % 2 == 1) ? S.squaredNorm() / sy : sy / Yd.squaredNorm();
        }
        if (!std::isfinite(next)) {
            next = opts.initial_step;
        }
        tau = std::clamp(next, opts.step_min, opts.step_max);

        X = std::move(Xn);
        G = std::move(Gn);
        RG = RGn;
        f = fn;
        res.trace.push_back(f);
        recent.push_back(f);
        if (static_cast<int>(recent.size()) > opts.window) {
            recent.pop_front();
        }
        if (f < best_f) {
            best_f = f;
            best_X = X;
        }
    }
    if (res.converged && f <= best_f) {
        best_f = f;
        best_X = X;
    }
    res.X = std::move(best_X);
    res.value = best_f;
    return res;
}

}  // namespace lbp::stiefel
