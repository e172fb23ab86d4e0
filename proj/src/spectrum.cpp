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

#include "lbp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "lbp/error.hpp"

namespace lbp
{

namespace
{

// Orthogonalize the columns of W against Q and among themselves (two passes
// of classical Gram-Schmidt). Columns that collapse are refilled with random
// vectors.
Eigen::MatrixXd orthogonalize_block(const Eigen::MatrixXd& Q, Eigen::MatrixXd W, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            const double before = W.col(j).norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (Q.cols() > 0) {
                    W.col(j) -= Q * (Q.transpose() * W.col(j));
                }
                if (j > 0) {
                    W.col(j) -= W.leftCols(j) * (W.leftCols(j).transpose() * W.col(j));
                }
            }
            const double after = W.col(j).norm();
            if (after > 1e-8 * before && after > 0.0) {
                W.col(j) /= after;
                break;
            }
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                W(i, j) = normal(rng);
            }
        }
    }
    return W;
}

void fix_signs(Eigen::MatrixXd& Phi)
{
    for (Eigen::Index j = 0; j < Phi.cols(); ++j) {
        const double peak = Phi.col(j).cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < Phi.rows(); ++i) {
            if (std::abs(Phi(i, j)) > 1e-10 * peak) {
                if (Phi(i, j) < 0.0) {
                    Phi.col(j) *= -1.0;
                }
                break;
            }
        }
    }
}

}  // namespace

EigenBasis lb_basis(const FemOperators& ops, int k, const EigenOptions& opts)
{
    const Eigen::Index n = ops.size();
    if (k <= 0 || k >= n) {
        throw InputError("lb_basis: need 0 < k < n (k = " + std::to_string(k) + ", n = " +
                         std::to_string(n) + ")");
    }
    if (opts.block_size < 1) {
        throw InputError("lb_basis: block size must be positive");
    }
    const Eigen::Index p = std::min<Eigen::Index>(opts.block_size, n);
    Eigen::Index max_dim = opts.max_dimension > 0
                               ? opts.max_dimension
                               : std::max<Eigen::Index>(2 * k + 2 * p, k + 40);
    max_dim = std::min(std::max(max_dim, static_cast<Eigen::Index>(k) + p), n);

    // Shift-invert operator of the standard form B = L^-1 S L^-1:
    //   T = (B + tau I)^-1 = L (S + tau M)^-1 L,  eig(T) = 1 / (lambda + tau).
    // tau ~ 1% of the mean diagonal ratio S_ii / (n M_ii): far below lambda_1 on
    // reasonable meshes, yet large enough to keep 1/tau from swamping the
    // residual test of the upper modes.
    const double tau = 1e-2 * ops.stiffness.diagonal().sum() / (ops.mass.sum() * static_cast<double>(n));
    SparseMatrix shifted = ops.stiffness;
    for (Eigen::Index i = 0; i < n; ++i) {
        shifted.coeffRef(i, i) += tau * ops.mass(i);
    }
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("lb_basis: factorization of S + tau M failed");
    }
    const Eigen::VectorXd& L = ops.sqrt_mass;
    auto apply = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        Eigen::MatrixXd Y = ldlt.solve(L.asDiagonal() * X);
        return L.asDiagonal() * Y;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd start(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            start(i, j) = normal(rng);
        }
    }
    Eigen::MatrixXd V = orthogonalize_block(Eigen::MatrixXd(n, 0), start, rng);
    Eigen::MatrixXd W = apply(V);

    Eigen::MatrixXd H = V.transpose() * W;
    Eigen::VectorXd theta;
    Eigen::MatrixXd ritz;
    Eigen::Index locked = 0;   // leading Ritz pairs already seen converged
    bool done = false;
    int restarts = 0;
    while (!done) {
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("lb_basis: projected eigenproblem failed");
        }
        // Descending theta = ascending lambda.
        const Eigen::Index m = V.cols();
        const Eigen::VectorXd th = eig.eigenvalues().reverse();
        const Eigen::MatrixXd Z = eig.eigenvectors().rowwise().reverse();
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * th(0);
        auto is_open = [&](const Eigen::VectorXd& r, Eigen::Index j) {
            return r.norm() > opts.tolerance * std::abs(th(j)) + floor;
        };

        // Residuals on a window past the locked prefix; a full sweep once the
        // window reaches k.
        const Eigen::Index want = std::min<Eigen::Index>(k, m);
        Eigen::Index lo = std::min(locked, want);
        Eigen::Index hi = std::min<Eigen::Index>(want, lo + 2 * p);
        if (hi == want) {
            lo = 0;
        }
        const Eigen::MatrixXd Zw = Z.middleCols(lo, hi - lo);
        const Eigen::MatrixXd Yw = V * Zw;
        const Eigen::MatrixXd Rw = W * Zw - Yw * th.segment(lo, hi - lo).asDiagonal();
        std::vector<Eigen::Index> open;
        for (Eigen::Index j = 0; j < hi - lo; ++j) {
            if (is_open(Rw.col(j), lo + j)) {
                open.push_back(j);
            }
        }
        locked = open.empty() ? hi : lo + open.front();

        if ((want == k && lo == 0 && hi == k && open.empty()) || m == n) {
            done = (want == k);
            theta = th.head(k);
            ritz = V * Z.leftCols(k);
            break;
        }
        if (m + std::min<Eigen::Index>(p, n - m) > max_dim) {
            if (++restarts > opts.max_restarts) {
                break;
            }
            // Thick restart on the leading Ritz vectors.
            const Eigen::Index keep =
                std::min<Eigen::Index>(m, std::max<Eigen::Index>(k + p, max_dim - 2 * p));
            V = V * Z.leftCols(keep);
            W = W * Z.leftCols(keep);
            H = th.head(keep).asDiagonal();
            continue;
        }
        const Eigen::Index grow = std::min<Eigen::Index>(p, n - m);
        Eigen::MatrixXd block(n, grow);
        Eigen::Index filled = 0;
        for (Eigen::Index j : open) {
            if (filled == grow) {
                break;
            }
            block.col(filled++) = Rw.col(j);
        }
        for (Eigen::Index j = hi; filled < grow; ++j) {
            // Not enough open residuals for a full block: borrow those of the
            // next Ritz pairs, then random directions.
            if (j < m) {
                block.col(filled++) = W * Z.col(j) - th(j) * (V * Z.col(j));
            } else {
                for (Eigen::Index i = 0; i < n; ++i) {
                    block(i, filled) = normal(rng);
                }
                ++filled;
            }
        }
        block = orthogonalize_block(V, block, rng);
        const Eigen::MatrixXd AB = apply(block);
        const Eigen::MatrixXd cross = V.transpose() * AB;
        V.conservativeResize(Eigen::NoChange, m + grow);
        V.rightCols(grow) = block;
        W.conservativeResize(Eigen::NoChange, m + grow);
        W.rightCols(grow) = AB;
        H.conservativeResize(m + grow, m + grow);
        H.topRightCorner(m, grow) = cross;
        H.bottomLeftCorner(grow, m) = cross.transpose();
        H.bottomRightCorner(grow, grow) = block.transpose() * AB;
    }
    if (!done) {
        throw NumericalError("lb_basis: eigensolver did not converge");
    }

    EigenBasis basis;
    basis.metric = Metric::Mass;
    basis.values = theta.cwiseInverse().array() - tau;
    basis.vectors = L.cwiseInverse().asDiagonal() * ritz;
    // Re-normalize against M; the Ritz vectors are orthonormal up to rounding.
    for (Eigen::Index j = 0; j < k; ++j) {
        const double nrm = std::sqrt(basis.vectors.col(j).cwiseProduct(ops.mass).dot(basis.vectors.col(j)));
        basis.vectors.col(j) /= nrm;
    }
    // Ascending order, stable for ties.
    std::vector<Eigen::Index> order(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        order[j] = j;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return basis.values(a) < basis.values(b); });
    EigenBasis sorted;
    sorted.metric = Metric::Mass;
    sorted.values.resize(k);
    sorted.vectors.resize(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        sorted.values(j) = basis.values(order[j]);
        sorted.vectors.col(j) = basis.vectors.col(order[j]);
    }
    fix_signs(sorted.vectors);
    return sorted;
}

Eigen::VectorXd relative_residuals(const FemOperators& ops, const EigenBasis& basis)
{
    const Eigen::MatrixXd SPhi = ops.stiffness * basis.vectors;
    const Eigen::MatrixXd MPhi = ops.mass.asDiagonal() * basis.vectors;
    double s_norm = 0.0;
    for (Eigen::Index k = 0; k < ops.stiffness.outerSize(); ++k) {
        double row = 0.0;
        for (SparseMatrix::InnerIterator it(ops.stiffness, k); it; ++it) {
            row += std::abs(it.value());
        }
        s_norm = std::max(s_norm, row);
    }
    Eigen::VectorXd out(basis.size());
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
        const double scale =
            std::max(SPhi.col(j).norm(), s_norm * basis.vectors.col(j).norm() * 1.5e-8);
        out(j) = (SPhi.col(j) - basis.values(j) * MPhi.col(j)).norm() / scale;
    }
    return out;
}

double mass_orthonormality_error(const FemOperators& ops, const Eigen::MatrixXd& Phi)
{
    const Eigen::MatrixXd G = Phi.transpose() * ops.mass.asDiagonal() * Phi;
    return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd reinit_basis(const DeformedOperators& dops, const Eigen::MatrixXd& warm,
                             const stiefel::Options& opts)
{
    if (warm.rows() != dops.w.size()) {
        throw InputError("reinit_basis: warm start has the wrong number of rows");
    }
    if (stiefel::feasibility_error(warm) > 1e-8) {
        throw InputError("reinit_basis: warm start is not orthonormal");
    }
    stiefel::Problem problem;
    problem.objective = [&](const Eigen::MatrixXd& X) {
        return (X.transpose() * dops.apply_sbar(X)).trace();
    };
    problem.gradient = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd { return 2.0 * dops.apply_sbar(X); };
    return stiefel::minimize(problem, warm, opts).X;
}

Eigen::VectorXd rayleigh_quotients(const DeformedOperators& dops, const Eigen::MatrixXd& X)
{
    return (X.transpose() * dops.apply_sbar(X)).diagonal();
}

}  // namespace lbp
