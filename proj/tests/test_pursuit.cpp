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

#include <doctest.h>

#include "lbp/error.hpp"
#include "lbp/features.hpp"
#include "lbp/fem.hpp"
#include "lbp/pursuit.hpp"
#include "lbp/spectrum.hpp"
#include "lbp/stiefel.hpp"
#include "test_util.hpp"

using namespace lbp;

namespace
{

struct Instance {
    PursuitProblem problem;
    PursuitState state;
    PursuitState anchor;
};

Eigen::VectorXd random_positive(Eigen::Index n, std::mt19937_64& rng, double lo = 0.6, double hi = 1.5)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w(i) = u(rng);
    }
    return w;
}

// Source and target are different tori; features are random, so the
// instance exercises every term of the energy.
Instance random_instance(int nu, int nv, int k, int ell, std::mt19937_64& rng, PursuitWeights weights = {})
{
    const FemOperators src = assemble(lbp::test::torus(nu + 1, nv, 2.0, 0.6));
    const FemOperators tgt = assemble(lbp::test::torus(nu, nv, 1.8, 0.8));
    const Eigen::MatrixXd phi = lb_basis(src, k).vectors;
    PursuitProblem problem(src, tgt, phi, lbp::test::random_matrix(src.size(), ell, rng),
                           lbp::test::random_matrix(tgt.size(), ell, rng), weights);
    PursuitState s;
    s.w = random_positive(tgt.size(), rng);
    s.psibar = lbp::test::random_orthonormal(tgt.size(), k, rng);
    s.multiplier = std::normal_distribution<double>()(rng);
    s.eta = 3.0;
    PursuitState a = s;
    a.w = random_positive(tgt.size(), rng);
    a.psibar = lbp::test::random_orthonormal(tgt.size(), k, rng);
    return {std::move(problem), std::move(s), std::move(a)};
}

double fd_error_psibar(const Instance& in, std::mt19937_64& rng)
{
    const double h = 1e-6;
    const Eigen::MatrixXd D = lbp::test::random_matrix(in.state.psibar.rows(), in.state.psibar.cols(), rng);
    PursuitState p = in.state;
    PursuitState m = in.state;
    p.psibar += h * D;
    m.psibar -= h * D;
    const double fd = (energy(in.problem, p, &in.anchor).total() - energy(in.problem, m, &in.anchor).total()) / (2 * h);
    const double an = (grad_psibar(in.problem, in.state, &in.anchor).array() * D.array()).sum();
    return std::abs(fd - an) / std::max(std::abs(an), 1e-12);
}

double fd_error_w(const Instance& in, std::mt19937_64& rng)
{
    const double h = 1e-6;
    const Eigen::VectorXd d = lbp::test::random_matrix(in.state.w.size(), 1, rng);
    PursuitState p = in.state;
    PursuitState m = in.state;
    p.w += h * d;
    m.w -= h * d;
    const double fd = (energy(in.problem, p, &in.anchor).total() - energy(in.problem, m, &in.anchor).total()) / (2 * h);
    const double an = grad_w(in.problem, in.state, &in.anchor).dot(d);
    return std::abs(fd - an) / std::max(std::abs(an), 1e-12);
}

// Same mesh on both sides, indicator features at a few vertices.
struct Identity {
    FemOperators ops;
    EigenBasis basis;
    Eigen::MatrixXd features;
};

Identity identity_setup(int k)
{
    Identity id;
    // Scaled to a mean vertex mass of 10, the pipeline's default normalization.
    const TriMesh unit = icosphere(2);
    id.ops = assemble(unit.scaled(std::sqrt(10.0 * double(unit.num_vertices()) / total_area(unit))));
    id.basis = lb_basis(id.ops, k);
    std::vector<int> marks;
    for (int v = 0; v < 160; v += 8) {
        marks.push_back(v);
    }
    id.features = indicator_features(id.ops.size(), marks).values;
    return id;
}

}  // namespace

TEST_SUITE("pursuit")
{
    TEST_CASE("perfect alignment has zero coefficient term")
    {
        const Identity id = identity_setup(10);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        const PursuitState s = initial_state(p, id.basis.vectors, 100.0);
        CHECK((s.w.array() - 1.0).abs().maxCoeff() < 1e-14);
        const EnergyBreakdown e = energy(p, s);
        CHECK(e.coefficient <= 1e-24);
        CHECK(std::abs(e.area_residual) <= 1e-12 * p.area());
        CHECK(std::abs(e.harmonic) <= 1e-12);
    }

    TEST_CASE("constant w on the area budget has zero residual and zero harmonic term")
    {
        std::mt19937_64 rng(1);
        Instance in = random_instance(10, 8, 5, 3, rng);
        in.state.w.setConstant(std::sqrt(in.problem.area() / in.problem.target().area()));
        const EnergyBreakdown e = energy(in.problem, in.state);
        CHECK(std::abs(e.area_residual) <= 1e-12 * in.problem.area());
        CHECK(std::abs(e.harmonic) <= 1e-10);
    }

    TEST_CASE("energy terms match their formulas on a dense oracle")
    {
        std::mt19937_64 rng(2);
        const Instance in = random_instance(8, 6, 4, 3, rng);
        const auto& p = in.problem;
        const auto& s = in.state;
        const auto& r = p.weights();
        const Eigen::VectorXd L = p.target().sqrt_mass;
        const Eigen::MatrixXd Lw = (L.cwiseProduct(s.w)).asDiagonal();
        const Eigen::MatrixXd C = p.source_features().transpose() * p.source().mass.asDiagonal() * p.source_basis();
        const Eigen::MatrixXd S = Eigen::MatrixXd(p.target().stiffness);
        const Eigen::MatrixXd Sbar = Lw.inverse() * S * Lw.inverse();
        const double resid = s.w.dot(p.target().mass.cwiseProduct(s.w)) - p.area();
        const EnergyBreakdown e = energy(p, s, &in.anchor);
        CHECK(e.coefficient == doctest::Approx(0.5 * r.coefficient * (C - p.target_features().transpose() * Lw * s.psibar).squaredNorm()));
        CHECK(e.eigen == doctest::Approx(0.5 * r.eigen * (s.psibar.transpose() * Sbar * s.psibar).trace()));
        CHECK(e.harmonic == doctest::Approx(0.5 * r.harmonic * s.w.dot(S * s.w)));
        CHECK(e.area_residual == doctest::Approx(resid));
        CHECK(e.penalty == doctest::Approx(0.5 * r.area * std::pow(resid + s.multiplier, 2)));
        const double prox = ((s.psibar - in.anchor.psibar).squaredNorm() + (s.w - in.anchor.w).squaredNorm()) / (2 * s.eta);
        CHECK(e.proximal == doctest::Approx(prox));
        CHECK(e.total() == doctest::Approx(e.coefficient + e.eigen + e.harmonic + e.penalty + e.proximal));
    }

    TEST_CASE("property: gradients match central differences on random instances")
    {
        std::mt19937_64 rng(3);
        double worst_psibar = 0.0;
        double worst_w = 0.0;
        struct Size {
            int nu, nv, k, ell;
        };
        // (10 x 10, k 10, 5 features) is the main case; the rest vary n, k and features.
        for (const Size sz : {Size{10, 10, 10, 5}, Size{10, 5, 5, 3}, Size{10, 5, 10, 5}, Size{10, 10, 5, 3}}) {
            const int reps = (sz.nu == 10 && sz.nv == 10 && sz.k == 10) ? 20 : 5;
            for (int rep = 0; rep < reps; ++rep) {
                const Instance in = random_instance(sz.nu, sz.nv, sz.k, sz.ell, rng);
                worst_psibar = std::max(worst_psibar, fd_error_psibar(in, rng));
                worst_w = std::max(worst_w, fd_error_w(in, rng));
            }
        }
        CHECK(worst_psibar <= 1e-5);
        CHECK(worst_w <= 1e-5);
    }

    TEST_CASE("grad_psibar vanishes at zero residual without eigen and proximal terms")
    {
        const Identity id = identity_setup(8);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features,
                               {.coefficient = 10, .eigen = 0, .harmonic = 1, .area = 0.01});
        const PursuitState s = initial_state(p, id.basis.vectors, 100.0);
        CHECK(grad_psibar(p, s).cwiseAbs().maxCoeff() <= 1e-12);
    }

    TEST_CASE("grad_psibar is linear in the residual")
    {
        std::mt19937_64 rng(4);
        const PursuitWeights wts{.coefficient = 10, .eigen = 0, .harmonic = 1, .area = 0.01};
        const Instance in = random_instance(10, 6, 5, 3, rng, wts);
        const auto& p = in.problem;
        const Eigen::MatrixXd LwPsibar =
            p.target().sqrt_mass.cwiseProduct(in.state.w).asDiagonal() * in.state.psibar;
        const Eigen::MatrixXd R = p.source_coefficients() - p.target_features().transpose() * LwPsibar;
        // Source features whose coefficients give residual 2R.
        const Eigen::MatrixXd C2 = p.source_coefficients() + R;
        const PursuitProblem doubled(p.source(), p.target(), p.source_basis(), p.source_basis() * C2.transpose(),
                                     p.target_features(), wts);
        const Eigen::MatrixXd g1 = grad_psibar(p, in.state);
        const Eigen::MatrixXd g2 = grad_psibar(doubled, in.state);
        CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() <= 1e-8 * g1.cwiseAbs().maxCoeff());
    }

    TEST_CASE("grad_w vanishes when only feasible constant w remains")
    {
        std::mt19937_64 rng(5);
        Instance in = random_instance(10, 6, 5, 3, rng, {.coefficient = 0, .eigen = 0, .harmonic = 1, .area = 0.01});
        in.state.w.setConstant(std::sqrt(in.problem.area() / in.problem.target().area()));
        in.state.multiplier = 0.0;
        CHECK(grad_w(in.problem, in.state).cwiseAbs().maxCoeff() <= 1e-10);
    }

    TEST_CASE("grad_w area penalty direction")
    {
        std::mt19937_64 rng(6);
        const Instance in = random_instance(10, 6, 5, 3, rng, {.coefficient = 0, .eigen = 0, .harmonic = 0, .area = 0.3});
        const auto& s = in.state;
        const Eigen::VectorXd Mw = in.problem.target().mass.cwiseProduct(s.w);
        const double resid = s.w.dot(Mw) - in.problem.area();
        const Eigen::VectorXd expect = 0.3 * (resid + s.multiplier) * 2.0 * Mw;
        CHECK((grad_w(in.problem, s) - expect).cwiseAbs().maxCoeff() <= 1e-12 * expect.cwiseAbs().maxCoeff());
    }

    TEST_CASE("problem validation")
    {
        const Identity id = identity_setup(6);
        CHECK_THROWS_AS(PursuitProblem(id.ops, id.ops, id.basis.vectors, id.features, id.features.leftCols(2), {}), Error);
        CHECK_THROWS_AS(PursuitProblem(id.ops, id.ops, id.basis.vectors, id.features, id.features,
                                       {.coefficient = -1, .eigen = 1, .harmonic = 1, .area = 1}),
                        Error);
        CHECK_THROWS_AS(PursuitProblem(id.ops, id.ops, id.basis.vectors.topRows(5), id.features, id.features, {}), Error);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        PursuitState s = initial_state(p, id.basis.vectors, 100.0);
        s.w.conservativeResize(3);
        CHECK_THROWS_AS(energy(p, s), Error);
    }

    TEST_CASE("property: PAM steps are monotone and keep the frame feasible")
    {
        std::mt19937_64 rng(7);
        for (int rep = 0; rep < 3; ++rep) {
            Instance in = random_instance(12, 8, 6, 4, rng);
            in.state.eta = 100.0;
            PursuitState s = in.state;
            for (int j = 0; j < 8; ++j) {
                StepRecord rec;
                const PursuitState next = pam_step(in.problem, s, {}, &rec);
                // L(new; b) + prox <= L(old; b) with the multiplier used in the step.
                CHECK(rec.energy.total() <= rec.reference + 1e-10);
                CHECK(stiefel::feasibility_error(next.psibar) <= 1e-8);
                CHECK(next.w.minCoeff() > 0.0);
                CHECK(rec.multiplier == doctest::Approx(s.multiplier + energy(in.problem, next).area_residual));
                s = next;
            }
        }
    }

    TEST_CASE("one inner round means one w and one multiplier update")
    {
        std::mt19937_64 rng(8);
        const Instance in = random_instance(10, 6, 5, 3, rng);
        StepRecord rec;
        const PursuitState next = pam_step(in.problem, in.state, {}, &rec);
        CHECK(next.outer_iterations == in.state.outer_iterations + 1);
        CHECK(next.multiplier == doctest::Approx(in.state.multiplier + energy(in.problem, next).area_residual).epsilon(1e-12));
    }

    TEST_CASE("converged state is nearly a fixed point")
    {
        // Identity problem at its optimum: zero residual, natural basis, feasible
        // constant w. The w block may still trade eigen energy against the
        // harmonic term, so compare the state after convergence.
        const Identity id = identity_setup(10);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        SolveOptions opts;
        opts.max_outer = 300;
        const SolveResult r = solve(p, initial_state(p, id.basis.vectors, 100.0), opts);
        REQUIRE(r.converged);
        StepRecord rec;
        const PursuitState again = pam_step(p, r.state, opts.pam, &rec);
        // The stop rule flattens the energy to 1e-6 relative; the state is
        // pinned to roughly the square root of that.
        CHECK((again.w - r.state.w).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK((again.psibar - r.state.psibar).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK(rec.energy.total() <= rec.reference + 1e-10);
    }

    TEST_CASE("identity problem: constant factor, tiny steps, feasible area")
    {
        const Identity id = identity_setup(20);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        SolveOptions opts;
        opts.max_outer = 300;
        const SolveResult r = solve(p, initial_state(p, id.basis.vectors, 100.0), opts);
        CHECK(r.converged);
        const Eigen::VectorXd w2 = r.state.w.array().square();
        const double expect = p.area() / p.target().area();
        // The eigen term can trade against a non-constant w, so the optimum is
        // only near-constant; 5% on this 162-vertex, 20-mode instance.
        CHECK((w2.array() / expect - 1.0).abs().maxCoeff() <= 0.05);
        CHECK(std::abs(energy(p, r.state).area_residual) / p.area() <= 1e-3);
        bool small_step = false;
        for (const StepRecord& rec : r.history) {
            CHECK(rec.energy.total() <= rec.reference + 1e-10);
            small_step = small_step || rec.step_psibar + rec.step_w < 1e-6;
        }
        CHECK(small_step);
    }

    TEST_CASE("property: scaling both feature sets scales the coefficient term by s^2")
    {
        const Identity id = identity_setup(10);
        std::mt19937_64 rng(9);
        const PursuitProblem p1(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        const PursuitProblem p2(id.ops, id.ops, id.basis.vectors, 2.0 * id.features, 2.0 * id.features, {});
        PursuitState s = initial_state(p1, id.basis.vectors, 100.0);
        s.psibar = stiefel::orthonormalize(s.psibar + 0.1 * lbp::test::random_matrix(s.psibar.rows(), s.psibar.cols(), rng));
        CHECK(energy(p2, s).coefficient == doctest::Approx(4.0 * energy(p1, s).coefficient).epsilon(1e-12));

        // The coefficient-term minimizer over the frame is unchanged by s.
        auto coefficient_argmin = [&](const PursuitProblem& p) {
            const Eigen::VectorXd lw = p.target().sqrt_mass.cwiseProduct(s.w);
            const Eigen::MatrixXd P = lw.asDiagonal() * p.target_features();
            const Eigen::MatrixXd C = p.source_coefficients();
            const stiefel::Problem sub{
                [&](const Eigen::MatrixXd& X) { return 0.5 * (C - P.transpose() * X).squaredNorm(); },
                [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd { return -(P * (C - P.transpose() * X)); }};
            stiefel::Options o;
            o.max_iterations = 3000;
            o.gradient_tolerance = 1e-12;
            return stiefel::minimize(sub, s.psibar, o);
        };
        const stiefel::Result a = coefficient_argmin(p1);
        const stiefel::Result b = coefficient_argmin(p2);
        CHECK(a.value <= 1e-10);
        CHECK(b.value <= 4e-10);
        const Eigen::MatrixXd P = (id.ops.sqrt_mass.cwiseProduct(s.w)).asDiagonal() * id.features;
        CHECK((P.transpose() * a.X - P.transpose() * b.X).cwiseAbs().maxCoeff() <= 1e-5);
    }

    TEST_CASE("reinit with indicators never recomputes features and never raises the energy")
    {
        const Identity id = identity_setup(12);
        const PursuitProblem p(id.ops, id.ops, id.basis.vectors, id.features, id.features, {});
        SolveOptions opts;
        opts.max_outer = 120;
        opts.stall_window = 5;
        opts.max_reinit = 3;
        PursuitState start = initial_state(p, id.basis.vectors, 100.0);
        start.psibar.col(3) *= -1.0;
        const SolveResult r = solve_with_reinit(p, start, opts);
        CHECK(r.target_features == id.features);
        CHECK_FALSE(r.reinit_events.empty());
        // The flipped column is realigned by the landmarks.
        CHECK(energy(p, r.state).coefficient * 10.0 <= energy(p, start).coefficient);
        CHECK(r.state.psibar.col(3).dot(initial_state(p, id.basis.vectors, 100.0).psibar.col(3)) > 0.0);
        for (const ReinitEvent& ev : r.reinit_events) {
            CHECK(ev.accepted == (ev.after <= ev.before));
        }
        for (const StepRecord& rec : r.history) {
            CHECK(rec.energy.total() <= rec.reference + 1e-10);
        }
    }
}
