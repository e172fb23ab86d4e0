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

#include "lbp/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/SparseCholesky>

#include "lbp/error.hpp"

namespace lbp
{

namespace
{

void check_landmarks(Eigen::Index n, const std::vector<int>& landmarks)
{
    std::set<int> seen;
    for (int v : landmarks) {
        if (v < 0 || v >= n) {
            throw InputError("landmark " + std::to_string(v) + " out of range");
        }
        if (!seen.insert(v).second) {
            throw InputError("duplicate landmark " + std::to_string(v));
        }
    }
}

FeatureSet crank_nicolson(const Eigen::VectorXd& mass, const SparseMatrix& S, const std::vector<int>& landmarks,
                          const std::vector<int>& steps, double dt)
{
    const Eigen::Index n = mass.size();
    check_landmarks(n, landmarks);
    if (!(dt > 0.0)) {
        throw InputError("heat step size must be positive");
    }
    for (int s : steps) {
        if (s < 0) {
            throw InputError("heat snapshot step counts must be non-negative");
        }
    }
    SparseMatrix lhs = 0.5 * dt * S;
    SparseMatrix rhs = -0.5 * dt * S;
    for (Eigen::Index i = 0; i < n; ++i) {
        lhs.coeffRef(i, i) += mass(i);
        rhs.coeffRef(i, i) += mass(i);
    }
    Eigen::SimplicialLDLT<SparseMatrix> solver(lhs);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("heat: factorization of M + dt/2 S failed");
    }

    const auto L = static_cast<Eigen::Index>(landmarks.size());
    const auto T = static_cast<Eigen::Index>(steps.size());
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, L);
    for (Eigen::Index j = 0; j < L; ++j) {
        U(landmarks[j], j) = 1.0;
    }
    std::vector<std::pair<int, Eigen::Index>> order;
    for (Eigen::Index t = 0; t < T; ++t) {
        order.emplace_back(steps[t], t);
    }
    std::sort(order.begin(), order.end());

    FeatureSet out;
    out.kind = FeatureKind::Heat;
    out.landmarks = landmarks;
    out.steps = steps;
    out.dt = dt;
    out.values.resize(n, L * T);
    int done = 0;
    for (const auto& [count, t] : order) {
        for (; done < count; ++done) {
            U = solver.solve(rhs * U);
            if (solver.info() != Eigen::Success) {
                throw NumericalError("heat: linear solve failed");
            }
        }
        for (Eigen::Index j = 0; j < L; ++j) {
            out.values.col(j * T + t) = U.col(j);
        }
    }
    return out;
}

}  // namespace

const char* to_string(FeatureKind kind)
{
    switch (kind) {
    case FeatureKind::Indicator:
        return "indicator";
    case FeatureKind::Heat:
        return "heat";
    case FeatureKind::Wks:
        return "wks";
    }
    return "?";
}

FeatureKind feature_kind_from_string(const std::string& name)
{
    if (name == "indicator") {
        return FeatureKind::Indicator;
    }
    if (name == "heat") {
        return FeatureKind::Heat;
    }
    if (name == "wks") {
        return FeatureKind::Wks;
    }
    throw InputError("unknown feature kind '" + name + "'");
}

FeatureSet indicator_features(Eigen::Index num_vertices, const std::vector<int>& landmarks)
{
    check_landmarks(num_vertices, landmarks);
    FeatureSet out;
    out.kind = FeatureKind::Indicator;
    out.landmarks = landmarks;
    out.values = Eigen::MatrixXd::Zero(num_vertices, static_cast<Eigen::Index>(landmarks.size()));
    for (std::size_t j = 0; j < landmarks.size(); ++j) {
        out.values(landmarks[j], static_cast<Eigen::Index>(j)) = 1.0;
    }
    return out;
}

FeatureSet heat_features(const FemOperators& ops, const std::vector<int>& landmarks,
                         const std::vector<int>& steps, double dt)
{
    return crank_nicolson(ops.mass, ops.stiffness, landmarks, steps, dt);
}

FeatureSet heat_features(const DeformedOperators& dops, const std::vector<int>& landmarks,
                         const std::vector<int>& steps, double dt)
{
    return crank_nicolson(dops.mass_w, dops.base.stiffness, landmarks, steps, dt);
}

double default_heat_dt(const FemOperators& ops)
{
    return 0.5 * ops.area() / static_cast<double>(ops.size());
}

namespace
{

Eigen::MatrixXd wks_weights(const Eigen::VectorXd& values, const std::vector<double>& energies, double sigma)
{
    if (!(sigma > 0.0)) {
        throw InputError("WKS sigma must be positive");
    }
    if (values.size() == 0 || (values.array() <= 1e-8 * values.cwiseAbs().maxCoeff()).any()) {
        throw InputError("WKS needs positive eigenvalues (drop the constant mode)");
    }
    const Eigen::VectorXd logs = values.array().log();
    Eigen::MatrixXd weights(values.size(), static_cast<Eigen::Index>(energies.size()));
    for (std::size_t e = 0; e < energies.size(); ++e) {
        const auto col = static_cast<Eigen::Index>(e);
        // Shift by the largest exponent so narrow bands do not underflow.
        Eigen::VectorXd expo = -(logs.array() - energies[e]).square() / (2.0 * sigma * sigma);
        expo.array() -= expo.maxCoeff();
        weights.col(col) = expo.array().exp();
        weights.col(col) /= weights.col(col).sum();
    }
    return weights;
}

}  // namespace

Eigen::MatrixXd wks_signature(const EigenBasis& basis, const std::vector<double>& energies, double sigma)
{
    const Eigen::MatrixXd weights = wks_weights(basis.values, energies, sigma);
    return basis.vectors.array().square().matrix() * weights;
}

FeatureSet wks_features(const EigenBasis& basis, const std::vector<int>& landmarks,
                        const std::vector<double>& energies, double sigma)
{
    const Eigen::Index n = basis.vectors.rows();
    check_landmarks(n, landmarks);
    if (basis.size() < 2) {
        throw InputError("WKS needs at least two eigenpairs");
    }
    const Eigen::MatrixXd weights = wks_weights(basis.values, energies, sigma);
    const auto E = static_cast<Eigen::Index>(energies.size());
    FeatureSet out;
    out.kind = FeatureKind::Wks;
    out.landmarks = landmarks;
    out.energies = energies;
    out.sigma = sigma;
    out.values.resize(n, static_cast<Eigen::Index>(landmarks.size()) * E);
    for (std::size_t j = 0; j < landmarks.size(); ++j) {
        const Eigen::RowVectorXd at = basis.vectors.row(landmarks[j]);
        for (Eigen::Index e = 0; e < E; ++e) {
            const Eigen::VectorXd coeff = at.transpose().cwiseProduct(weights.col(e));
            out.values.col(static_cast<Eigen::Index>(j) * E + e) = basis.vectors * coeff;
        }
    }
    return out;
}

double default_wks_sigma(const Eigen::VectorXd& values)
{
    if (values.size() < 2 || (values.array() <= 0.0).any()) {
        throw InputError("default WKS sigma needs >= 2 positive eigenvalues");
    }
    const double span = std::log(values.maxCoeff()) - std::log(values.minCoeff());
    const double gap = span / static_cast<double>(values.size() - 1);
    return gap > 0.0 ? 0.5 * gap : 1e-3;
}

std::vector<double> default_wks_energies(const Eigen::VectorXd& values, int count, double sigma)
{
    if (count < 1) {
        throw InputError("WKS energy count must be positive");
    }
    double lo = std::log(values.minCoeff()) + 2.0 * sigma;
    double hi = std::log(values.maxCoeff()) - 2.0 * sigma;
    if (hi < lo) {
        lo = hi = 0.5 * (lo + hi);
    }
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1));
    }
    return out;
}

EigenBasis nontrivial_part(const EigenBasis& basis, double threshold)
{
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
        if (basis.values(j) > threshold) {
            keep.push_back(j);
        }
    }
    EigenBasis out;
    out.metric = basis.metric;
    out.values.resize(static_cast<Eigen::Index>(keep.size()));
    out.vectors.resize(basis.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        out.values(static_cast<Eigen::Index>(j)) = basis.values(keep[j]);
        out.vectors.col(static_cast<Eigen::Index>(j)) = basis.vectors.col(keep[j]);
    }
    return out;
}

LandmarkPairs read_landmarks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open landmark file '" + path.string() + "'");
    }
    LandmarkPairs pairs;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream row(line);
        int s = 0, t = 0;
        if (!(row >> s)) {
            continue;
        }
        if (!(row >> t)) {
            throw InputError("landmark file line " + std::to_string(lineno) + " needs two indices");
        }
        pairs.emplace_back(s, t);
    }
    return pairs;
}

void write_landmarks(const LandmarkPairs& pairs, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    for (const auto& [s, t] : pairs) {
        out << s << ' ' << t << '\n';
    }
}

}  // namespace lbp
