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

#include "lbp/fem.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "lbp/error.hpp"

namespace lbp
{

Eigen::VectorXd mass_matrix(const TriMesh& mesh)
{
    return ring_areas(mesh) / 3.0;
}

SparseMatrix stiffness_matrix(const TriMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    const FaceGeometry geo = face_geometry(mesh);
    const auto& F = mesh.triangles();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(F.rows()) * 12);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            // Corner c is opposite the edge (c+1, c+2).
            const int i = F(t, (c + 1) % 3);
            const int j = F(t, (c + 2) % 3);
            const double half_cot = 0.5 * geo.cotangents(t, c);
            trips.emplace_back(i, j, -half_cot);
            trips.emplace_back(j, i, -half_cot);
            trips.emplace_back(i, i, half_cot);
            trips.emplace_back(j, j, half_cot);
        }
    }
    SparseMatrix S(n, n);
    S.setFromTriplets(trips.begin(), trips.end());
    S.makeCompressed();
    return S;
}

FemOperators assemble(const TriMesh& mesh)
{
    FemOperators ops;
    ops.mass = mass_matrix(mesh);
    ops.stiffness = stiffness_matrix(mesh);
    ops.sqrt_mass = ops.mass.cwiseSqrt();
    return ops;
}

FemOperators rescaled(const FemOperators& ops, double factor)
{
    FemOperators out = ops;
    out.mass *= factor * factor;
    out.sqrt_mass = out.mass.cwiseSqrt();
    return out;
}

long count_negative_weights(const SparseMatrix& S)
{
    long count = 0;
    for (Eigen::Index k = 0; k < S.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(S, k); it; ++it) {
            if (it.row() != it.col() && it.value() > 0.0) {
                ++count;
            }
        }
    }
    return count / 2;
}

Eigen::MatrixXd apply_sbar(const FemOperators& ops, const Eigen::VectorXd& w, const Eigen::MatrixXd& X)
{
    const Eigen::VectorXd scale = (ops.sqrt_mass.array() * w.array()).inverse().matrix();
    Eigen::MatrixXd Y = scale.asDiagonal() * X;
    Y = ops.stiffness * Y;
    return scale.asDiagonal() * Y;
}

Eigen::MatrixXd DeformedOperators::apply_sbar(const Eigen::MatrixXd& X) const
{
    return lbp::apply_sbar(base, w, X);
}

DeformedOperators deform(const FemOperators& ops, const Eigen::VectorXd& w)
{
    if (w.size() != ops.size()) {
        throw InputError("conformal factor length does not match operator size");
    }
    if (!(w.array() > 0.0).all() || !w.allFinite()) {
        throw InputError("conformal factor must be strictly positive");
    }
    DeformedOperators d;
    d.base = ops;
    d.w = w;
    d.mass_w = w.cwiseProduct(ops.mass).cwiseProduct(w);
    return d;
}

void write_mass(const Eigen::VectorXd& mass, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
        out << mass(i) << '\n';
    }
}

void write_triplets(const SparseMatrix& S, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    for (Eigen::Index k = 0; k < S.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(S, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
}

SparseMatrix read_triplets(const std::filesystem::path& path, Eigen::Index n)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::vector<Eigen::Triplet<double>> trips;
    long i = 0, j = 0;
    double v = 0.0;
    while (in >> i >> j >> v) {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            throw InputError("triplet index out of range in '" + path.string() + "'");
        }
        trips.emplace_back(i, j, v);
    }
    SparseMatrix S(n, n);
    S.setFromTriplets(trips.begin(), trips.end());
    return S;
}

}  // namespace lbp
