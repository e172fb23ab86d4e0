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

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lbp/mesh.hpp"

namespace lbp
{

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lumped mass (diagonal, stored as a vector), cotangent stiffness, and L = sqrt(M).
struct FemOperators {
    Eigen::VectorXd mass;
    SparseMatrix stiffness;
    Eigen::VectorXd sqrt_mass;

    Eigen::Index size() const { return mass.size(); }
    double area() const { return mass.sum(); }
};

Eigen::VectorXd mass_matrix(const TriMesh& mesh);
SparseMatrix stiffness_matrix(const TriMesh& mesh);
FemOperators assemble(const TriMesh& mesh);

/// Operators rescaled as if the mesh were scaled by `factor` (M * factor^2, S unchanged).
FemOperators rescaled(const FemOperators& ops, double factor);

/// Number of strictly positive off-diagonal stiffness entries (obtuse-angle
/// pairs where cot a + cot b < 0).
long count_negative_weights(const SparseMatrix& S);

/**
 * Conformally deformed operators for a per-vertex factor w > 0.
 *
 *   Mw   = diag(w) M diag(w)
 *   Sbar = L^-T diag(w)^-1 S diag(w)^-1 L^-1   (applied, never formed)
 */
struct DeformedOperators {
    FemOperators base;
    Eigen::VectorXd w;
    Eigen::VectorXd mass_w;

    /// w^T M w.
    double area() const { return mass_w.sum(); }
    Eigen::MatrixXd apply_sbar(const Eigen::MatrixXd& X) const;
};

DeformedOperators deform(const FemOperators& ops, const Eigen::VectorXd& w);

/// Sbar(w) X without building a DeformedOperators.
Eigen::MatrixXd apply_sbar(const FemOperators& ops, const Eigen::VectorXd& w, const Eigen::MatrixXd& X);

void write_mass(const Eigen::VectorXd& mass, const std::filesystem::path& path);
/// Coordinate format, one `i j value` per line, both triangles of the symmetric matrix.
void write_triplets(const SparseMatrix& S, const std::filesystem::path& path);
SparseMatrix read_triplets(const std::filesystem::path& path, Eigen::Index n);

}  // namespace lbp
