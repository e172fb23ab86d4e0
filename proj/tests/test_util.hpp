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

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "lbp/mesh.hpp"

#ifndef LBP_TEST_DATA
#error "LBP_TEST_DATA must point at tests/data"
#endif

namespace lbp::test
{

inline std::filesystem::path data(const std::string& name)
{
    return std::filesystem::path(LBP_TEST_DATA) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("lbp_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline TriMesh mesh_from(std::initializer_list<std::array<double, 3>> v, std::initializer_list<std::array<int, 3>> t)
{
    Vertices V(static_cast<Eigen::Index>(v.size()), 3);
    Eigen::Index i = 0;
    for (const auto& p : v) {
        V.row(i++) << p[0], p[1], p[2];
    }
    Triangles T(static_cast<Eigen::Index>(t.size()), 3);
    i = 0;
    for (const auto& f : t) {
        T.row(i++) << f[0], f[1], f[2];
    }
    return TriMesh(std::move(V), std::move(T));
}

inline TriMesh unit_triangle()
{
    return mesh_from({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}}, {{0, 1, 2}});
}

inline TriMesh tetrahedron()
{
    return mesh_from({{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}},
                     {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

// Regular hexagon of unit equilateral triangles around vertex 0.
inline TriMesh hexagon_fan()
{
    Vertices V(7, 3);
    V.row(0) << 0, 0, 0;
    for (int j = 0; j < 6; ++j) {
        const double a = j * M_PI / 3.0;
        V.row(j + 1) << std::cos(a), std::sin(a), 0;
    }
    Triangles T(6, 3);
    for (int j = 0; j < 6; ++j) {
        T.row(j) << 0, j + 1, (j + 1) % 6 + 1;
    }
    return TriMesh(std::move(V), std::move(T));
}

// Closed nu x nv torus grid, two triangles per cell.
inline TriMesh torus(int nu, int nv, double R = 2.0, double r = 0.7)
{
    Vertices V(nu * nv, 3);
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double a = 2 * M_PI * i / nu;
            const double b = 2 * M_PI * j / nv;
            V.row(i * nv + j) << (R + r * std::cos(b)) * std::cos(a), (R + r * std::cos(b)) * std::sin(a),
                r * std::sin(b);
        }
    }
    Triangles T(2 * nu * nv, 3);
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const int p = i * nv + j;
            const int q = ((i + 1) % nu) * nv + j;
            const int p1 = i * nv + (j + 1) % nv;
            const int q1 = ((i + 1) % nu) * nv + (j + 1) % nv;
            T.row(2 * p) << p, q, q1;
            T.row(2 * p + 1) << p, q1, p1;
        }
    }
    return TriMesh(std::move(V), std::move(T));
}

inline Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(n, k);
    for (Eigen::Index i = 0; i < A.size(); ++i) {
        A.data()[i] = g(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

inline Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(n, k);
    for (Eigen::Index i = 0; i < A.size(); ++i) {
        A.data()[i] = g(rng);
    }
    return A;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng)
{
    Eigen::Matrix3d Q = random_orthonormal(3, 3, rng);
    if (Q.determinant() < 0) {
        Q.col(0) *= -1.0;
    }
    return Q;
}

}  // namespace lbp::test
