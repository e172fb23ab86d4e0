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

#include <fstream>
#include <set>

#include "lbp/error.hpp"
#include "lbp/fem.hpp"
#include "lbp/mesh.hpp"
#include "test_util.hpp"

using namespace lbp;
using lbp::test::data;

namespace
{

// Oracle: angle between the two edges at a corner via acos of the normalized
// dot product.
double corner_cot(const Eigen::RowVector3d& at, const Eigen::RowVector3d& a, const Eigen::RowVector3d& b)
{
    const Eigen::RowVector3d u = a - at;
    const Eigen::RowVector3d v = b - at;
    const double angle = std::acos(u.dot(v) / (u.norm() * v.norm()));
    return std::cos(angle) / std::sin(angle);
}

}  // namespace

TEST_SUITE("mesh")
{
    TEST_CASE("OFF tetrahedron loads as a closed genus-zero manifold")
    {
        const TriMesh m = load_mesh(data("tetrahedron.off"));
        CHECK(m.num_vertices() == 4);
        CHECK(m.num_triangles() == 4);
        CHECK(m.num_edges() == 6);
        CHECK(m.is_closed());
        CHECK(m.euler_characteristic() == 2);
        CHECK(m.is_connected());
    }

    TEST_CASE("OBJ tetrahedron with 1-based indices equals the OFF result")
    {
        const TriMesh off = load_mesh(data("tetrahedron.off"));
        const TriMesh obj = load_mesh(data("tetrahedron.obj"));
        CHECK(off.vertices() == obj.vertices());
        CHECK(off.triangles() == obj.triangles());
    }

    TEST_CASE("OBJ records other than v and f are reported")
    {
        std::vector<std::string> warnings;
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1 2 3\n", {}, &warnings);
        CHECK(warnings.size() == 1);
    }

    TEST_CASE("edge shared by three faces is rejected")
    {
        CHECK_THROWS_AS(load_mesh(data("nonmanifold.off")), Error);
        try {
            load_mesh(data("nonmanifold.off"));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Input);
            CHECK(std::string(e.what()).find("non-manifold") != std::string::npos);
        }
    }

    TEST_CASE("invalid inputs")
    {
        CHECK_THROWS_AS(load_mesh(data("missing.off")), Error);
        CHECK_THROWS_AS(load_mesh(data("collinear.off")), Error);
        CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n"), Error);
        CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"), Error);
        CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"), Error);
    }

    TEST_CASE("open meshes load and report their boundary")
    {
        const TriMesh sq = load_mesh(data("square_open.off"));
        CHECK_FALSE(sq.is_closed());
        CHECK(sq.num_boundary_edges() == 4);
    }

    TEST_CASE("save and reload round trip")
    {
        const auto dir = lbp::test::scratch_dir("mesh_io");
        const TriMesh ico = icosphere(1);
        save_off(ico, dir / "a.off");
        save_obj(ico, dir / "a.obj");
        for (const char* name : {"a.off", "a.obj"}) {
            const TriMesh back = load_mesh(dir / name);
            CHECK(back.triangles() == ico.triangles());
            CHECK((back.vertices() - ico.vertices()).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    TEST_CASE("unit equilateral triangle geometry")
    {
        const FaceGeometry g = face_geometry(lbp::test::unit_triangle());
        CHECK(g.areas(0) == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));
        for (int c = 0; c < 3; ++c) {
            CHECK(g.cotangents(0, c) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
        }
    }

    TEST_CASE("right triangle has zero cotangent at the right angle")
    {
        const TriMesh m = lbp::test::mesh_from({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
        const FaceGeometry g = face_geometry(m);
        CHECK(g.areas(0) == doctest::Approx(0.5));
        CHECK(std::abs(g.cotangents(0, 0)) < 1e-15);
        CHECK(g.cotangents(0, 1) == doctest::Approx(1.0));
    }

    TEST_CASE("first rings")
    {
        const TriMesh tet = lbp::test::tetrahedron();
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(first_ring(tet, i).size() == 3);
        }
        const TriMesh ico = load_mesh(data("icosahedron.off"));
        for (std::size_t i = 0; i < ico.num_vertices(); ++i) {
            const auto ring = first_ring(ico, i);
            CHECK(ring.size() == 5);
            for (int t : ring) {
                const auto tri = ico.triangles().row(t);
                CHECK((tri.array() == static_cast<int>(i)).any());
            }
        }
        CHECK_THROWS_AS(first_ring(tet, 4), Error);
    }

    TEST_CASE("total area")
    {
        CHECK(total_area(lbp::test::unit_triangle()) == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));
        const double sphere = total_area(icosphere(3));
        CHECK(std::abs(sphere - 4 * M_PI) / (4 * M_PI) < 0.01);
        CHECK(sphere < 4 * M_PI);
        const TriMesh ico = icosphere(2);
        CHECK(total_area(ico.scaled(2.0)) == doctest::Approx(4.0 * total_area(ico)).epsilon(1e-14));
    }

    TEST_CASE("icosphere sizes")
    {
        const TriMesh m = icosphere(3);
        CHECK(m.num_vertices() == 642);
        CHECK(m.num_triangles() == 1280);
        CHECK(m.euler_characteristic() == 2);
        CHECK((m.vertices().rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-14);
    }

    TEST_CASE("property: every edge has one or two triangles, closed meshes have Euler characteristic 2")
    {
        for (const char* name : {"tetrahedron.off", "icosahedron.off", "ellipsoid.off", "bumpy_sphere.off"}) {
            const TriMesh m = load_mesh(data(name));
            CHECK(m.is_closed());
            CHECK(m.euler_characteristic() == 2);
        }
        CHECK(load_mesh(data("torus.off")).euler_characteristic() == 0);
    }

    TEST_CASE("property: face areas sum to the total and angles sum to pi")
    {
        for (const char* name : {"bumpy_sphere.off", "torus.off", "ellipsoid.off"}) {
            const TriMesh m = load_mesh(data(name));
            const FaceGeometry g = face_geometry(m);
            CHECK(std::abs(g.areas.sum() - total_area(m)) <= 1e-12 * total_area(m));
            CHECK((g.angles.rowwise().sum().array() - M_PI).abs().maxCoeff() <= 1e-9);
        }
    }

    TEST_CASE("property: cotangents match an acos oracle and survive rigid motion")
    {
        std::mt19937_64 rng(3);
        const TriMesh m = load_mesh(data("bumpy_sphere.off"));
        const FaceGeometry g = face_geometry(m);
        const auto& V = m.vertices();
        double worst = 0.0;
        for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(m.num_triangles()); ++t) {
            for (int c = 0; c < 3; ++c) {
                const auto i = m.triangles()(t, c);
                const auto j = m.triangles()(t, (c + 1) % 3);
                const auto k = m.triangles()(t, (c + 2) % 3);
                worst = std::max(worst, std::abs(g.cotangents(t, c) - corner_cot(V.row(i), V.row(j), V.row(k))));
            }
        }
        CHECK(worst < 1e-9);

        const Eigen::Matrix3d R = lbp::test::random_rotation(rng);
        const Eigen::RowVector3d shift(3.0, -1.0, 7.5);
        Vertices moved = (V * R.transpose()).rowwise() + shift;
        const FaceGeometry h = face_geometry(m.with_vertices(std::move(moved)));
        CHECK((h.cotangents - g.cotangents).cwiseAbs().maxCoeff() <= 1e-9);
    }

    TEST_CASE("property: area scales with the square of the factor")
    {
        const TriMesh m = load_mesh(data("bumpy_sphere.off"));
        for (double c : {0.1, 3.0, 17.0}) {
            CHECK(std::abs(total_area(m.scaled(c)) - c * c * total_area(m)) <= 1e-12 * c * c * total_area(m));
        }
    }

    TEST_CASE("vertex normals point outward on a sphere")
    {
        const TriMesh m = icosphere(2);
        const Vertices N = m.vertex_normals();
        const Eigen::VectorXd dots = (N.array() * m.vertices().array()).rowwise().sum();
        CHECK(dots.minCoeff() > 0.99);
        CHECK((N.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
    }

    TEST_CASE("degenerate threshold is configurable")
    {
        Vertices V(3, 3);
        V << 0, 0, 0, 1, 0, 0, 0.5, 1e-7, 0;
        Triangles T(1, 3);
        T << 0, 1, 2;
        CHECK_NOTHROW(TriMesh(V, T));
        CHECK_THROWS_AS(TriMesh(V, T, MeshOptions{.degenerate_area_factor = 1e-6}), Error);
    }
}
