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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lbp
{

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

enum class MeshFormat { Auto, OFF, OBJ };

struct MeshOptions {
    /// Zero-area threshold as a multiple of the squared bounding-box diagonal.
    double degenerate_area_factor = 1e-12;
};

/**
 * Immutable triangle mesh. Construction validates indices, edge manifoldness
 * (at most two triangles per edge) and triangle areas.
 */
class TriMesh
{
public:
    TriMesh() = default;
    TriMesh(Vertices vertices, Triangles triangles, const MeshOptions& opts = {});

    const Vertices& vertices() const { return vertices_; }
    const Triangles& triangles() const { return triangles_; }
    std::size_t num_vertices() const { return static_cast<std::size_t>(vertices_.rows()); }
    std::size_t num_triangles() const { return static_cast<std::size_t>(triangles_.rows()); }

    /// Undirected edge count.
    std::size_t num_edges() const { return num_edges_; }
    std::size_t num_boundary_edges() const { return num_boundary_edges_; }
    bool is_closed() const { return num_boundary_edges_ == 0; }
    long euler_characteristic() const;
    double bbox_diagonal() const;

    /// Area-weighted average of incident face normals, unit length.
    Vertices vertex_normals() const;
    const std::optional<Vertices>& stored_normals() const { return normals_; }
    void set_normals(Vertices normals);

    /// Sorted neighbour lists of the edge graph.
    std::vector<std::vector<int>> vertex_adjacency() const;
    bool is_connected() const;

    TriMesh scaled(double factor) const;
    TriMesh with_vertices(Vertices vertices) const;

private:
    Vertices vertices_;
    Triangles triangles_;
    std::optional<Vertices> normals_;
    std::size_t num_edges_ = 0;
    std::size_t num_boundary_edges_ = 0;
    MeshOptions opts_;
};

struct FaceGeometry {
    Eigen::VectorXd areas;                 ///< one per triangle
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> cotangents;  ///< cot of the angle at each corner
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> angles;
    std::vector<std::vector<int>> rings;   ///< incident triangles per vertex, ascending
};

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto,
                  const MeshOptions& opts = {});
TriMesh parse_off(const std::string& text, const MeshOptions& opts = {});
TriMesh parse_obj(const std::string& text, const MeshOptions& opts = {},
                  std::vector<std::string>* warnings = nullptr);

void save_off(const TriMesh& mesh, const std::filesystem::path& path);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

FaceGeometry face_geometry(const TriMesh& mesh);
std::vector<int> first_ring(const TriMesh& mesh, std::size_t vertex);
double triangle_area(const TriMesh& mesh, std::size_t triangle);
double total_area(const TriMesh& mesh);

/// Sum of the areas of the triangles incident to each vertex.
Eigen::VectorXd ring_areas(const TriMesh& mesh);

/// Subdivided icosahedron projected onto a sphere; 10 * 4^s + 2 vertices.
TriMesh icosphere(int subdivisions, double radius = 1.0);

}  // namespace lbp
