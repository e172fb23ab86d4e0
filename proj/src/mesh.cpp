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

#include "lbp/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Geometry>

#include "lbp/error.hpp"

namespace lbp
{

namespace
{

Eigen::Vector3d corner(const TriMesh& mesh, int v) { return mesh.vertices().row(v).transpose(); }

double raw_triangle_area(const Vertices& V, int a, int b, int c)
{
    const Eigen::Vector3d u = (V.row(b) - V.row(a)).transpose();
    const Eigen::Vector3d w = (V.row(c) - V.row(a)).transpose();
    return 0.5 * u.cross(w).norm();
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Next non-empty, non-comment line.
bool next_line(std::istringstream& in, std::string& line)
{
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

TriMesh::TriMesh(Vertices vertices, Triangles triangles, const MeshOptions& opts)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), opts_(opts)
{
    const auto n = static_cast<int>(vertices_.rows());
    if (!vertices_.allFinite()) {
        throw InputError("mesh has non-finite vertex coordinates");
    }
    std::vector<std::pair<int, int>> edges;
    edges.reserve(3 * triangles_.rows());
    const double diag = bbox_diagonal();
    const double eps_area = opts_.degenerate_area_factor * diag * diag;
    for (Eigen::Index t = 0; t < triangles_.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int v = triangles_(t, c);
            if (v < 0 || v >= n) {
                throw InputError("triangle " + std::to_string(t) + " references vertex " +
                                 std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
            }
        }
        const int a = triangles_(t, 0), b = triangles_(t, 1), c = triangles_(t, 2);
        if (a == b || b == c || a == c) {
            throw InputError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        if (!(raw_triangle_area(vertices_, a, b, c) > eps_area)) {
            throw InputError("triangle " + std::to_string(t) + " has zero area");
        }
        for (int c0 = 0; c0 < 3; ++c0) {
            const int i = triangles_(t, c0), j = triangles_(t, (c0 + 1) % 3);
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t s = 0; s < edges.size();) {
        std::size_t e = s;
        while (e < edges.size() && edges[e] == edges[s]) {
            ++e;
        }
        const auto count = e - s;
        if (count > 2) {
            throw InputError("non-manifold edge (" + std::to_string(edges[s].first) + ", " +
                             std::to_string(edges[s].second) + ") shared by " +
                             std::to_string(count) + " triangles");
        }
        ++num_edges_;
        if (count == 1) {
            ++num_boundary_edges_;
        }
        s = e;
    }
}

long TriMesh::euler_characteristic() const
{
    return static_cast<long>(num_vertices()) - static_cast<long>(num_edges_) +
           static_cast<long>(num_triangles());
}

double TriMesh::bbox_diagonal() const
{
    if (vertices_.rows() == 0) {
        return 0.0;
    }
    const Eigen::RowVector3d lo = vertices_.colwise().minCoeff();
    const Eigen::RowVector3d hi = vertices_.colwise().maxCoeff();
    return (hi - lo).norm();
}

Vertices TriMesh::vertex_normals() const
{
    if (normals_) {
        return *normals_;
    }
    Vertices normals = Vertices::Zero(vertices_.rows(), 3);
    for (Eigen::Index t = 0; t < triangles_.rows(); ++t) {
        const int a = triangles_(t, 0), b = triangles_(t, 1), c = triangles_(t, 2);
        // |cross| = 2 * area, so this is already area weighted.
        const Eigen::RowVector3d nrm =
            (vertices_.row(b) - vertices_.row(a)).cross(vertices_.row(c) - vertices_.row(a));
        normals.row(a) += nrm;
        normals.row(b) += nrm;
        normals.row(c) += nrm;
    }
    for (Eigen::Index v = 0; v < normals.rows(); ++v) {
        const double len = normals.row(v).norm();
        if (len > 0.0) {
            normals.row(v) /= len;
        }
    }
    return normals;
}

void TriMesh::set_normals(Vertices normals)
{
    if (normals.rows() != vertices_.rows()) {
        throw InputError("normal count does not match vertex count");
    }
    normals_ = std::move(normals);
}

std::vector<std::vector<int>> TriMesh::vertex_adjacency() const
{
    std::vector<std::vector<int>> adj(num_vertices());
    for (Eigen::Index t = 0; t < triangles_.rows(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int i = triangles_(t, c), j = triangles_(t, (c + 1) % 3);
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
}

bool TriMesh::is_connected() const
{
    if (num_vertices() == 0) {
        return true;
    }
    const auto adj = vertex_adjacency();
    std::vector<char> seen(num_vertices(), 0);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop();
        for (int u : adj[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                queue.push(u);
            }
        }
    }
    return reached == num_vertices();
}

TriMesh TriMesh::scaled(double factor) const
{
    if (!(factor > 0.0)) {
        throw InputError("scale factor must be positive");
    }
    return with_vertices(vertices_ * factor);
}

TriMesh TriMesh::with_vertices(Vertices vertices) const
{
    if (vertices.rows() != vertices_.rows()) {
        throw InputError("replacement vertex count does not match");
    }
    return TriMesh(std::move(vertices), triangles_, opts_);
}

TriMesh parse_off(const std::string& text, const MeshOptions& opts)
{
    std::istringstream in(text);
    std::string line;
    if (!next_line(in, line)) {
        throw InputError("OFF: empty file");
    }
    std::istringstream head(line);
    std::string magic;
    head >> magic;
    if (magic != "OFF") {
        throw InputError("OFF: missing 'OFF' header");
    }
    long nv = -1, nf = -1, ne = 0;
    if (!(head >> nv)) {
        if (!next_line(in, line)) {
            throw InputError("OFF: missing counts line");
        }
        std::istringstream counts(line);
        counts >> nv >> nf >> ne;
    } else {
        head >> nf >> ne;
    }
    if (nv < 0 || nf < 0) {
        throw InputError("OFF: malformed counts line");
    }
    Vertices V(nv, 3);
    for (long i = 0; i < nv; ++i) {
        if (!next_line(in, line)) {
            throw InputError("OFF: expected " + std::to_string(nv) + " vertices");
        }
        std::istringstream row(line);
        if (!(row >> V(i, 0) >> V(i, 1) >> V(i, 2))) {
            throw InputError("OFF: malformed vertex line " + std::to_string(i));
        }
    }
    Triangles F(nf, 3);
    for (long f = 0; f < nf; ++f) {
        if (!next_line(in, line)) {
            throw InputError("OFF: expected " + std::to_string(nf) + " faces");
        }
        std::istringstream row(line);
        int count = 0;
        if (!(row >> count) || count != 3) {
            throw InputError("OFF: face " + std::to_string(f) + " is not a triangle");
        }
        if (!(row >> F(f, 0) >> F(f, 1) >> F(f, 2))) {
            throw InputError("OFF: malformed face line " + std::to_string(f));
        }
    }
    return TriMesh(std::move(V), std::move(F), opts);
}

TriMesh parse_obj(const std::string& text, const MeshOptions& opts, std::vector<std::string>* warnings)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::array<double, 3>> verts;
    std::vector<std::array<int, 3>> faces;
    std::set<std::string> ignored;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream row(line);
        std::string tag;
        if (!(row >> tag)) {
            continue;
        }
        if (tag == "v") {
            std::array<double, 3> p{};
            if (!(row >> p[0] >> p[1] >> p[2])) {
                throw InputError("OBJ: malformed vertex on line " + std::to_string(lineno));
            }
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (row >> tok) {
                // "i", "i/t", "i//n", "i/t/n"
                const auto slash = tok.find('/');
                int k = 0;
                try {
                    k = std::stoi(tok.substr(0, slash));
                } catch (const std::exception&) {
                    throw InputError("OBJ: malformed face on line " + std::to_string(lineno));
                }
                if (k == 0) {
                    throw InputError("OBJ: zero face index on line " + std::to_string(lineno));
                }
                idx.push_back(k > 0 ? k - 1 : static_cast<int>(verts.size()) + k);
            }
            if (idx.size() != 3) {
                throw InputError("OBJ: face on line " + std::to_string(lineno) + " is not a triangle");
            }
            faces.push_back({idx[0], idx[1], idx[2]});
        } else {
            ignored.insert(tag);
        }
    }
    if (warnings) {
        for (const auto& tag : ignored) {
            warnings->push_back("OBJ: ignored '" + tag + "' records");
        }
    }
    Vertices V(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        V.row(static_cast<Eigen::Index>(i)) << verts[i][0], verts[i][1], verts[i][2];
    }
    Triangles F(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        F.row(static_cast<Eigen::Index>(f)) << faces[f][0], faces[f][1], faces[f][2];
    }
    return TriMesh(std::move(V), std::move(F), opts);
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format, const MeshOptions& opts)
{
    if (format == MeshFormat::Auto) {
        auto ext = path.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".off") {
            format = MeshFormat::OFF;
        } else if (ext == ".obj") {
            format = MeshFormat::OBJ;
        } else {
            throw InputError("cannot infer mesh format of '" + path.string() + "'");
        }
    }
    const std::string text = read_file(path);
    if (format == MeshFormat::OFF) {
        return parse_off(text, opts);
    }
    std::vector<std::string> warnings;
    auto mesh = parse_obj(text, opts, &warnings);
    for (const auto& w : warnings) {
        std::cerr << "warning: " << path.string() << ": " << w << '\n';
    }
    return mesh;
}

void save_off(const TriMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
    out << std::setprecision(17);
    const auto& V = mesh.vertices();
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
        out << V(i, 0) << ' ' << V(i, 1) << ' ' << V(i, 2) << '\n';
    }
    const auto& F = mesh.triangles();
    for (Eigen::Index f = 0; f < F.rows(); ++f) {
        out << "3 " << F(f, 0) << ' ' << F(f, 1) << ' ' << F(f, 2) << '\n';
    }
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    const auto& V = mesh.vertices();
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
        out << "v " << V(i, 0) << ' ' << V(i, 1) << ' ' << V(i, 2) << '\n';
    }
    const auto& F = mesh.triangles();
    for (Eigen::Index f = 0; f < F.rows(); ++f) {
        out << "f " << F(f, 0) + 1 << ' ' << F(f, 1) + 1 << ' ' << F(f, 2) + 1 << '\n';
    }
}

double triangle_area(const TriMesh& mesh, std::size_t triangle)
{
    const auto& F = mesh.triangles();
    const auto t = static_cast<Eigen::Index>(triangle);
    return raw_triangle_area(mesh.vertices(), F(t, 0), F(t, 1), F(t, 2));
}

FaceGeometry face_geometry(const TriMesh& mesh)
{
    const auto m = static_cast<Eigen::Index>(mesh.num_triangles());
    FaceGeometry geo;
    geo.areas.resize(m);
    geo.cotangents.resize(m, 3);
    geo.angles.resize(m, 3);
    geo.rings.assign(mesh.num_vertices(), {});
    const double diag = mesh.bbox_diagonal();
    const auto& F = mesh.triangles();
    for (Eigen::Index t = 0; t < m; ++t) {
        const std::array<int, 3> v{F(t, 0), F(t, 1), F(t, 2)};
        for (int c = 0; c < 3; ++c) {
            const Eigen::Vector3d p = corner(mesh, v[c]);
            const Eigen::Vector3d u = corner(mesh, v[(c + 1) % 3]) - p;
            const Eigen::Vector3d w = corner(mesh, v[(c + 2) % 3]) - p;
            const double cr = u.cross(w).norm();
            const double dt = u.dot(w);
            if (!(cr > 1e-15 * diag * diag)) {
                throw InputError("degenerate triangle " + std::to_string(t));
            }
            geo.cotangents(t, c) = dt / cr;
            geo.angles(t, c) = std::atan2(cr, dt);
        }
        geo.areas(t) = raw_triangle_area(mesh.vertices(), v[0], v[1], v[2]);
        for (int c = 0; c < 3; ++c) {
            geo.rings[v[c]].push_back(static_cast<int>(t));
        }
    }
    return geo;
}

std::vector<int> first_ring(const TriMesh& mesh, std::size_t vertex)
{
    if (vertex >= mesh.num_vertices()) {
        throw InputError("vertex index " + std::to_string(vertex) + " out of range");
    }
    std::vector<int> ring;
    const auto& F = mesh.triangles();
    const int v = static_cast<int>(vertex);
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        if (F(t, 0) == v || F(t, 1) == v || F(t, 2) == v) {
            ring.push_back(static_cast<int>(t));
        }
    }
    return ring;
}

double total_area(const TriMesh& mesh)
{
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        sum += triangle_area(mesh, t);
    }
    return sum;
}

Eigen::VectorXd ring_areas(const TriMesh& mesh)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    const auto& F = mesh.triangles();
    for (Eigen::Index t = 0; t < F.rows(); ++t) {
        const double a = triangle_area(mesh, static_cast<std::size_t>(t));
        for (int c = 0; c < 3; ++c) {
            out(F(t, c)) += a;
        }
    }
    return out;
}

TriMesh icosphere(int subdivisions, double radius)
{
    if (subdivisions < 0 || !(radius > 0.0)) {
        throw InputError("icosphere needs subdivisions >= 0 and radius > 0");
    }
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> pts = {
        {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
        {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1},
    };
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
    };
    for (auto& p : pts) {
        p.normalize();
    }
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            if (auto it = midpoints.find(key); it != midpoints.end()) {
                return it->second;
            }
            pts.push_back((0.5 * (pts[a] + pts[b])).normalized());
            const int id = static_cast<int>(pts.size()) - 1;
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(4 * faces.size());
        for (const auto& f : faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    Vertices V(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        V.row(static_cast<Eigen::Index>(i)) = radius * pts[i].transpose();
    }
    Triangles F(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        F.row(static_cast<Eigen::Index>(f)) << faces[f][0], faces[f][1], faces[f][2];
    }
    return TriMesh(std::move(V), std::move(F));
}

}  // namespace lbp
