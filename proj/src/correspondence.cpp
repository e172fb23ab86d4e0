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

#include "lbp/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "lbp/error.hpp"

namespace lbp
{

Eigen::MatrixXd recover_basis(const Eigen::VectorXd& w, const Eigen::MatrixXd& psibar,
                              const Eigen::VectorXd& sqrt_mass)
{
    if (w.size() != psibar.rows() || sqrt_mass.size() != psibar.rows()) {
        throw InputError("recover_basis: size mismatch");
    }
    if (!(w.array() > 0.0).all()) {
        throw InputError("recover_basis: w must be strictly positive");
    }
    if (!(sqrt_mass.array() > 0.0).all()) {
        throw InputError("recover_basis: L must be strictly positive");
    }
    return w.cwiseProduct(sqrt_mass).cwiseInverse().asDiagonal() * psibar;
}

Correspondence point_map(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                         const Eigen::VectorXd* column_weights)
{
    if (phi.cols() == 0 || psi.cols() == 0) {
        throw InputError("point_map: k = 0");
    }
    if (phi.cols() != psi.cols()) {
        throw InputError("point_map: bases have different column counts");
    }
    if (psi.rows() == 0) {
        throw InputError("point_map: empty target basis");
    }
    Eigen::MatrixXd a = phi;
    Eigen::MatrixXd b = psi;
    if (column_weights) {
        if (column_weights->size() != phi.cols()) {
            throw InputError("point_map: weight count does not match k");
        }
        a = a * column_weights->asDiagonal();
        b = b * column_weights->asDiagonal();
    }
    // |a - b|^2 = |a|^2 - 2 a.b + |b|^2; the first term is constant per row.
    const Eigen::VectorXd b_norms = b.rowwise().squaredNorm();
    Correspondence out;
    out.k = static_cast<int>(phi.cols());
    out.map.resize(static_cast<std::size_t>(phi.rows()));
    constexpr Eigen::Index chunk = 256;
    for (Eigen::Index start = 0; start < a.rows(); start += chunk) {
        const Eigen::Index rows = std::min(chunk, a.rows() - start);
        const Eigen::MatrixXd dots = b * a.middleRows(start, rows).transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::VectorXd proxy = b_norms - 2.0 * dots.col(r);
            const double floor = proxy.minCoeff();
            const double slack = 1e-9 * (a.row(start + r).squaredNorm() + b_norms.maxCoeff());
            // Exact distances among near-minimal candidates; ties go to the lowest index.
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < b.rows(); ++j) {
                if (proxy(j) > floor + slack) {
                    continue;
                }
                const double d = (b.row(j) - a.row(start + r)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            out.map[static_cast<std::size_t>(start + r)] = static_cast<int>(best);
        }
    }
    return out;
}

Eigen::VectorXd functional_map(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                               const Eigen::VectorXd& source_mass, const Eigen::VectorXd& h)
{
    if (phi.cols() != psi.cols() || phi.rows() != source_mass.size() || h.size() != phi.rows()) {
        throw InputError("functional_map: shape mismatch");
    }
    return psi * (phi.transpose() * source_mass.cwiseProduct(h));
}

Eigen::VectorXd graph_geodesics(const TriMesh& mesh, int source)
{
    const auto n = static_cast<int>(mesh.num_vertices());
    if (source < 0 || source >= n) {
        throw InputError("graph_geodesics: vertex out of range");
    }
    const auto adjacency = mesh.vertex_adjacency();
    const auto& v = mesh.vertices();
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist(source) = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, i] = queue.top();
        queue.pop();
        if (d > dist(i)) {
            continue;
        }
        for (int j : adjacency[static_cast<std::size_t>(i)]) {
            const double nd = d + (v.row(i) - v.row(j)).norm();
            if (nd < dist(j)) {
                dist(j) = nd;
                queue.emplace(nd, j);
            }
        }
    }
    return dist;
}

ErrorReport geodesic_errors(const TriMesh& target, const Correspondence& map, const Correspondence& truth,
                            int samples, double max_x)
{
    if (map.size() != truth.size()) {
        throw InputError("geodesic_errors: map and ground truth cover different vertex sets");
    }
    if (samples < 2 || !(max_x > 0.0)) {
        throw InputError("geodesic_errors: need at least two curve samples over a positive range");
    }
    const auto n = static_cast<int>(target.num_vertices());
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.map[i] < 0 || map.map[i] >= n || truth.map[i] < 0 || truth.map[i] >= n) {
            throw InputError("geodesic_errors: index out of range");
        }
    }
    if (!target.is_connected()) {
        throw NumericalError("geodesic_errors: target mesh is disconnected");
    }
    const double norm = std::sqrt(total_area(target));

    ErrorReport r;
    r.errors = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
    std::map<int, std::vector<std::size_t>> by_truth;
    std::size_t exact = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.map[i] == truth.map[i]) {
            ++exact;
        } else {
            by_truth[truth.map[i]].push_back(i);
        }
    }
    for (const auto& [origin, members] : by_truth) {
        const Eigen::VectorXd d = graph_geodesics(target, origin);
        for (std::size_t i : members) {
            r.errors(static_cast<Eigen::Index>(i)) = d(map.map[i]) / norm;
        }
    }

    const auto count = static_cast<double>(map.size());
    std::vector<double> sorted(r.errors.data(), r.errors.data() + r.errors.size());
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
        r.exact_fraction = static_cast<double>(exact) / count;
        r.mean = r.errors.mean();
        const std::size_t mid = sorted.size() / 2;
        r.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        r.frac_le_005 =
            static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), 0.05) - sorted.begin()) / count;
    }
    for (int s = 0; s < samples; ++s) {
        const double x = max_x * s / (samples - 1);
        const auto within = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        r.curve_x.push_back(x);
        r.curve_fraction.push_back(sorted.empty() ? 1.0 : static_cast<double>(within) / count);
    }
    return r;
}

Eigen::VectorXd conformal_ground_truth(const TriMesh& source, const TriMesh& target, const Correspondence& truth)
{
    if (truth.size() != source.num_vertices()) {
        throw InputError("conformal_ground_truth: ground truth must cover every source vertex");
    }
    const Eigen::VectorXd a1 = ring_areas(source);
    const Eigen::VectorXd a2 = ring_areas(target);
    Eigen::VectorXd u(static_cast<Eigen::Index>(source.num_vertices()));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const int t = truth.map[static_cast<std::size_t>(i)];
        if (t < 0 || t >= static_cast<int>(target.num_vertices())) {
            throw InputError("conformal_ground_truth: index out of range");
        }
        if (!(a1(i) > 0.0) || !(a2(t) > 0.0)) {
            throw InputError("conformal_ground_truth: empty first ring");
        }
        u(i) = 0.5 * std::log(a1(i) / a2(t));
    }
    return u;
}

ConformalComparison compare_conformal(const Eigen::VectorXd& w, const Eigen::VectorXd& truth_u,
                                      const Correspondence& truth)
{
    if (static_cast<Eigen::Index>(truth.size()) != truth_u.size()) {
        throw InputError("compare_conformal: ground truth size mismatch");
    }
    if (!(w.array() > 0.0).all()) {
        throw InputError("compare_conformal: w must be strictly positive");
    }
    ConformalComparison c;
    c.truth = truth_u;
    c.recovered.resize(truth_u.size());
    for (Eigen::Index i = 0; i < truth_u.size(); ++i) {
        const int t = truth.map[static_cast<std::size_t>(i)];
        if (t < 0 || t >= w.size()) {
            throw InputError("compare_conformal: index out of range");
        }
        c.recovered(i) = std::log(w(t));
    }
    if (truth_u.size() == 0) {
        return c;
    }
    const Eigen::ArrayXd diff = (c.recovered - c.truth).array().abs();
    c.mean_abs_diff = diff.mean();
    c.max_abs_diff = diff.maxCoeff();
    const double scale = c.truth.array().abs().mean();
    c.relative_mad = scale > 1e-12 ? c.mean_abs_diff / scale : c.mean_abs_diff;
    return c;
}

Correspondence read_correspondence(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    Correspondence c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        long long v = 0;
        if (!(ss >> v)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected a vertex index");
        }
        std::string rest;
        if (ss >> rest || v < 0 || v > std::numeric_limits<int>::max()) {
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed index");
        }
        c.map.push_back(static_cast<int>(v));
    }
    return c;
}

void write_correspondence(const Correspondence& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    for (int t : c.map) {
        out << t << '\n';
    }
}

void write_error_curve(const ErrorReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out.precision(10);
    out << "x,fraction\n";
    for (std::size_t i = 0; i < report.curve_x.size(); ++i) {
        out << report.curve_x[i] << ',' << report.curve_fraction[i] << '\n';
    }
}

std::string error_summary_json(const ErrorReport& report)
{
    nlohmann::json j;
    j["exact_fraction"] = report.exact_fraction;
    j["frac_le_005"] = report.frac_le_005;
    j["mean"] = report.mean;
    j["median"] = report.median;
    j["count"] = report.errors.size();
    return j.dump(2);
}

void write_error_summary(const ErrorReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << error_summary_json(report) << '\n';
}

}  // namespace lbp
