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

#include "lbp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <json.hpp>

#include "lbp/error.hpp"
#include "lbp/io.hpp"

namespace lbp
{

void require_registrable(const TriMesh& mesh, const char* role)
{
    if (!mesh.is_closed()) {
        throw InputError(std::string(role) + " mesh is not closed");
    }
    if (!mesh.is_connected()) {
        throw InputError(std::string(role) + " mesh is not connected");
    }
}

namespace
{

EigenOptions eigen_options(const RunConfig& c)
{
    EigenOptions o;
    o.block_size = c.eig_block;
    o.max_restarts = c.eig_restarts;
    o.seed = c.seed;
    return o;
}

std::vector<double> wks_energies(const RunConfig& c, const EigenBasis& nontrivial, double sigma)
{
    return default_wks_energies(nontrivial.values, c.wks_count, sigma);
}

}  // namespace

std::pair<FeatureSet, FeatureSet> build_features(const RunConfig& config, const FemOperators& source_ops,
                                                 const FemOperators& target_ops, const EigenBasis& source_basis,
                                                 const EigenBasis& target_basis, const LandmarkPairs& landmarks)
{
    std::vector<int> src, tgt;
    for (const auto& [a, b] : landmarks) {
        src.push_back(a);
        tgt.push_back(b);
    }
    switch (config.feature) {
    case FeatureKind::Indicator:
        return {indicator_features(source_ops.size(), src), indicator_features(target_ops.size(), tgt)};
    case FeatureKind::Heat: {
        const double dt = config.heat_dt > 0.0 ? config.heat_dt : default_heat_dt(source_ops);
        return {heat_features(source_ops, src, config.heat_steps, dt),
                heat_features(target_ops, tgt, config.heat_steps, dt)};
    }
    case FeatureKind::Wks: {
        const EigenBasis s = nontrivial_part(source_basis);
        const EigenBasis t = nontrivial_part(target_basis);
        const double sigma = config.wks_sigma > 0.0 ? config.wks_sigma : default_wks_sigma(s.values);
        const auto energies = wks_energies(config, s, sigma);
        return {wks_features(s, src, energies, sigma), wks_features(t, tgt, energies, sigma)};
    }
    }
    throw InputError("unknown feature kind");
}

PipelineResult run_pipeline(const RunConfig& config, const TriMesh& source_in, const TriMesh& target_in,
                            const LandmarkPairs& landmarks)
{
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    require_registrable(source_in, "source");
    require_registrable(target_in, "target");
    if (landmarks.empty()) {
        throw InputError("no landmarks given");
    }
    const auto n1 = static_cast<int>(source_in.num_vertices());
    const auto n2 = static_cast<int>(target_in.num_vertices());
    for (const auto& [a, b] : landmarks) {
        if (a < 0 || a >= n1 || b < 0 || b >= n2) {
            throw InputError("landmark pair (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range");
        }
    }

    PipelineResult r;
    if (config.mean_vertex_mass > 0.0) {
        r.source_scale = std::sqrt(config.mean_vertex_mass * n1 / total_area(source_in));
        r.target_scale = std::sqrt(config.mean_vertex_mass * n2 / total_area(target_in));
    }
    const TriMesh source = source_in.scaled(r.source_scale);
    const TriMesh target = target_in.scaled(r.target_scale);
    r.source_ops = assemble(source);
    r.target_ops = assemble(target);
    r.k = std::min({config.k, n1 - 1, n2 - 1});
    if (config.verbosity > 0 && r.k < config.k) {
        std::cerr << "k capped at " << r.k << " (mesh size)\n";
    }

    r.source_basis = lb_basis(r.source_ops, r.k, eigen_options(config));
    r.target_basis = lb_basis(r.target_ops, r.k, eigen_options(config));
    std::tie(r.source_features, r.target_features) =
        build_features(config, r.source_ops, r.target_ops, r.source_basis, r.target_basis, landmarks);

    const PursuitProblem problem(r.source_ops, r.target_ops, r.source_basis.vectors, r.source_features.values,
                                 r.target_features.values, config.weights);
    SolveOptions opts = solve_options(config);
    const PursuitState start = initial_state(problem, r.target_basis.vectors, config.eta);

    if (config.feature != FeatureKind::Indicator) {
        const FeatureSet proto = r.target_features;
        const FemOperators target_ops = r.target_ops;
        const RunConfig cfg = config;
        const int k = r.k;
        opts.recompute_target_features = [proto, target_ops, cfg, k](const Eigen::VectorXd& w) {
            if (proto.kind == FeatureKind::Heat) {
                return heat_features(deform(target_ops, w), proto.landmarks, proto.steps, proto.dt).values;
            }
            // Spectrum of the deformed pencil (S, diag(w) M diag(w)); the
            // band-pass kernel is insensitive to the eigenvector gauge.
            FemOperators deformed = target_ops;
            deformed.mass = w.cwiseProduct(target_ops.mass).cwiseProduct(w);
            deformed.sqrt_mass = w.cwiseProduct(target_ops.sqrt_mass);
            const EigenBasis b = nontrivial_part(lb_basis(deformed, k, eigen_options(cfg)));
            return wks_features(b, proto.landmarks, proto.energies, proto.sigma).values;
        };
    }
    if (config.verbosity > 1) {
        opts.on_step = [](const StepRecord& s) {
            std::cerr << "iter " << s.iteration << "  L " << std::setprecision(10) << s.energy.lagrangian()
                      << "  coef " << s.energy.coefficient << "  eig " << s.energy.eigen << "  res "
                      << s.energy.area_residual << '\n';
        };
    }

    r.solve = config.reinit ? solve_with_reinit(problem, start, opts) : solve(problem, start, opts);
    // Under x -> s x: M scales by s^2, eigenvalues by 1/s^2, M-orthonormal
    // vectors by 1/s, and w (target metric / source metric) by s2 / s1.
    const double s1 = r.source_scale;
    const double s2 = r.target_scale;
    r.w = r.solve.state.w * (s2 / s1);
    r.recovered = s1 * recover_basis(r.solve.state.w, r.solve.state.psibar, r.target_ops.sqrt_mass);
    r.source_basis_input = r.source_basis;
    r.source_basis_input.vectors *= s1;
    r.source_basis_input.values *= s1 * s1;
    r.map = point_map(r.source_basis_input.vectors, r.recovered);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

PipelineResult run_pipeline(const RunConfig& config)
{
    if (config.source.empty() || config.target.empty() || config.landmarks.empty()) {
        throw InputError("config must set source, target and landmarks");
    }
    return run_pipeline(config, load_mesh(config.source), load_mesh(config.target), read_landmarks(config.landmarks));
}

void write_history_csv(const SolveResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    out << "iteration,coefficient_term,eigen_term,harmonic_term,area_residual,total,penalty,proximal,reference,"
           "multiplier,reinitialized\n";
    for (const auto& h : result.history) {
        const auto& e = h.energy;
        out << h.iteration << ',' << e.coefficient << ',' << e.eigen << ',' << e.harmonic << ',' << e.area_residual
            << ',' << e.lagrangian() << ',' << e.penalty << ',' << e.proximal << ',' << h.reference << ','
            << h.multiplier << ',' << (h.reinitialized ? 1 : 0) << '\n';
    }
}

void write_reinit_csv(const SolveResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17) << "iteration,before,after,accepted\n";
    for (const auto& e : result.reinit_events) {
        out << e.iteration << ',' << e.before << ',' << e.after << ',' << (e.accepted ? 1 : 0) << '\n';
    }
}

void write_outputs(const PipelineResult& r, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create '" + dir.string() + "': " + ec.message());
    }
    write_vector(r.w, dir / "w.txt");
    write_matrix(r.recovered, dir / "target_basis.txt");
    write_matrix(r.source_basis_input.vectors, dir / "source_basis.txt");
    write_vector(r.source_basis_input.values, dir / "source_eigenvalues.txt");
    write_history_csv(r.solve, dir / "history.csv");
    write_reinit_csv(r.solve, dir / "reinit.csv");
    write_correspondence(r.map, dir / "correspondence.txt");

    nlohmann::json j;
    j["k"] = r.k;
    j["source_scale"] = r.source_scale;
    j["target_scale"] = r.target_scale;
    j["converged"] = r.solve.converged;
    j["iterations"] = r.solve.history.size();
    j["reinitializations"] = r.solve.reinit_events.size();
    j["multiplier"] = r.solve.state.multiplier;
    if (!r.solve.history.empty()) {
        const auto& e = r.solve.history.back().energy;
        j["energy"] = {{"coefficient", e.coefficient}, {"eigen", e.eigen},       {"harmonic", e.harmonic},
                       {"area_residual", e.area_residual}, {"penalty", e.penalty}, {"total", e.lagrangian()}};
    }
    j["seconds"] = r.seconds;
    std::ofstream out(dir / "summary.json");
    if (!out) {
        throw InputError("cannot write '" + (dir / "summary.json").string() + "'");
    }
    out << j.dump(2) << '\n';
}

}  // namespace lbp
