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

// Command-line front end. Everything goes through the C interface in lbp.h.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lbp/lbp.h"

namespace fs = std::filesystem;

namespace
{

struct MeshDeleter {
    void operator()(lbp_mesh* m) const { lbp_mesh_free(m); }
};
struct ConfigDeleter {
    void operator()(lbp_config* c) const { lbp_config_free(c); }
};
struct ResultDeleter {
    void operator()(lbp_result* r) const { lbp_result_free(r); }
};
using MeshPtr = std::unique_ptr<lbp_mesh, MeshDeleter>;
using ConfigPtr = std::unique_ptr<lbp_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<lbp_result, ResultDeleter>;

int report(lbp_status status, const std::string& context)
{
    if (status != LBP_OK) {
        std::cerr << "lbp " << context << ": " << lbp_last_error() << '\n';
    }
    return static_cast<int>(status);
}

int usage_error(const std::string& message)
{
    std::cerr << "lbp: " << message << '\n';
    return LBP_ERR_INPUT;
}

bool make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "lbp: cannot create '" << dir.string() << "': " << ec.message() << '\n';
        return false;
    }
    return true;
}

int load(const std::string& path, MeshPtr& mesh)
{
    lbp_mesh* m = nullptr;
    const lbp_status s = lbp_mesh_load(path.c_str(), &m);
    mesh.reset(m);
    return report(s, "load");
}

int cmd_assemble(const std::string& mesh_path, const fs::path& out)
{
    MeshPtr mesh;
    if (int rc = load(mesh_path, mesh)) {
        return rc;
    }
    if (!make_dir(out)) {
        return LBP_ERR_INPUT;
    }
    return report(lbp_write_operators(mesh.get(), (out / "mass.txt").c_str(), (out / "stiffness.txt").c_str()),
                  "assemble");
}

int cmd_eigs(const std::string& mesh_path, int k, std::uint64_t seed, const fs::path& out)
{
    MeshPtr mesh;
    if (int rc = load(mesh_path, mesh)) {
        return rc;
    }
    const size_t n = lbp_mesh_num_vertices(mesh.get());
    if (k < 1 || static_cast<size_t>(k) >= n) {
        return usage_error("--k must be in [1, " + std::to_string(n - 1) + "] for this mesh");
    }
    if (!make_dir(out)) {
        return LBP_ERR_INPUT;
    }
    return report(lbp_write_eigs(mesh.get(), k, seed, (out / "eigenvalues.txt").c_str(), (out / "basis.txt").c_str()),
                  "eigs");
}

struct SolveArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int k = 0;
    std::vector<std::string> overrides;
};

int set_option(lbp_config* config, const std::string& key, const std::string& value)
{
    return report(lbp_config_set(config, key.c_str(), value.c_str()), "config");
}

int cmd_solve(const SolveArgs& args)
{
    lbp_config* raw = nullptr;
    const int load_rc = report(lbp_config_load(args.config.c_str(), &raw), "config");
    ConfigPtr config(raw);
    if (load_rc) {
        return load_rc;
    }
    for (const std::string& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            return usage_error("--set expects key=value, got '" + kv + "'");
        }
        if (int rc = set_option(config.get(), kv.substr(0, eq), kv.substr(eq + 1))) {
            return rc;
        }
    }
    if (args.seed_set) {
        if (int rc = set_option(config.get(), "seed", std::to_string(args.seed))) {
            return rc;
        }
    }
    if (args.k > 0) {
        if (int rc = set_option(config.get(), "k", std::to_string(args.k))) {
            return rc;
        }
    }
    if (!args.out.empty()) {
        if (int rc = set_option(config.get(), "out", fs::absolute(args.out).string())) {
            return rc;
        }
    }

    char* text = nullptr;
    if (int rc = report(lbp_config_format(config.get(), &text), "config")) {
        return rc;
    }
    std::string out_dir;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("out = ", 0) == 0) {
                out_dir = line.substr(6);
            }
        }
    }
    lbp_string_free(text);

    lbp_result* res = nullptr;
    const lbp_status status = lbp_solve(config.get(), &res);
    ResultPtr result(res);
    const std::string solve_message = lbp_last_error();
    if (!result) {
        return report(status, "solve");
    }
    if (!make_dir(out_dir)) {
        return LBP_ERR_INPUT;
    }
    if (int rc = report(lbp_result_write(result.get(), out_dir.c_str()), "write")) {
        return rc;
    }
    if (status == LBP_ERR_NOT_CONVERGED) {
        std::cerr << "lbp solve: " << solve_message << "; outputs written to " << out_dir << '\n';
    }
    return static_cast<int>(status);
}

int cmd_map(const std::string& source_basis, const std::string& target_basis, const std::string& out)
{
    return report(lbp_map_files(source_basis.c_str(), target_basis.c_str(), out.c_str()), "map");
}

struct EvalJob {
    std::string mesh, map, gt, out;
};

void print_summary(std::ostream& os, const EvalJob& job, const lbp_error_summary& s)
{
    os << job.out << ": exact " << s.exact_fraction << "  <=0.05 " << s.frac_le_005 << "  mean " << s.mean
       << "  median " << s.median << '\n';
}

int cmd_eval(const EvalJob& single, const std::string& batch, int jobs)
{
    std::vector<EvalJob> work;
    if (batch.empty()) {
        if (single.mesh.empty() || single.map.empty() || single.gt.empty()) {
            return usage_error("eval needs --mesh, --map and --gt (or --batch)");
        }
        work.push_back(single);
    } else {
        std::ifstream in(batch);
        if (!in) {
            return usage_error("cannot open '" + batch + "'");
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') {
                continue;
            }
            std::istringstream fields(line);
            EvalJob job;
            if (!(fields >> job.mesh >> job.map >> job.gt >> job.out)) {
                return usage_error("batch line needs 'mesh map gt out': " + line);
            }
            work.push_back(job);
        }
    }

    std::atomic<size_t> next{0};
    std::atomic<int> worst{0};
    std::mutex io;
    auto worker = [&] {
        for (size_t i = next++; i < work.size(); i = next++) {
            lbp_error_summary summary{};
            const lbp_status s =
                lbp_eval_files(work[i].mesh.c_str(), work[i].map.c_str(), work[i].gt.c_str(), work[i].out.c_str(),
                               &summary);
            std::lock_guard<std::mutex> lock(io);
            if (s != LBP_OK) {
                std::cerr << "lbp eval " << work[i].out << ": " << lbp_last_error() << '\n';
                int prev = worst.load();
                while (static_cast<int>(s) > prev && !worst.compare_exchange_weak(prev, static_cast<int>(s))) {
                }
            } else {
                print_summary(std::cout, work[i], summary);
            }
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return worst.load();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Conformal Laplace-Beltrami basis pursuit for mesh registration"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lbp_version()));

    std::string mesh_path, out;
    int k = 0;
    std::uint64_t seed = 7;

    auto* assemble = app.add_subcommand("assemble", "Write lumped mass and cotangent stiffness");
    assemble->add_option("--mesh", mesh_path, "Mesh file (.off or .obj)")->required();
    assemble->add_option("--out", out, "Output directory")->required();

    auto* eigs = app.add_subcommand("eigs", "Smallest Laplace-Beltrami eigenpairs");
    eigs->add_option("--mesh", mesh_path, "Mesh file (.off or .obj)")->required();
    eigs->add_option("--k", k, "Number of eigenpairs")->required();
    eigs->add_option("--seed", seed, "Start-vector seed");
    eigs->add_option("--out", out, "Output directory")->required();

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Register a mesh pair from a config file");
    solve->add_option("--config", solve_args.config, "Config file (key = value)")->required();
    solve->add_option("--out", solve_args.out, "Output directory (overrides config)");
    auto* seed_opt = solve->add_option("--seed", solve_args.seed, "Seed (overrides config)");
    solve->add_option("--k", solve_args.k, "Basis size (overrides config)");
    solve->add_option("--set", solve_args.overrides, "Extra key=value overrides")->take_all();

    std::string source_basis, target_basis;
    auto* map = app.add_subcommand("map", "Nearest-neighbour point map between two bases");
    map->add_option("--source-basis", source_basis, "Source basis matrix")->required();
    map->add_option("--target-basis", target_basis, "Target basis matrix")->required();
    map->add_option("--out", out, "Correspondence output file")->required();

    EvalJob eval_job;
    std::string batch;
    int jobs = 1;
    auto* eval = app.add_subcommand("eval", "Normalized geodesic error of a point map");
    eval->add_option("--mesh", eval_job.mesh, "Target mesh");
    eval->add_option("--map", eval_job.map, "Computed correspondence");
    eval->add_option("--gt", eval_job.gt, "Ground-truth correspondence");
    eval->add_option("--out", eval_job.out, "Output directory")->default_val("eval");
    eval->add_option("--batch", batch, "File with one 'mesh map gt out' job per line");
    eval->add_option("--jobs", jobs, "Worker threads for --batch")->check(CLI::PositiveNumber);

    lbp_synth_spec spec;
    lbp_synth_spec_default(&spec);
    std::string base_mesh;
    bool farthest = false;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic test pair");
    synth->add_option("--out", out, "Output directory")->required();
    synth->add_option("--mesh", base_mesh, "Base mesh (default: icosphere)");
    synth->add_option("--subdivisions", spec.subdivisions, "Icosphere subdivisions")->capture_default_str();
    synth->add_option("--scale", spec.scale, "Target scale factor")->capture_default_str();
    synth->add_option("--noise", spec.noise, "Normal noise, fraction of bbox diagonal")->capture_default_str();
    synth->add_option("--landmarks", spec.landmarks, "Landmark count")->capture_default_str();
    synth->add_flag("--farthest", farthest, "Farthest-point landmark sampling");
    synth->add_option("--perturb", spec.perturb, "Fraction of landmarks moved to a 1-ring neighbour")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "Seed")->capture_default_str();

    auto* defaults = app.add_subcommand("defaults", "Print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : LBP_ERR_INPUT;
    }

    if (*assemble) {
        return cmd_assemble(mesh_path, out);
    }
    if (*eigs) {
        return cmd_eigs(mesh_path, k, seed, out);
    }
    if (*solve) {
        solve_args.seed_set = seed_opt->count() > 0;
        return cmd_solve(solve_args);
    }
    if (*map) {
        return cmd_map(source_basis, target_basis, out);
    }
    if (*eval) {
        return cmd_eval(eval_job, batch, jobs);
    }
    if (*synth) {
        if (!base_mesh.empty()) {
            spec.base_mesh = base_mesh.c_str();
        }
        spec.farthest_point = farthest ? 1 : 0;
        return report(lbp_synth(&spec, out.c_str()), "synth");
    }
    if (*defaults) {
        lbp_config* raw = nullptr;
        if (int rc = report(lbp_config_default(&raw), "defaults")) {
            return rc;
        }
        ConfigPtr config(raw);
        char* text = nullptr;
        if (int rc = report(lbp_config_format(config.get(), &text), "defaults")) {
            return rc;
        }
        std::cout << text;
        lbp_string_free(text);
        return 0;
    }
    return LBP_ERR_INPUT;
}
