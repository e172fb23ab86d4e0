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

#include "lbp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>
#include <type_traits>

#include "lbp/error.hpp"

namespace lbp
{

namespace
{

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return {};
    }
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) {
        throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    return x;
}

long long to_integer(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) {
        throw InputError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
    return x;
}

int to_int(const std::string& key, const std::string& v)
{
    const long long x = to_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw InputError("config: '" + key + "' out of range");
    }
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw InputError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_int(key, trim(item)));
    }
    if (out.empty()) {
        throw InputError("config: '" + key + "' expects a comma-separated list");
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)>;

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base)
{
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"source", [](RunConfig& c, const std::string& v, const auto& b) { c.source = resolve(v, b); }},
        {"target", [](RunConfig& c, const std::string& v, const auto& b) { c.target = resolve(v, b); }},
        {"landmarks", [](RunConfig& c, const std::string& v, const auto& b) { c.landmarks = resolve(v, b); }},
        {"out", [](RunConfig& c, const std::string& v, const auto& b) { c.out = resolve(v, b); }},
        {"feature", [](RunConfig& c, const std::string& v, const auto&) { c.feature = feature_kind_from_string(v); }},
        {"heat_steps", [](RunConfig& c, const std::string& v, const auto&) { c.heat_steps = to_int_list("heat_steps", v); }},
        {"heat_dt", [](RunConfig& c, const std::string& v, const auto&) { c.heat_dt = to_double("heat_dt", v); }},
        {"wks_count", [](RunConfig& c, const std::string& v, const auto&) { c.wks_count = to_int("wks_count", v); }},
        {"wks_sigma", [](RunConfig& c, const std::string& v, const auto&) { c.wks_sigma = to_double("wks_sigma", v); }},
        {"k", [](RunConfig& c, const std::string& v, const auto&) { c.k = to_int("k", v); }},
        {"r1", [](RunConfig& c, const std::string& v, const auto&) { c.weights.coefficient = to_double("r1", v); }},
        {"r2", [](RunConfig& c, const std::string& v, const auto&) { c.weights.eigen = to_double("r2", v); }},
        {"r3", [](RunConfig& c, const std::string& v, const auto&) { c.weights.harmonic = to_double("r3", v); }},
        {"r4", [](RunConfig& c, const std::string& v, const auto&) { c.weights.area = to_double("r4", v); }},
        {"eta", [](RunConfig& c, const std::string& v, const auto&) { c.eta = to_double("eta", v); }},
        {"inner_rounds", [](RunConfig& c, const std::string& v, const auto&) { c.inner_rounds = to_int("inner_rounds", v); }},
        {"max_outer", [](RunConfig& c, const std::string& v, const auto&) { c.max_outer = to_int("max_outer", v); }},
        {"tol", [](RunConfig& c, const std::string& v, const auto&) { c.tol = to_double("tol", v); }},
        {"patience", [](RunConfig& c, const std::string& v, const auto&) { c.patience = to_int("patience", v); }},
        {"reinit", [](RunConfig& c, const std::string& v, const auto&) { c.reinit = to_bool("reinit", v); }},
        {"max_reinit", [](RunConfig& c, const std::string& v, const auto&) { c.max_reinit = to_int("max_reinit", v); }},
        {"stall_tol", [](RunConfig& c, const std::string& v, const auto&) { c.stall_tol = to_double("stall_tol", v); }},
        {"stall_window", [](RunConfig& c, const std::string& v, const auto&) { c.stall_window = to_int("stall_window", v); }},
        {"reinit_iterations", [](RunConfig& c, const std::string& v, const auto&) { c.reinit_iterations = to_int("reinit_iterations", v); }},
        {"stiefel_iterations", [](RunConfig& c, const std::string& v, const auto&) { c.stiefel_iterations = to_int("stiefel_iterations", v); }},
        {"stiefel_tol", [](RunConfig& c, const std::string& v, const auto&) { c.stiefel_tol = to_double("stiefel_tol", v); }},
        {"lbfgs_memory", [](RunConfig& c, const std::string& v, const auto&) { c.lbfgs_memory = to_int("lbfgs_memory", v); }},
        {"lbfgs_iterations", [](RunConfig& c, const std::string& v, const auto&) { c.lbfgs_iterations = to_int("lbfgs_iterations", v); }},
        {"mean_vertex_mass", [](RunConfig& c, const std::string& v, const auto&) { c.mean_vertex_mass = to_double("mean_vertex_mass", v); }},
        {"eig_block", [](RunConfig& c, const std::string& v, const auto&) { c.eig_block = to_int("eig_block", v); }},
        {"eig_restarts", [](RunConfig& c, const std::string& v, const auto&) { c.eig_restarts = to_int("eig_restarts", v); }},
        {"seed", [](RunConfig& c, const std::string& v, const auto&) {
             const long long s = to_integer("seed", v);
             if (s < 0) {
                 throw InputError("config: 'seed' must be non-negative");
             }
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"verbosity", [](RunConfig& c, const std::string& v, const auto&) { c.verbosity = to_int("verbosity", v); }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir)
{
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw InputError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        }
        it->second(c, value, base_dir);
    }
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

void validate_config(const RunConfig& c)
{
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw InputError(std::string("config: ") + what);
        }
    };
    require(c.k >= 1, "k must be >= 1");
    require(c.weights.coefficient > 0 && c.weights.eigen > 0 && c.weights.harmonic > 0 && c.weights.area > 0,
            "r1..r4 must be positive");
    require(c.eta > 0, "eta must be positive");
    require(c.inner_rounds >= 1, "inner_rounds must be >= 1");
    require(c.max_outer >= 1, "max_outer must be >= 1");
    require(c.tol >= 0 && c.stall_tol >= 0, "tolerances must be non-negative");
    require(c.patience >= 1 && c.stall_window >= 1, "patience and stall_window must be >= 1");
    require(c.max_reinit >= 0, "max_reinit must be >= 0");
    require(c.reinit_iterations >= 1 && c.stiefel_iterations >= 1 && c.lbfgs_iterations >= 1,
            "iteration caps must be >= 1");
    require(c.stiefel_tol >= 0, "stiefel_tol must be non-negative");
    require(c.lbfgs_memory >= 1, "lbfgs_memory must be >= 1");
    require(c.mean_vertex_mass >= 0, "mean_vertex_mass must be non-negative");
    require(c.heat_dt >= 0 && c.wks_sigma >= 0, "heat_dt and wks_sigma must be non-negative");
    require(c.wks_count >= 1, "wks_count must be >= 1");
    for (int s : c.heat_steps) {
        require(s >= 0, "heat_steps must be non-negative");
    }
    require(c.eig_block >= 1 && c.eig_restarts >= 1, "eig_block and eig_restarts must be >= 1");
}

std::string format_config(const RunConfig& c)
{
    std::ostringstream o;
    auto line = [&o](const char* key, const auto& value) {
        o << key << " = ";
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(value)>>) {
            // Shortest text that parses back to the same double.
            char buf[32];
            o << std::string_view(buf, std::to_chars(buf, buf + sizeof buf, value).ptr - buf);
        } else {
            o << value;
        }
        o << '\n';
    };
    o << "# paths\n";
    auto path = [&o](const char* key, const std::filesystem::path& p) {
        o << (p.empty() ? "# " : "") << key << " = " << p.string() << '\n';
    };
    path("source", c.source);
    path("target", c.target);
    path("landmarks", c.landmarks);
    line("out", c.out.string());
    o << "\n# features\n";
    line("feature", to_string(c.feature));
    std::string steps;
    for (std::size_t i = 0; i < c.heat_steps.size(); ++i) {
        steps += (i ? "," : "") + std::to_string(c.heat_steps[i]);
    }
    line("heat_steps", steps);
    line("heat_dt", c.heat_dt);
    line("wks_count", c.wks_count);
    line("wks_sigma", c.wks_sigma);
    o << "\n# model\n";
    line("k", c.k);
    line("r1", c.weights.coefficient);
    line("r2", c.weights.eigen);
    line("r3", c.weights.harmonic);
    line("r4", c.weights.area);
    line("mean_vertex_mass", c.mean_vertex_mass);
    o << "\n# solver\n";
    line("eta", c.eta);
    line("inner_rounds", c.inner_rounds);
    line("max_outer", c.max_outer);
    line("tol", c.tol);
    line("patience", c.patience);
    line("stiefel_iterations", c.stiefel_iterations);
    line("stiefel_tol", c.stiefel_tol);
    line("lbfgs_memory", c.lbfgs_memory);
    line("lbfgs_iterations", c.lbfgs_iterations);
    o << "\n# reinitialization\n";
    line("reinit", c.reinit ? "true" : "false");
    line("max_reinit", c.max_reinit);
    line("stall_tol", c.stall_tol);
    line("stall_window", c.stall_window);
    line("reinit_iterations", c.reinit_iterations);
    o << "\n# eigensolver and misc\n";
    line("eig_block", c.eig_block);
    line("eig_restarts", c.eig_restarts);
    line("seed", c.seed);
    line("verbosity", c.verbosity);
    return o.str();
}

SolveOptions solve_options(const RunConfig& c)
{
    SolveOptions o;
    o.eta = c.eta;
    o.max_outer = c.max_outer;
    o.tolerance = c.tol;
    o.patience = c.patience;
    o.max_reinit = c.max_reinit;
    o.stall_tolerance = c.stall_tol;
    o.stall_window = c.stall_window;
    o.reinit_stiefel.max_iterations = c.reinit_iterations;
    o.pam.inner_rounds = c.inner_rounds;
    o.pam.stiefel.max_iterations = c.stiefel_iterations;
    o.pam.stiefel.gradient_tolerance = c.stiefel_tol;
    o.pam.lbfgs.memory = c.lbfgs_memory;
    o.pam.lbfgs.max_iterations = c.lbfgs_iterations;
    return o;
}

}  // namespace lbp
