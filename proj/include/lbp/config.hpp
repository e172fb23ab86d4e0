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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lbp/features.hpp"
#include "lbp/pursuit.hpp"

namespace lbp
{

/// Flat `key = value` run configuration. Every key has a default; see
/// format_config(RunConfig{}) for the full list.
struct RunConfig {
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path landmarks;
    std::filesystem::path out = "out";

    FeatureKind feature = FeatureKind::Indicator;
    std::vector<int> heat_steps{1, 4, 16};
    double heat_dt = 0.0;              ///< 0: half the mean vertex mass
    int wks_count = 5;
    double wks_sigma = 0.0;            ///< 0: half the mean log-eigenvalue gap

    int k = 100;                       ///< basis size, constant mode included; capped at n - 1
    PursuitWeights weights;
    double eta = 100.0;
    int inner_rounds = 1;
    int max_outer = 500;
    double tol = 1e-6;
    int patience = 10;

    bool reinit = false;
    int max_reinit = 5;
    double stall_tol = 1e-4;
    int stall_window = 10;
    int reinit_iterations = 200;

    int stiefel_iterations = 30;
    double stiefel_tol = 1e-5;
    int lbfgs_memory = 10;
    int lbfgs_iterations = 50;

    /// Each mesh is scaled on its own so its mean vertex mass equals this
    /// value; 0 keeps the input scale. Outputs are reported in input units.
    double mean_vertex_mass = 10.0;

    int eig_block = 8;
    int eig_restarts = 200;
    std::uint64_t seed = 7;
    int verbosity = 1;
};

/// Parses `key = value` lines; `#` starts a comment. Relative paths are
/// resolved against `base_dir`. Unknown keys and malformed values throw.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
/// Round-trippable text form.
std::string format_config(const RunConfig& config);
/// Range checks shared by every entry point.
void validate_config(const RunConfig& config);

/// Solver options implied by a config.
SolveOptions solve_options(const RunConfig& config);

}  // namespace lbp
