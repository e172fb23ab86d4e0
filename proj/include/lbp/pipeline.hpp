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

#include "lbp/config.hpp"
#include "lbp/correspondence.hpp"
#include "lbp/features.hpp"
#include "lbp/fem.hpp"
#include "lbp/mesh.hpp"
#include "lbp/pursuit.hpp"
#include "lbp/spectrum.hpp"

namespace lbp
{

/// Each mesh is scaled to the configured mean vertex mass before solving.
/// Operators, bases, features and the solver state are in those normalized
/// units; `w`, `recovered` and `source_basis_input` are in input units.
struct PipelineResult {
    double source_scale = 1.0;
    double target_scale = 1.0;
    int k = 0;
    FemOperators source_ops;
    FemOperators target_ops;
    EigenBasis source_basis;
    EigenBasis target_basis;             ///< natural basis used for the start
    FeatureSet source_features;
    FeatureSet target_features;
    SolveResult solve;
    Eigen::VectorXd w;                   ///< solver w * target_scale / source_scale
    Eigen::MatrixXd recovered;           ///< diag(w)^-1 L^-1 Psibar, input units
    EigenBasis source_basis_input;
    Correspondence map;                  ///< source vertex -> target vertex
    double seconds = 0.0;
};

/// Closed, connected mesh check required by registration.
void require_registrable(const TriMesh& mesh, const char* role);

/// Feature pair for the configured kind.
std::pair<FeatureSet, FeatureSet> build_features(const RunConfig& config, const FemOperators& source_ops,
                                                 const FemOperators& target_ops, const EigenBasis& source_basis,
                                                 const EigenBasis& target_basis, const LandmarkPairs& landmarks);

/// Normalize, build bases and features, solve (with reinitialization when
/// `config.reinit`), recover the target basis and extract the point map.
PipelineResult run_pipeline(const RunConfig& config, const TriMesh& source, const TriMesh& target,
                            const LandmarkPairs& landmarks);
PipelineResult run_pipeline(const RunConfig& config);

/// iteration, coefficient_term, eigen_term, harmonic_term, area_residual,
/// total, penalty, proximal, reference, multiplier, reinitialized.
void write_history_csv(const SolveResult& result, const std::filesystem::path& path);
void write_reinit_csv(const SolveResult& result, const std::filesystem::path& path);

/// w.txt, target_basis.txt, source_basis.txt, source_eigenvalues.txt,
/// history.csv, reinit.csv, correspondence.txt, summary.json.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace lbp
