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
#include <random>
#include <vector>

#include "lbp/correspondence.hpp"
#include "lbp/features.hpp"
#include "lbp/mesh.hpp"

namespace lbp
{

enum class LandmarkSampling { Random, FarthestPoint };

struct SynthSpec {
    int subdivisions = 3;                 ///< icosphere base when `base_mesh` is empty
    std::filesystem::path base_mesh;
    double scale = 1.0;                   ///< c
    double noise = 0.0;                   ///< normal displacement sigma, fraction of the bbox diagonal
    int landmarks = 20;
    LandmarkSampling sampling = LandmarkSampling::Random;
    double perturb = 0.0;                 ///< fraction of landmarks moved to a first-ring neighbour
    std::uint64_t seed = 1;
};

/// Source and target share connectivity; the ground truth is the identity.
struct SynthPair {
    TriMesh source;
    TriMesh target;
    LandmarkPairs landmarks;
    Correspondence truth;
    std::vector<int> perturbed;           ///< positions in `landmarks` whose target was moved
};

SynthPair synthesize(const SynthSpec& spec);

/// Writes source.off, target.off, landmarks.txt and ground_truth.txt.
void write_synth(const SynthPair& pair, const std::filesystem::path& dir);

/// `count` distinct vertices, uniformly at random or by farthest-point
/// sampling over edge-graph distances (seeded start).
std::vector<int> sample_landmarks(const TriMesh& mesh, int count, LandmarkSampling sampling, std::mt19937_64& rng);

}  // namespace lbp
