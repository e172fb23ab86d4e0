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

#include "lbp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lbp/error.hpp"

namespace lbp
{

std::vector<int> sample_landmarks(const TriMesh& mesh, int count, LandmarkSampling sampling, std::mt19937_64& rng)
{
    const auto n = static_cast<int>(mesh.num_vertices());
    if (count < 0 || count > n) {
        throw InputError("landmark count must be in [0, n]");
    }
    if (count == 0) {
        return {};
    }
    if (sampling == LandmarkSampling::Random) {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        // Partial Fisher-Yates with an explicit draw, independent of std::shuffle's implementation.
        for (int i = 0; i < count; ++i) {
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        all.resize(static_cast<std::size_t>(count));
        return all;
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> chosen{pick(rng)};
    Eigen::VectorXd nearest = graph_geodesics(mesh, chosen.front());
    while (static_cast<int>(chosen.size()) < count) {
        Eigen::Index far = 0;
        nearest.maxCoeff(&far);
        chosen.push_back(static_cast<int>(far));
        nearest = nearest.cwiseMin(graph_geodesics(mesh, static_cast<int>(far)));
    }
    return chosen;
}

SynthPair synthesize(const SynthSpec& spec)
{
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
        throw InputError("synth: scale must be positive");
    }
    if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
        throw InputError("synth: noise must be non-negative");
    }
    if (!(spec.perturb >= 0.0 && spec.perturb <= 1.0)) {
        throw InputError("synth: perturbation fraction must be in [0, 1]");
    }
    if (spec.base_mesh.empty() && (spec.subdivisions < 0 || spec.subdivisions > 7)) {
        throw InputError("synth: icosphere subdivisions must be in [0, 7]");
    }

    SynthPair pair{spec.base_mesh.empty() ? icosphere(spec.subdivisions) : load_mesh(spec.base_mesh),
                   TriMesh{}, {}, {}, {}};
    const TriMesh& source = pair.source;
    const auto n = static_cast<int>(source.num_vertices());
    std::mt19937_64 rng(spec.seed);

    Vertices moved = source.vertices();
    if (spec.noise > 0.0) {
        const Vertices normals = source.vertex_normals();
        std::normal_distribution<double> gauss(0.0, spec.noise * source.bbox_diagonal());
        for (int i = 0; i < n; ++i) {
            moved.row(i) += gauss(rng) * normals.row(i);
        }
    }
    moved *= spec.scale;
    pair.target = source.with_vertices(moved);

    pair.truth.method = "identity";
    pair.truth.map.resize(static_cast<std::size_t>(n));
    std::iota(pair.truth.map.begin(), pair.truth.map.end(), 0);

    const std::vector<int> marks = sample_landmarks(source, spec.landmarks, spec.sampling, rng);
    for (int v : marks) {
        pair.landmarks.emplace_back(v, v);
    }

    const auto count = static_cast<int>(std::lround(spec.perturb * static_cast<double>(marks.size())));
    if (count > 0) {
        std::vector<int> order(marks.size());
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < count; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(order.size()) - 1);
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
        }
        order.resize(static_cast<std::size_t>(count));
        std::sort(order.begin(), order.end());

        const auto adjacency = source.vertex_adjacency();
        std::set<int> used(marks.begin(), marks.end());
        for (int pos : order) {
            auto& target_index = pair.landmarks[static_cast<std::size_t>(pos)].second;
            std::vector<int> options;
            for (int nb : adjacency[static_cast<std::size_t>(target_index)]) {
                if (!used.count(nb)) {
                    options.push_back(nb);
                }
            }
            if (options.empty()) {
                throw InputError("synth: no free first-ring neighbour for landmark " + std::to_string(target_index));
            }
            std::sort(options.begin(), options.end());
            std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
            target_index = options[pick(rng)];
            used.insert(target_index);
            pair.perturbed.push_back(pos);
        }
    }
    return pair;
}

void write_synth(const SynthPair& pair, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create '" + dir.string() + "': " + ec.message());
    }
    save_off(pair.source, dir / "source.off");
    save_off(pair.target, dir / "target.off");
    write_landmarks(pair.landmarks, dir / "landmarks.txt");
    write_correspondence(pair.truth, dir / "ground_truth.txt");
}

}  // namespace lbp
