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

#include "lbp/lbp.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "lbp/config.hpp"
#include "lbp/correspondence.hpp"
#include "lbp/error.hpp"
#include "lbp/fem.hpp"
#include "lbp/io.hpp"
#include "lbp/mesh.hpp"
#include "lbp/pipeline.hpp"
#include "lbp/spectrum.hpp"
#include "lbp/synth.hpp"

struct lbp_mesh {
    lbp::TriMesh mesh;
};

struct lbp_config {
    lbp::RunConfig config;
};

struct lbp_result {
    lbp::PipelineResult result;
};

namespace
{

thread_local std::string last_error;

lbp_status fail(lbp_status status, const std::string& message)
{
    last_error = message;
    return status;
}

template <class F>
lbp_status guarded(F&& body)
{
    try {
        last_error.clear();
        return body();
    } catch (const lbp::Error& e) {
        return fail(static_cast<lbp_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(LBP_ERR_NUMERICAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(LBP_ERR_INTERNAL, e.what());
    }
}

lbp_status null_argument(const char* name)
{
    return fail(LBP_ERR_INPUT, std::string("null argument: ") + name);
}

}  // namespace

extern "C" {

const char* lbp_version(void)
{
    return "0.1.0";
}

const char* lbp_last_error(void)
{
    return last_error.c_str();
}

lbp_status lbp_mesh_load(const char* path, lbp_mesh** out)
{
    if (!path || !out) {
        return null_argument("path/out");
    }
    return guarded([&] {
        *out = new lbp_mesh{lbp::load_mesh(path)};
        return LBP_OK;
    });
}

lbp_status lbp_mesh_icosphere(int subdivisions, double radius, lbp_mesh** out)
{
    if (!out) {
        return null_argument("out");
    }
    return guarded([&] {
        if (subdivisions < 0 || subdivisions > 7 || !(radius > 0.0)) {
            throw lbp::InputError("icosphere: subdivisions must be in [0, 7] and radius positive");
        }
        *out = new lbp_mesh{lbp::icosphere(subdivisions, radius)};
        return LBP_OK;
    });
}

lbp_status lbp_mesh_from_arrays(const double* xyz, size_t n, const int* tri, size_t m, lbp_mesh** out)
{
    if (!xyz || !tri || !out) {
        return null_argument("xyz/tri/out");
    }
    return guarded([&] {
        lbp::Vertices V(static_cast<Eigen::Index>(n), 3);
        std::memcpy(V.data(), xyz, n * 3 * sizeof(double));
        lbp::Triangles T(static_cast<Eigen::Index>(m), 3);
        for (size_t i = 0; i < m; ++i) {
            for (int c = 0; c < 3; ++c) {
                T(static_cast<Eigen::Index>(i), c) = tri[3 * i + static_cast<size_t>(c)];
            }
        }
        *out = new lbp_mesh{lbp::TriMesh(std::move(V), std::move(T))};
        return LBP_OK;
    });
}

void lbp_mesh_free(lbp_mesh* mesh)
{
    delete mesh;
}

size_t lbp_mesh_num_vertices(const lbp_mesh* mesh)
{
    return mesh ? mesh->mesh.num_vertices() : 0;
}

size_t lbp_mesh_num_triangles(const lbp_mesh* mesh)
{
    return mesh ? mesh->mesh.num_triangles() : 0;
}

lbp_status lbp_mesh_area(const lbp_mesh* mesh, double* area)
{
    if (!mesh || !area) {
        return null_argument("mesh/area");
    }
    return guarded([&] {
        *area = lbp::total_area(mesh->mesh);
        return LBP_OK;
    });
}

lbp_status lbp_mesh_save(const lbp_mesh* mesh, const char* path)
{
    if (!mesh || !path) {
        return null_argument("mesh/path");
    }
    return guarded([&] {
        const std::filesystem::path p(path);
        if (p.extension() == ".obj" || p.extension() == ".OBJ") {
            lbp::save_obj(mesh->mesh, p);
        } else {
            lbp::save_off(mesh->mesh, p);
        }
        return LBP_OK;
    });
}

lbp_status lbp_mass(const lbp_mesh* mesh, double* mass, size_t n)
{
    if (!mesh || !mass) {
        return null_argument("mesh/mass");
    }
    return guarded([&] {
        if (n != mesh->mesh.num_vertices()) {
            throw lbp::InputError("mass buffer length does not match the vertex count");
        }
        const Eigen::VectorXd M = lbp::mass_matrix(mesh->mesh);
        std::memcpy(mass, M.data(), n * sizeof(double));
        return LBP_OK;
    });
}

lbp_status lbp_write_operators(const lbp_mesh* mesh, const char* mass_path, const char* stiffness_path)
{
    if (!mesh || !mass_path || !stiffness_path) {
        return null_argument("mesh/mass_path/stiffness_path");
    }
    return guarded([&] {
        const lbp::FemOperators ops = lbp::assemble(mesh->mesh);
        lbp::write_mass(ops.mass, mass_path);
        lbp::write_triplets(ops.stiffness, stiffness_path);
        return LBP_OK;
    });
}

lbp_status lbp_eigs(const lbp_mesh* mesh, int k, uint64_t seed, double* values, double* vectors)
{
    if (!mesh || !values) {
        return null_argument("mesh/values");
    }
    return guarded([&] {
        lbp::EigenOptions opts;
        opts.seed = seed;
        const lbp::EigenBasis b = lbp::lb_basis(lbp::assemble(mesh->mesh), k, opts);
        std::memcpy(values, b.values.data(), static_cast<size_t>(k) * sizeof(double));
        if (vectors) {
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                vectors, b.vectors.rows(), b.vectors.cols()) = b.vectors;
        }
        return LBP_OK;
    });
}

lbp_status lbp_write_eigs(const lbp_mesh* mesh, int k, uint64_t seed, const char* values_path, const char* basis_path)
{
    if (!mesh || !values_path || !basis_path) {
        return null_argument("mesh/values_path/basis_path");
    }
    return guarded([&] {
        lbp::EigenOptions opts;
        opts.seed = seed;
        const lbp::EigenBasis b = lbp::lb_basis(lbp::assemble(mesh->mesh), k, opts);
        lbp::write_vector(b.values, values_path);
        lbp::write_matrix(b.vectors, basis_path);
        return LBP_OK;
    });
}

lbp_status lbp_config_default(lbp_config** out)
{
    if (!out) {
        return null_argument("out");
    }
    return guarded([&] {
        *out = new lbp_config{};
        return LBP_OK;
    });
}

lbp_status lbp_config_load(const char* path, lbp_config** out)
{
    if (!path || !out) {
        return null_argument("path/out");
    }
    return guarded([&] {
        *out = new lbp_config{lbp::load_config(path)};
        return LBP_OK;
    });
}

lbp_status lbp_config_set(lbp_config* config, const char* key, const char* value)
{
    if (!config || !key || !value) {
        return null_argument("config/key/value");
    }
    return guarded([&] {
        // Reparse the current settings plus the override so every key goes
        // through the same validation as a file.
        const std::string text = lbp::format_config(config->config) + key + " = " + value + "\n";
        config->config = lbp::parse_config(text);
        return LBP_OK;
    });
}

lbp_status lbp_config_format(const lbp_config* config, char** text)
{
    if (!config || !text) {
        return null_argument("config/text");
    }
    return guarded([&] {
        const std::string s = lbp::format_config(config->config);
        char* buf = static_cast<char*>(std::malloc(s.size() + 1));
        if (!buf) {
            throw std::bad_alloc();
        }
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *text = buf;
        return LBP_OK;
    });
}

void lbp_config_free(lbp_config* config)
{
    delete config;
}

void lbp_string_free(char* s)
{
    std::free(s);
}

lbp_status lbp_solve(const lbp_config* config, lbp_result** out)
{
    if (!config || !out) {
        return null_argument("config/out");
    }
    *out = nullptr;
    return guarded([&] {
        auto* r = new lbp_result{lbp::run_pipeline(config->config)};
        *out = r;
        if (!r->result.solve.converged) {
            last_error = "solver did not converge within max_outer = " + std::to_string(config->config.max_outer);
            return LBP_ERR_NOT_CONVERGED;
        }
        return LBP_OK;
    });
}

lbp_status lbp_result_write(const lbp_result* result, const char* dir)
{
    if (!result || !dir) {
        return null_argument("result/dir");
    }
    return guarded([&] {
        lbp::write_outputs(result->result, dir);
        return LBP_OK;
    });
}

int lbp_result_converged(const lbp_result* result)
{
    return result && result->result.solve.converged ? 1 : 0;
}

size_t lbp_result_iterations(const lbp_result* result)
{
    return result ? result->result.solve.history.size() : 0;
}

size_t lbp_result_size(const lbp_result* result)
{
    return result ? result->result.map.size() : 0;
}

const int* lbp_result_map(const lbp_result* result)
{
    return result ? result->result.map.map.data() : nullptr;
}

size_t lbp_result_target_size(const lbp_result* result)
{
    return result ? static_cast<size_t>(result->result.w.size()) : 0;
}

const double* lbp_result_w(const lbp_result* result)
{
    return result ? result->result.w.data() : nullptr;
}

void lbp_result_free(lbp_result* result)
{
    delete result;
}

lbp_status lbp_map_files(const char* source_basis, const char* target_basis, const char* out_path)
{
    if (!source_basis || !target_basis || !out_path) {
        return null_argument("source_basis/target_basis/out_path");
    }
    return guarded([&] {
        const Eigen::MatrixXd phi = lbp::read_matrix(source_basis);
        const Eigen::MatrixXd psi = lbp::read_matrix(target_basis);
        lbp::write_correspondence(lbp::point_map(phi, psi), out_path);
        return LBP_OK;
    });
}

lbp_status lbp_eval_files(const char* target_mesh, const char* map_path, const char* truth_path, const char* out_dir,
                          lbp_error_summary* summary)
{
    if (!target_mesh || !map_path || !truth_path || !out_dir) {
        return null_argument("target_mesh/map_path/truth_path/out_dir");
    }
    return guarded([&] {
        const lbp::TriMesh target = lbp::load_mesh(target_mesh);
        const lbp::ErrorReport r = lbp::geodesic_errors(target, lbp::read_correspondence(map_path),
                                                        lbp::read_correspondence(truth_path));
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) {
            throw lbp::InputError(std::string("cannot create '") + out_dir + "': " + ec.message());
        }
        lbp::write_error_curve(r, std::filesystem::path(out_dir) / "curve.csv");
        lbp::write_error_summary(r, std::filesystem::path(out_dir) / "summary.json");
        if (summary) {
            *summary = {r.exact_fraction, r.frac_le_005, r.mean, r.median};
        }
        return LBP_OK;
    });
}

void lbp_synth_spec_default(lbp_synth_spec* spec)
{
    if (!spec) {
        return;
    }
    const lbp::SynthSpec d;
    *spec = {d.subdivisions, nullptr, d.scale, d.noise, d.landmarks, 0, d.perturb, d.seed};
}

lbp_status lbp_synth(const lbp_synth_spec* spec, const char* out_dir)
{
    if (!spec || !out_dir) {
        return null_argument("spec/out_dir");
    }
    return guarded([&] {
        lbp::SynthSpec s;
        s.subdivisions = spec->subdivisions;
        if (spec->base_mesh) {
            s.base_mesh = spec->base_mesh;
        }
        s.scale = spec->scale;
        s.noise = spec->noise;
        s.landmarks = spec->landmarks;
        s.sampling = spec->farthest_point ? lbp::LandmarkSampling::FarthestPoint : lbp::LandmarkSampling::Random;
        s.perturb = spec->perturb;
        s.seed = spec->seed;
        lbp::write_synth(lbp::synthesize(s), out_dir);
        return LBP_OK;
    });
}

}  // extern "C"
