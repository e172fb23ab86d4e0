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

/*
 * C interface to lbpursuit. All functions return an lbp_status; on failure
 * lbp_last_error() describes the problem (per thread, valid until the next
 * call on that thread). Handles are opaque and released with their *_free
 * function; free functions accept NULL.
 */
#ifndef LBP_LBP_H
#define LBP_LBP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define LBP_API __declspec(dllexport)
#else
#  define LBP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lbp_status {
    LBP_OK = 0,
    LBP_ERR_INTERNAL = 1,
    LBP_ERR_INPUT = 2,          /* usage, parse or validation error */
    LBP_ERR_NUMERICAL = 3,      /* solver infrastructure failure */
    LBP_ERR_NOT_CONVERGED = 4   /* outputs are still produced */
} lbp_status;

typedef struct lbp_mesh lbp_mesh;
typedef struct lbp_config lbp_config;
typedef struct lbp_result lbp_result;

LBP_API const char* lbp_version(void);
LBP_API const char* lbp_last_error(void);

/* Meshes */
LBP_API lbp_status lbp_mesh_load(const char* path, lbp_mesh** out);
LBP_API lbp_status lbp_mesh_icosphere(int subdivisions, double radius, lbp_mesh** out);
/* xyz: n x 3 row-major; tri: m x 3 zero-based. */
LBP_API lbp_status lbp_mesh_from_arrays(const double* xyz, size_t n, const int* tri, size_t m, lbp_mesh** out);
LBP_API void lbp_mesh_free(lbp_mesh* mesh);
LBP_API size_t lbp_mesh_num_vertices(const lbp_mesh* mesh);
LBP_API size_t lbp_mesh_num_triangles(const lbp_mesh* mesh);
LBP_API lbp_status lbp_mesh_area(const lbp_mesh* mesh, double* area);
LBP_API lbp_status lbp_mesh_save(const lbp_mesh* mesh, const char* path);

/* Operators: lumped mass (n values) and cotangent stiffness as `i j value` triplets. */
LBP_API lbp_status lbp_mass(const lbp_mesh* mesh, double* mass, size_t n);
LBP_API lbp_status lbp_write_operators(const lbp_mesh* mesh, const char* mass_path, const char* stiffness_path);

/* k smallest eigenpairs of S f = lambda M f. values: k; vectors: n x k
 * row-major or NULL. */
LBP_API lbp_status lbp_eigs(const lbp_mesh* mesh, int k, uint64_t seed, double* values, double* vectors);
LBP_API lbp_status lbp_write_eigs(const lbp_mesh* mesh, int k, uint64_t seed, const char* values_path,
                                  const char* basis_path);

/* Run configuration (key = value text). */
LBP_API lbp_status lbp_config_default(lbp_config** out);
LBP_API lbp_status lbp_config_load(const char* path, lbp_config** out);
LBP_API lbp_status lbp_config_set(lbp_config* config, const char* key, const char* value);
/* Returned string is released with lbp_string_free. */
LBP_API lbp_status lbp_config_format(const lbp_config* config, char** text);
LBP_API void lbp_config_free(lbp_config* config);
LBP_API void lbp_string_free(char* s);

/* Full registration. Returns LBP_ERR_NOT_CONVERGED with a valid *out when
 * the iteration budget ran out. */
LBP_API lbp_status lbp_solve(const lbp_config* config, lbp_result** out);
LBP_API lbp_status lbp_result_write(const lbp_result* result, const char* dir);
LBP_API int lbp_result_converged(const lbp_result* result);
LBP_API size_t lbp_result_iterations(const lbp_result* result);
LBP_API size_t lbp_result_size(const lbp_result* result);          /* source vertices */
LBP_API const int* lbp_result_map(const lbp_result* result);        /* lbp_result_size entries */
LBP_API size_t lbp_result_target_size(const lbp_result* result);
LBP_API const double* lbp_result_w(const lbp_result* result);       /* lbp_result_target_size entries */
LBP_API void lbp_result_free(lbp_result* result);

/* Point map between two basis files (matrix text format). */
LBP_API lbp_status lbp_map_files(const char* source_basis, const char* target_basis, const char* out_path);

typedef struct lbp_error_summary {
    double exact_fraction;
    double frac_le_005;
    double mean;
    double median;
} lbp_error_summary;

/* Writes curve.csv and summary.json into out_dir; summary may be NULL. */
LBP_API lbp_status lbp_eval_files(const char* target_mesh, const char* map_path, const char* truth_path,
                                  const char* out_dir, lbp_error_summary* summary);

typedef struct lbp_synth_spec {
    int subdivisions;           /* icosphere level when base_mesh is NULL */
    const char* base_mesh;
    double scale;
    double noise;               /* fraction of the bounding-box diagonal */
    int landmarks;
    int farthest_point;         /* nonzero: farthest-point landmark sampling */
    double perturb;             /* fraction of landmarks moved to a first-ring neighbour */
    uint64_t seed;
} lbp_synth_spec;

LBP_API void lbp_synth_spec_default(lbp_synth_spec* spec);
/* Writes source.off, target.off, landmarks.txt, ground_truth.txt. */
LBP_API lbp_status lbp_synth(const lbp_synth_spec* spec, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* LBP_LBP_H */
