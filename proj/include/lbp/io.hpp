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

#include <Eigen/Core>

namespace lbp
{

/// Dense matrix text file: a header line "rows cols", then one row per line,
/// values separated by spaces, 17 significant digits.
void write_matrix(const Eigen::MatrixXd& A, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// One value per line.
void write_vector(const Eigen::VectorXd& v, const std::filesystem::path& path);
Eigen::VectorXd read_vector(const std::filesystem::path& path);

}  // namespace lbp
