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

#include "lbp/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lbp/error.hpp"

namespace lbp
{

void write_matrix(const Eigen::MatrixXd& A, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << A.rows() << ' ' << A.cols() << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out << (j ? " " : "") << A(i, j);
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    long rows = -1, cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
        throw InputError("'" + path.string() + "': bad matrix header");
    }
    Eigen::MatrixXd A(rows, cols);
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) {
            if (!(in >> A(i, j))) {
                throw InputError("'" + path.string() + "': truncated matrix data at row " + std::to_string(i));
            }
        }
    }
    std::string extra;
    if (in >> extra) {
        throw InputError("'" + path.string() + "': trailing data after matrix");
    }
    return A;
}

void write_vector(const Eigen::VectorXd& v, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << v(i) << '\n';
    }
}

Eigen::VectorXd read_vector(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw InputError("'" + path.string() + "': not a number: " + token);
        }
        values.push_back(x);
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace lbp
