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

#include <functional>

#include <Eigen/Core>

namespace lbp::lbfgs
{

/// Returns f(x) and writes the gradient. May return +inf to mark x as
/// inadmissible (the line search then shortens the step).
using Function = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct Options {
    int memory = 10;
    int max_iterations = 50;
    /// Stop when ||g|| <= gradient_tolerance * max(1, ||g0||).
    double gradient_tolerance = 1e-8;
    /// Stop when the relative decrease of f over one iteration falls below this.
    double value_tolerance = 1e-14;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search = 40;
};

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Limited-memory BFGS with a strong-Wolfe line search. Every accepted step
/// satisfies the Armijo condition, so value <= f(x0).
Result minimize(const Function& fn, const Eigen::VectorXd& x0, const Options& opts = {});

}  // namespace lbp::lbfgs
