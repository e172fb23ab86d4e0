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

#include <stdexcept>
#include <string>

namespace lbp
{

/// Failure classes. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
    Input = 2,          ///< bad file, bad argument, invalid mesh
    Numerical = 3,      ///< factorization / eigensolver / subsolver failure
    NotConverged = 4,   ///< iteration budget exhausted
};

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_{code} {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline Error InputError(const std::string& msg) { return {ErrorCode::Input, msg}; }
inline Error NumericalError(const std::string& msg) { return {ErrorCode::Numerical, msg}; }

}  // namespace lbp
