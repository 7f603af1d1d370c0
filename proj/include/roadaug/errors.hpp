// Copyright 2026 The roadaug Authors
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

#ifndef ROADAUG_ERRORS_HPP
#define ROADAUG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roadaug {

/// Bad external input: missing/corrupt files, malformed annotations,
/// invalid configuration. Maps to process exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated an API precondition (shape mismatch, out-of-bounds
/// box, non-scalar objective). Also exit code 2 at the CLI boundary.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Numerical failure: non-finite values, solver breakdown,
/// non-convergence that the caller did not opt into. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace roadaug

#endif  // ROADAUG_ERRORS_HPP
