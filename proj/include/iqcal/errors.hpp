// SPDX-License-Identifier: Apache-2.0
//
// iqcal - IQ mixer imbalance simulation and calibration
// Copyright (C) 2026 The iqcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace iqcal {

/// Malformed or inconsistent scenario configuration. `line()` is 1-based, 0 when
/// the problem is not tied to a single line of the input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Observed statistics fall outside the blind estimator's model
/// (negative radicand, non-circular sidebands, all frames rejected).
class ModelViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A secant step was requested with two coincident abscissae.
class DegenerateSecant : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace iqcal
