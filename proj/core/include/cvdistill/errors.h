// Copyright 2026 The cvdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CVDISTILL_ERRORS_H
#define CVDISTILL_ERRORS_H

#include <stdexcept>
#include <string>

namespace cvdistill {

/// A computed state left the physical set (e.g. a non-positive homodyne variance).
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// A quadrature or root-finding routine failed to converge.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No threshold reaches the requested distillation yield.
struct UnreachableYield : std::runtime_error {
    UnreachableYield(const std::string &what, double min_yield, double max_yield)
        : std::runtime_error(what), min_yield(min_yield), max_yield(max_yield) {
    }
    double min_yield;
    double max_yield;
};

}  // namespace cvdistill

#endif
