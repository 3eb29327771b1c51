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

#ifndef CVDISTILL_SRC_QUADRATURE_H
#define CVDISTILL_SRC_QUADRATURE_H

#include <vector>

namespace cvdistill::internal {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Hermite rule for the standard normal weight: sum w_i g(z_i) ~ E[g(Z)].
QuadratureRule gauss_hermite_normal(int n);

}  // namespace cvdistill::internal

#endif
