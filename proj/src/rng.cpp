// SPDX-License-Identifier: Apache-2.0
//
// clsca - covariance-learning activity detection and channel estimation
// Copyright (C) 2026 The clsca authors
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

#include "clsca/rng.hpp"

#include <cmath>

namespace clsca
{

arma::cx_mat randn_circular(std::size_t n_rows, std::size_t n_cols, double var,
                            std::mt19937_64 &rng)
{
    std::normal_distribution<double> component(0.0, std::sqrt(0.5 * var));
    arma::cx_mat out(n_rows, n_cols);
    // Column-major fill so the draw order matches memory order.
    for (arma::uword c = 0; c < n_cols; ++c)
        for (arma::uword r = 0; r < n_rows; ++r)
        {
            double re = component(rng);
            double im = component(rng);
            out(r, c) = arma::cx_double(re, im);
        }
    return out;
}

} // namespace clsca
