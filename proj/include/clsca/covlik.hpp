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

#ifndef clsca_covlik_H
#define clsca_covlik_H

#include <armadillo>

namespace clsca
{

// Model covariance Sigma = pilots * diag(gamma) * pilots^H + noise_var * I
// with its cached lower Cholesky factor. The inverse is never formed; all
// quadratic forms go through triangular solves on the factor.
struct ModelCovariance
{
    arma::cx_mat sigma;      // Hermitian positive definite
    arma::cx_mat chol_lower; // sigma = chol_lower * chol_lower^H
};

// Builds Sigma and factors it. Throws std::invalid_argument on noise_var <= 0
// or negative gamma entries, std::domain_error if the factorization fails.
ModelCovariance assemble_covariance(const arma::cx_mat &pilots, const arma::vec &gamma,
                                    double noise_var);

// Sigma^{-1} * rhs via two triangular solves on the cached factor.
arma::cx_mat chol_solve(const arma::cx_mat &chol_lower, const arma::cx_mat &rhs);

// Covariance-fit objective tr(Sigma^{-1} S) + log det Sigma. The
// log-determinant comes from the factor diagonal.
double negative_llf(const arma::cx_mat &scm, const ModelCovariance &cov);

// Gradient of negative_llf in gamma: entry i is
// a_i^H Sigma^{-1} a_i - a_i^H Sigma^{-1} S Sigma^{-1} a_i.
arma::vec llf_gradient(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                       const ModelCovariance &cov);

// Rank-one downdate direction: given b_i = Sigma^{-1} a_i, returns
// c_i = (Sigma - gamma_i a_i a_i^H)^{-1} a_i = b_i / (1 - gamma_i a_i^H b_i).
// Throws std::domain_error when the denominator falls below 1e-12, which
// cannot happen while the downdated matrix is positive definite.
arma::cx_vec downdate_direction(const arma::cx_vec &b_i, const arma::cx_vec &pilot_i,
                                double gamma_i);

} // namespace clsca

#endif
