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

#include "clsca/covlik.hpp"

#include <cmath>
#include <stdexcept>

namespace clsca
{

ModelCovariance assemble_covariance(const arma::cx_mat &pilots, const arma::vec &gamma,
                                    double noise_var)
{
    if (!(noise_var > 0.0))
        throw std::invalid_argument("Noise variance must be positive.");
    if (gamma.n_elem != pilots.n_cols)
        throw std::invalid_argument("Power vector length must match the pilot count.");
    if (gamma.min() < 0.0)
        throw std::invalid_argument("Power vector must be nonnegative.");

    arma::cx_mat scaled = pilots;
    scaled.each_row() %= arma::conv_to<arma::cx_rowvec>::from(gamma.t());

    ModelCovariance cov;
    cov.sigma = scaled * pilots.t();
    cov.sigma.diag() += noise_var;
    cov.sigma = 0.5 * (cov.sigma + cov.sigma.t()); // kill roundoff asymmetry

    if (!arma::chol(cov.chol_lower, cov.sigma, "lower"))
        throw std::domain_error("Model covariance is not positive definite.");
    return cov;
}

arma::cx_mat chol_solve(const arma::cx_mat &chol_lower, const arma::cx_mat &rhs)
{
    arma::cx_mat half = arma::solve(arma::trimatl(chol_lower), rhs);
    return arma::solve(arma::trimatu(chol_lower.t()), half);
}

double negative_llf(const arma::cx_mat &scm, const ModelCovariance &cov)
{
    if (scm.n_rows != cov.sigma.n_rows)
        throw std::invalid_argument("Sample covariance dimension mismatch.");

    double log_det = 0.0;
    for (arma::uword i = 0; i < cov.chol_lower.n_rows; ++i)
        log_det += 2.0 * std::log(cov.chol_lower(i, i).real());

    // tr(Sigma^{-1} S) = || L^{-1} S^{1/2} ||_F^2 in exact arithmetic; here S
    // may be any Hermitian matrix, so take the trace of the full solve.
    double trace_term = arma::trace(chol_solve(cov.chol_lower, scm)).real();
    return trace_term + log_det;
}

arma::vec llf_gradient(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                       const ModelCovariance &cov)
{
    arma::cx_mat directions = chol_solve(cov.chol_lower, pilots); // columns b_i
    arma::vec fit = arma::real(arma::sum(arma::conj(pilots) % directions, 0)).t();
    arma::vec energy = arma::real(arma::sum(arma::conj(directions) % (scm * directions), 0)).t();
    return fit - energy;
}

arma::cx_vec downdate_direction(const arma::cx_vec &b_i, const arma::cx_vec &pilot_i,
                                double gamma_i)
{
    double quad = arma::cdot(pilot_i, b_i).real();
    double denom = 1.0 - gamma_i * quad;
    if (denom <= 1e-12)
        throw std::domain_error("Rank-one downdate is numerically degenerate.");
    return b_i / denom;
}

} // namespace clsca
