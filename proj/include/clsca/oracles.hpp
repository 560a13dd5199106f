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

#ifndef clsca_oracles_H
#define clsca_oracles_H

#include <armadillo>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Independent numerical cross-checks for the solver kernels. Everything here
// deliberately avoids the production code paths: objectives are evaluated
// through an eigendecomposition, inverses are formed explicitly, and
// minimizers come from bracketing searches. Used by the unit/acceptance
// suites and by the `verify` CLI subcommand.
namespace clsca::oracles
{

// Golden-section search on a unimodal function over [lo, hi]; returns the
// abscissa of the minimum located to within tol_x.
double golden_section_min(const std::function<double(double)> &f, double lo, double hi,
                          double tol_x = 1e-9);

// Objective tr(Sigma^{-1} S) + log det Sigma evaluated through eig_sym of the
// termwise-assembled Sigma. Accepts slightly negative gamma entries so it
// can sit inside finite-difference stencils.
double negative_llf_eig(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                        const arma::vec &gamma, double noise_var);

// Central finite differences of negative_llf_eig, step 1e-6 * max(gamma_i, 1).
arma::vec gradient_fd(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                      const arma::vec &gamma, double noise_var);

// Random small instance: QPSK pilots, random PSD sample covariance and a
// nonnegative gamma with a mix of zero and positive entries; noise_var = 1.
struct RandomInstance
{
    arma::cx_mat pilots;
    arma::cx_mat scm;
    arma::vec gamma;
    double noise_var = 1.0;
};

RandomInstance random_instance(std::uint64_t seed, std::size_t pilot_len = 5,
                               std::size_t n_devices = 8);

struct OracleReport
{
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    std::size_t checks = 0;
    std::string detail;
};

// Closed-form surrogate minimizer vs golden-section search on the surrogate
// built from explicit inverses. Tolerance 1e-6 absolute.
OracleReport check_theorem1(std::size_t n_instances);

// Analytic gradient vs central finite differences, max relative error 1e-5.
OracleReport check_gradient(std::size_t n_instances);

// downdate_direction vs the explicitly inverted downdated matrix, relative
// error 1e-9.
OracleReport check_sherman_morrison(std::size_t n_instances);

// EM never increases the objective by more than 1e-9 per iteration.
OracleReport check_em_monotonicity(std::size_t n_instances);

// Coordinate update vs 1-D search on the exact objective (1e-6) plus
// non-increasing full sweeps.
OracleReport check_cwo_coordinate(std::size_t n_instances);

// Runs all checks whose name contains `filter` (all of them when empty).
std::vector<OracleReport> run_all(std::size_t n_instances, const std::string &filter = "");

} // namespace clsca::oracles

#endif
