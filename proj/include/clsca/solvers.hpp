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

#ifndef clsca_solvers_H
#define clsca_solvers_H

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

namespace clsca
{

enum class Solver
{
    ClSca,  // parallel surrogate minimization with diminishing smoothing
    Cwo,    // cyclic exact coordinate minimization
    ClMp,   // greedy support growth, one coordinate per step
    MsblEm  // classic EM iteration on the Type-II likelihood
};

// Accepts "cl-sca", "cwo", "cl-mp", "msbl-em"; throws std::invalid_argument
// listing the valid names otherwise.
Solver solver_from_name(const std::string &name);
std::string solver_name(Solver solver);

struct SolverConfig
{
    double step0 = 0.99;      // initial smoothing step, must be < 1/step_decay
    double step_decay = 0.05; // in (0,1)
    std::size_t max_iters = 50;
    double tol = 1e-3;             // update-norm convergence threshold
    arma::vec gamma_init;          // empty = per-solver default
    std::size_t em_max_iters = 500; // EM needs several hundred iterations
    // EM moves in far smaller steps than the surrogate solvers, so its
    // step-norm threshold is separate; 1e-3 would stop it long before the
    // power estimates settle.
    double em_tol = 1e-5;
    bool randomized_sweep = false; // coordinate sweep order (CWO)
    std::uint64_t sweep_seed = 0;
    bool record_objective = true; // per-iteration objective values

    void validate() const; // throws std::invalid_argument
};

struct SolverResult
{
    arma::vec gamma_hat;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace; // empty when recording is off
    double wall_time_s = 0.0;            // solve time, SCM construction excluded
};

// Diminishing step recursion eta <- eta * (1 - decay * eta).
double next_step_size(double eta, double decay);

// Closed-form minimizer of the per-coordinate convex surrogate:
// [ gamma_i + sqrt(b_i^H S b_i / (a_i^H b_i)^3) - 1/(a_i^H b_i) ]_+
// with b_i = Sigma^{-1} a_i. Quadratic forms are taken as their real parts
// and clamped at 1e-15.
double sca_coordinate_minimizer(double gamma_i, const arma::cx_vec &b_i,
                                const arma::cx_vec &pilot_i, const arma::cx_mat &scm);

// Exact minimizer of the objective along coordinate i:
// [ (c_i^H S c_i - a_i^H c_i) / (a_i^H c_i)^2 ]_+
// with c_i = Sigma_{\i}^{-1} a_i the direction with coordinate i removed.
// Returns the new value of gamma_i.
double cwo_coordinate_update(double gamma_i, const arma::cx_vec &c_i,
                             const arma::cx_vec &pilot_i, const arma::cx_mat &scm);

// All solvers minimize tr(Sigma^{-1} S) + log det Sigma over gamma >= 0 for
// Sigma = pilots * diag(gamma) * pilots^H + noise_var * I.

SolverResult solve_cl_sca(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                          double noise_var, const SolverConfig &config = {});

SolverResult solve_cwo(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                       double noise_var, const SolverConfig &config = {});

// Greedy selection of exactly n_select coordinates; an index can be picked
// only once. Ties in the decrease argmax go to the lowest index.
SolverResult solve_cl_mp(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                         double noise_var, std::size_t n_select,
                         const SolverConfig &config = {});

SolverResult solve_msbl_em(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                           double noise_var, const SolverConfig &config = {});

// Dispatch by solver id; n_select is only used by ClMp.
SolverResult solve(Solver solver, const arma::cx_mat &scm, const arma::cx_mat &pilots,
                   double noise_var, const SolverConfig &config, std::size_t n_select);

} // namespace clsca

#endif
