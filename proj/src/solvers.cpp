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

#include "clsca/solvers.hpp"
#include "clsca/covlik.hpp"
#include "clsca/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clsca
{

namespace
{

// Floor for the real parts of a_i^H b_i and b_i^H S b_i; both are positive
// analytically, the floor only guards division by roundoff.
constexpr double quad_floor = 1e-15;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

// re(x_i^H y_i) per column, floored at quad_floor.
arma::vec column_forms(const arma::cx_mat &x, const arma::cx_mat &y)
{
    arma::vec v = arma::real(arma::sum(arma::conj(x) % y, 0)).t();
    return arma::clamp(v, quad_floor, arma::datum::inf);
}

void check_problem(const arma::cx_mat &scm, const arma::cx_mat &pilots)
{
    if (scm.n_rows != scm.n_cols)
        throw std::invalid_argument("Sample covariance must be square.");
    if (scm.n_rows != pilots.n_rows)
        throw std::invalid_argument("Sample covariance and pilot dimensions disagree.");
}

arma::vec initial_gamma(const SolverConfig &config, arma::uword n_devices)
{
    if (config.gamma_init.is_empty())
        return arma::vec(n_devices, arma::fill::zeros);
    if (config.gamma_init.n_elem != n_devices)
        throw std::invalid_argument("gamma_init length must match the device count.");
    if (config.gamma_init.min() < 0.0)
        throw std::invalid_argument("gamma_init must be nonnegative.");
    return config.gamma_init;
}

} // namespace

void SolverConfig::validate() const
{
    if (!(step_decay > 0.0) || !(step_decay < 1.0))
        throw std::invalid_argument("Step decay must lie in (0,1).");
    if (!(step0 > 0.0) || !(step0 < 1.0 / step_decay))
        throw std::invalid_argument("Initial step must lie in (0, 1/decay).");
    if (!(tol > 0.0) || !(em_tol > 0.0))
        throw std::invalid_argument("Convergence threshold must be positive.");
    if (max_iters == 0 || em_max_iters == 0)
        throw std::invalid_argument("Iteration limits must be positive.");
}

Solver solver_from_name(const std::string &name)
{
    if (name == "cl-sca")
        return Solver::ClSca;
    if (name == "cwo")
        return Solver::Cwo;
    if (name == "cl-mp")
        return Solver::ClMp;
    if (name == "msbl-em")
        return Solver::MsblEm;
    throw std::invalid_argument("Unknown solver '" + name +
                                "'; valid names: cl-sca, cwo, cl-mp, msbl-em.");
}

std::string solver_name(Solver solver)
{
    switch (solver)
    {
    case Solver::ClSca:
        return "cl-sca";
    case Solver::Cwo:
        return "cwo";
    case Solver::ClMp:
        return "cl-mp";
    case Solver::MsblEm:
        return "msbl-em";
    }
    return "?";
}

double next_step_size(double eta, double decay)
{
    return eta * (1.0 - decay * eta);
}

double sca_coordinate_minimizer(double gamma_i, const arma::cx_vec &b_i,
                                const arma::cx_vec &pilot_i, const arma::cx_mat &scm)
{
    double fit = std::max(arma::cdot(pilot_i, b_i).real(), quad_floor);
    double energy = std::max(arma::cdot(b_i, scm * b_i).real(), quad_floor);
    return std::max(gamma_i + std::sqrt(energy / (fit * fit * fit)) - 1.0 / fit, 0.0);
}

double cwo_coordinate_update([[maybe_unused]] double gamma_i, const arma::cx_vec &c_i,
                             const arma::cx_vec &pilot_i, const arma::cx_mat &scm)
{
    double fit = std::max(arma::cdot(pilot_i, c_i).real(), quad_floor);
    double energy = std::max(arma::cdot(c_i, scm * c_i).real(), quad_floor);
    return std::max((energy - fit) / (fit * fit), 0.0);
}

SolverResult solve_cl_sca(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                          double noise_var, const SolverConfig &config)
{
    config.validate();
    check_problem(scm, pilots);

    SolverResult result;
    result.gamma_hat = initial_gamma(config, pilots.n_cols);

    const auto start = clock_type::now();
    double eta = config.step0;

    for (std::size_t iter = 0; iter < config.max_iters; ++iter)
    {
        ModelCovariance cov = assemble_covariance(pilots, result.gamma_hat, noise_var);
        if (config.record_objective)
            result.objective_trace.push_back(negative_llf(scm, cov));

        // All coordinate minimizers at once: B = Sigma^{-1} A, then the
        // closed-form update from the two per-column quadratic forms.
        arma::cx_mat directions = chol_solve(cov.chol_lower, pilots);
        arma::vec fit = column_forms(pilots, directions);
        arma::vec energy = column_forms(directions, scm * directions);

        arma::vec target = arma::clamp(
            result.gamma_hat + arma::sqrt(energy / arma::pow(fit, 3)) - 1.0 / fit, 0.0,
            arma::datum::inf);

        arma::vec step_dir = target - result.gamma_hat;
        double dir_norm = arma::norm(step_dir, 2);

        result.gamma_hat += eta * step_dir;
        result.iterations = iter + 1;

        if (dir_norm < config.tol)
        {
            result.converged = true;
            break;
        }
        eta = next_step_size(eta, config.step_decay);
    }

    result.wall_time_s = seconds_since(start);
    if (config.record_objective)
        result.objective_trace.push_back(
            negative_llf(scm, assemble_covariance(pilots, result.gamma_hat, noise_var)));
    return result;
}

SolverResult solve_cwo(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                       double noise_var, const SolverConfig &config)
{
    config.validate();
    check_problem(scm, pilots);

    const arma::uword n_devices = pilots.n_cols;
    SolverResult result;
    result.gamma_hat = initial_gamma(config, n_devices);

    std::vector<arma::uword> order(n_devices);
    std::iota(order.begin(), order.end(), arma::uword(0));
    auto sweep_rng = make_engine(config.sweep_seed);

    const auto start = clock_type::now();

    for (std::size_t sweep = 0; sweep < config.max_iters; ++sweep)
    {
        // Fresh factorization once per sweep bounds the drift of the
        // rank-one-maintained inverse.
        ModelCovariance cov = assemble_covariance(pilots, result.gamma_hat, noise_var);
        if (config.record_objective)
            result.objective_trace.push_back(negative_llf(scm, cov));

        arma::cx_mat half_inv = arma::inv(arma::trimatl(cov.chol_lower));
        arma::cx_mat sigma_inv = half_inv.t() * half_inv;

        if (config.randomized_sweep)
            std::shuffle(order.begin(), order.end(), sweep_rng);

        arma::vec gamma_before = result.gamma_hat;
        for (arma::uword i : order)
        {
            arma::cx_vec pilot_i = pilots.col(i);
            arma::cx_vec b_i = sigma_inv * pilot_i;
            double fit = std::max(arma::cdot(pilot_i, b_i).real(), quad_floor);

            arma::cx_vec c_i = downdate_direction(b_i, pilot_i, result.gamma_hat(i));
            double updated = cwo_coordinate_update(result.gamma_hat(i), c_i, pilot_i, scm);

            double delta = updated - result.gamma_hat(i);
            if (delta != 0.0)
            {
                sigma_inv -= (delta / (1.0 + delta * fit)) * (b_i * b_i.t());
                result.gamma_hat(i) = updated;
            }
        }

        result.iterations = sweep + 1;
        if (arma::norm(result.gamma_hat - gamma_before, 2) < config.tol)
        {
            result.converged = true;
            break;
        }
    }

    result.wall_time_s = seconds_since(start);
    if (config.record_objective)
        result.objective_trace.push_back(
            negative_llf(scm, assemble_covariance(pilots, result.gamma_hat, noise_var)));
    return result;
}

SolverResult solve_cl_mp(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                         double noise_var, std::size_t n_select, const SolverConfig &config)
{
    config.validate();
    check_problem(scm, pilots);
    if (!(noise_var > 0.0))
        throw std::invalid_argument("Noise variance must be positive.");

    const arma::uword n_devices = pilots.n_cols;
    const arma::uword dim = pilots.n_rows;
    if (n_select < 1 || n_select > n_devices)
        throw std::invalid_argument("Selection count must lie in [1, device count].");

    SolverResult result;
    result.gamma_hat = arma::vec(n_devices, arma::fill::zeros);

    const auto start = clock_type::now();

    // State at gamma = 0: Sigma = noise_var * I. The directions
    // b_i = Sigma^{-1} a_i and both quadratic forms are then maintained with
    // rank-one updates, so each greedy step costs O(N L).
    arma::cx_mat directions = pilots / noise_var;
    arma::vec fit = column_forms(pilots, directions);
    arma::vec energy = column_forms(directions, scm * directions);
    std::vector<bool> selected(n_devices, false);

    double objective = arma::trace(scm).real() / noise_var + double(dim) * std::log(noise_var);
    if (config.record_objective)
        result.objective_trace.push_back(objective);

    for (std::size_t step = 0; step < n_select; ++step)
    {
        // Best single-coordinate decrease over all unselected indices;
        // strict > keeps ties on the lowest index.
        arma::uword best = n_devices;
        double best_decrease = -arma::datum::inf;
        double best_value = 0.0;
        for (arma::uword i = 0; i < n_devices; ++i)
        {
            if (selected[i])
                continue;
            double value = std::max((energy(i) - fit(i)) / (fit(i) * fit(i)), 0.0);
            double decrease = 0.0;
            if (value > 0.0)
                decrease = value * energy(i) / (1.0 + value * fit(i)) -
                           std::log1p(value * fit(i));
            if (decrease > best_decrease)
            {
                best_decrease = decrease;
                best = i;
                best_value = value;
            }
        }

        selected[best] = true;
        result.gamma_hat(best) = best_value;
        objective -= best_decrease;
        if (config.record_objective)
            result.objective_trace.push_back(objective);

        if (best_value > 0.0)
        {
            // Sigma <- Sigma + value * a a^H, propagated to every direction.
            arma::cx_vec b_sel = directions.col(best);
            double scale = best_value / (1.0 + best_value * fit(best));
            double energy_sel = energy(best);

            arma::cx_rowvec cross = b_sel.t() * pilots;          // b_sel^H a_i
            arma::cx_rowvec mixed = (scm * b_sel).t() * directions; // b_sel^H S b_i

            arma::vec cross_sq = arma::square(arma::abs(cross)).t();
            energy += -2.0 * scale * arma::real(arma::conj(cross) % mixed).t() +
                      (scale * scale) * cross_sq * energy_sel;
            fit -= scale * cross_sq;
            fit = arma::clamp(fit, quad_floor, arma::datum::inf);
            energy = arma::clamp(energy, quad_floor, arma::datum::inf);
            directions -= scale * (b_sel * cross);
        }
        result.iterations = step + 1;
    }

    result.converged = true;
    result.wall_time_s = seconds_since(start);
    return result;
}

SolverResult solve_msbl_em(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                           double noise_var, const SolverConfig &config)
{
    config.validate();
    check_problem(scm, pilots);

    const arma::uword n_devices = pilots.n_cols;
    const arma::uword dim = pilots.n_rows;

    SolverResult result;
    if (config.gamma_init.is_empty())
    {
        // Zero is an absorbing state of the EM map, so the default start is
        // a uniform positive vector at the average per-device power scale.
        double level = arma::trace(scm).real() / double(n_devices * dim);
        result.gamma_hat = arma::vec(n_devices, arma::fill::value(std::max(level, 0.0)));
    }
    else
    {
        result.gamma_hat = initial_gamma(config, n_devices);
    }

    const auto start = clock_type::now();

    for (std::size_t iter = 0; iter < config.em_max_iters; ++iter)
    {
        ModelCovariance cov = assemble_covariance(pilots, result.gamma_hat, noise_var);
        if (config.record_objective)
            result.objective_trace.push_back(negative_llf(scm, cov));

        arma::cx_mat directions = chol_solve(cov.chol_lower, pilots);
        arma::vec fit = arma::real(arma::sum(arma::conj(pilots) % directions, 0)).t();
        arma::vec energy =
            arma::real(arma::sum(arma::conj(directions) % (scm * directions), 0)).t();

        // Posterior-moment update: new gamma_i = (1/M)||mu_i||^2 + (Sigma_x)_ii
        // = gamma_i + gamma_i^2 (b_i^H S b_i - a_i^H b_i).
        arma::vec updated = result.gamma_hat +
                            arma::square(result.gamma_hat) % (energy - fit);
        updated = arma::clamp(updated, 0.0, arma::datum::inf);

        double change = arma::norm(updated - result.gamma_hat, 2);
        result.gamma_hat = std::move(updated);
        result.iterations = iter + 1;

        if (change < config.em_tol)
        {
            result.converged = true;
            break;
        }
    }

    result.wall_time_s = seconds_since(start);
    if (config.record_objective)
        result.objective_trace.push_back(
            negative_llf(scm, assemble_covariance(pilots, result.gamma_hat, noise_var)));
    return result;
}

SolverResult solve(Solver solver, const arma::cx_mat &scm, const arma::cx_mat &pilots,
                   double noise_var, const SolverConfig &config, std::size_t n_select)
{
    switch (solver)
    {
    case Solver::ClSca:
        return solve_cl_sca(scm, pilots, noise_var, config);
    case Solver::Cwo:
        return solve_cwo(scm, pilots, noise_var, config);
    case Solver::ClMp:
        return solve_cl_mp(scm, pilots, noise_var, n_select, config);
    case Solver::MsblEm:
        return solve_msbl_em(scm, pilots, noise_var, config);
    }
    throw std::invalid_argument("Unhandled solver id.");
}

} // namespace clsca
