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

#include "clsca/oracles.hpp"
#include "clsca/covlik.hpp"
#include "clsca/model.hpp"
#include "clsca/rng.hpp"
#include "clsca/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace clsca::oracles
{

namespace
{

// Termwise Sigma = noise_var I + sum_n gamma_n a_n a_n^H. Deliberately not
// the production assembly path; tolerates slightly negative gamma entries.
arma::cx_mat sigma_termwise(const arma::cx_mat &pilots, const arma::vec &gamma,
                            double noise_var)
{
    arma::cx_mat sigma(pilots.n_rows, pilots.n_rows, arma::fill::zeros);
    sigma.diag() += noise_var;
    for (arma::uword n = 0; n < pilots.n_cols; ++n)
        sigma += gamma(n) * (pilots.col(n) * pilots.col(n).t());
    return 0.5 * (sigma + sigma.t());
}

} // namespace

double golden_section_min(const std::function<double(double)> &f, double lo, double hi,
                          double tol_x)
{
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol_x)
    {
        if (f1 < f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double negative_llf_eig(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                        const arma::vec &gamma, double noise_var)
{
    arma::cx_mat sigma = sigma_termwise(pilots, gamma, noise_var);
    arma::vec eigval;
    arma::cx_mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, sigma))
        throw std::runtime_error("Eigendecomposition failed in the objective oracle.");

    arma::vec quad = arma::real(arma::diagvec(eigvec.t() * scm * eigvec));
    return arma::accu(quad / eigval) + arma::accu(arma::log(eigval));
}

arma::vec gradient_fd(const arma::cx_mat &scm, const arma::cx_mat &pilots,
                      const arma::vec &gamma, double noise_var)
{
    arma::vec grad(gamma.n_elem);
    for (arma::uword i = 0; i < gamma.n_elem; ++i)
    {
        double step = 1e-6 * std::max(gamma(i), 1.0);
        arma::vec hi = gamma, lo = gamma;
        hi(i) += step;
        lo(i) -= step;
        grad(i) = (negative_llf_eig(scm, pilots, hi, noise_var) -
                   negative_llf_eig(scm, pilots, lo, noise_var)) /
                  (2.0 * step);
    }
    return grad;
}

RandomInstance random_instance(std::uint64_t seed, std::size_t pilot_len,
                               std::size_t n_devices)
{
    RandomInstance inst;
    inst.noise_var = 1.0;

    auto rng = make_engine(derive_seed(seed, 0xA11CEULL));
    Dims dims{n_devices, pilot_len, 1, 0};
    inst.pilots = generate_pilots(dims, rng);

    arma::cx_mat half = randn_circular(pilot_len, 2 * pilot_len, 1.0, rng);
    inst.scm = half * half.t() / double(2 * pilot_len);
    inst.scm = 0.5 * (inst.scm + inst.scm.t());

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    inst.gamma.set_size(n_devices);
    for (arma::uword i = 0; i < n_devices; ++i)
    {
        // Mix of inactive and active coordinates to exercise the clamps.
        double u = unit(rng);
        inst.gamma(i) = u < 0.3 ? 0.0 : 2.0 * unit(rng);
    }
    return inst;
}

OracleReport check_theorem1(std::size_t n_instances)
{
    OracleReport report{"theorem1", true, 0.0, 0, ""};
    for (std::size_t k = 0; k < n_instances; ++k)
    {
        RandomInstance inst = random_instance(k);
        arma::cx_mat sigma = sigma_termwise(inst.pilots, inst.gamma, inst.noise_var);
        arma::cx_mat sigma_inv = arma::inv(sigma);

        for (arma::uword i = 0; i < inst.pilots.n_cols; ++i)
        {
            arma::cx_vec pilot_i = inst.pilots.col(i);
            arma::cx_vec b_i = sigma_inv * pilot_i;

            // Surrogate built from the explicitly inverted downdate.
            arma::cx_mat downdated =
                sigma - inst.gamma(i) * (pilot_i * pilot_i.t());
            arma::cx_vec c_i = arma::inv(downdated) * pilot_i;
            double mix = arma::cdot(c_i, inst.scm * c_i).real();
            double fit_c = arma::cdot(pilot_i, c_i).real();
            double fit_b = arma::cdot(pilot_i, b_i).real();

            auto surrogate = [&](double t) {
                return -t * mix / (1.0 + t * fit_c) + t * fit_b;
            };
            double searched = golden_section_min(surrogate, 0.0, 1e3);
            double closed = sca_coordinate_minimizer(inst.gamma(i), b_i, pilot_i, inst.scm);

            report.max_error = std::max(report.max_error, std::abs(searched - closed));
            ++report.checks;
        }
    }
    report.pass = report.max_error <= 1e-6;
    return report;
}

OracleReport check_gradient(std::size_t n_instances)
{
    OracleReport report{"gradient", true, 0.0, 0, ""};
    for (std::size_t k = 0; k < n_instances; ++k)
    {
        RandomInstance inst = random_instance(k);
        ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);
        arma::vec analytic = llf_gradient(inst.scm, inst.pilots, cov);
        arma::vec numeric = gradient_fd(inst.scm, inst.pilots, inst.gamma, inst.noise_var);

        double scale = std::max(arma::abs(numeric).max(), 1.0);
        for (arma::uword i = 0; i < analytic.n_elem; ++i)
        {
            double denom = std::max(std::abs(numeric(i)), 1e-6 * scale);
            report.max_error =
                std::max(report.max_error, std::abs(analytic(i) - numeric(i)) / denom);
            ++report.checks;
        }
    }
    report.pass = report.max_error < 1e-5;
    return report;
}

OracleReport check_sherman_morrison(std::size_t n_instances)
{
    OracleReport report{"sherman-morrison", true, 0.0, 0, ""};
    for (std::size_t k = 0; k < n_instances; ++k)
    {
        RandomInstance inst = random_instance(k);
        ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);

        for (arma::uword i = 0; i < inst.pilots.n_cols; ++i)
        {
            arma::cx_vec pilot_i = inst.pilots.col(i);
            arma::cx_vec b_i = chol_solve(cov.chol_lower, arma::cx_mat(pilot_i));
            arma::cx_vec via_formula = downdate_direction(b_i, pilot_i, inst.gamma(i));

            arma::cx_mat downdated = cov.sigma - inst.gamma(i) * (pilot_i * pilot_i.t());
            arma::cx_vec explicit_inv = arma::inv(downdated) * pilot_i;

            double rel = arma::norm(via_formula - explicit_inv, 2) /
                         std::max(arma::norm(explicit_inv, 2), 1e-300);
            report.max_error = std::max(report.max_error, rel);
            ++report.checks;
        }
    }
    report.pass = report.max_error <= 1e-9;
    return report;
}

OracleReport check_em_monotonicity(std::size_t n_instances)
{
    OracleReport report{"em-monotonicity", true, 0.0, 0, ""};
    for (std::size_t k = 0; k < n_instances; ++k)
    {
        RandomInstance inst = random_instance(k);

        SolverConfig config;
        config.em_max_iters = 200;
        config.em_tol = 1e-15; // run (nearly) all iterations
        config.record_objective = true;

        SolverResult res = solve_msbl_em(inst.scm, inst.pilots, inst.noise_var, config);
        for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
        {
            double increase = res.objective_trace[t] - res.objective_trace[t - 1];
            report.max_error = std::max(report.max_error, increase);
            ++report.checks;
        }
    }
    report.pass = report.max_error <= 1e-9;
    return report;
}

OracleReport check_cwo_coordinate(std::size_t n_instances)
{
    OracleReport report{"cwo-coordinate", true, 0.0, 0, ""};
    double max_sweep_increase = 0.0;

    for (std::size_t k = 0; k < n_instances; ++k)
    {
        RandomInstance inst = random_instance(k);
        arma::cx_mat sigma = sigma_termwise(inst.pilots, inst.gamma, inst.noise_var);
        arma::cx_mat sigma_inv = arma::inv(sigma);

        for (arma::uword i = 0; i < inst.pilots.n_cols; ++i)
        {
            arma::cx_vec pilot_i = inst.pilots.col(i);
            arma::cx_mat downdated = sigma - inst.gamma(i) * (pilot_i * pilot_i.t());
            arma::cx_vec c_i = arma::inv(downdated) * pilot_i;

            double updated = cwo_coordinate_update(inst.gamma(i), c_i, pilot_i, inst.scm);

            auto objective_along = [&](double t) {
                arma::vec probe = inst.gamma;
                probe(i) = t;
                return negative_llf_eig(inst.scm, inst.pilots, probe, inst.noise_var);
            };
            double searched = golden_section_min(objective_along, 0.0, 1e3);

            report.max_error = std::max(report.max_error, std::abs(updated - searched));
            ++report.checks;
        }

        // Full sweeps never increase the objective.
        SolverConfig config;
        config.max_iters = 5;
        config.tol = 1e-15;
        config.record_objective = true;
        SolverResult res = solve_cwo(inst.scm, inst.pilots, inst.noise_var, config);
        for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
            max_sweep_increase = std::max(
                max_sweep_increase, res.objective_trace[t] - res.objective_trace[t - 1]);
    }

    report.pass = report.max_error <= 1e-6 && max_sweep_increase <= 1e-9;
    if (max_sweep_increase > 1e-9)
        report.detail = "sweep increase " + std::to_string(max_sweep_increase);
    return report;
}

std::vector<OracleReport> run_all(std::size_t n_instances, const std::string &filter)
{
    std::vector<OracleReport> reports;
    auto wanted = [&](const std::string &name) {
        return filter.empty() || name.find(filter) != std::string::npos;
    };

    if (wanted("theorem1"))
        reports.push_back(check_theorem1(n_instances));
    if (wanted("gradient"))
        reports.push_back(check_gradient(n_instances));
    if (wanted("sherman-morrison"))
        reports.push_back(check_sherman_morrison(n_instances));
    if (wanted("em-monotonicity"))
        reports.push_back(check_em_monotonicity(n_instances));
    if (wanted("cwo-coordinate"))
        reports.push_back(check_cwo_coordinate(n_instances));
    return reports;
}

} // namespace clsca::oracles
