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

#include "clsca/jadce.hpp"
#include "clsca/covlik.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace clsca
{

namespace
{

constexpr char matrix_magic[8] = {'C', 'L', 'S', 'C', 'A', 'X', 'M', 'T'};

std::size_t resolve_mp_steps(const DetectionRule &rule)
{
    if (rule.kind != DetectionRule::Kind::TopK)
        throw std::invalid_argument(
            "The greedy solver needs a top-K detection rule to fix its step count.");
    return rule.top_k;
}

} // namespace

DetectionRule DetectionRule::top(std::size_t k)
{
    DetectionRule rule;
    rule.kind = Kind::TopK;
    rule.top_k = k;
    return rule;
}

DetectionRule DetectionRule::thresholded(double gamma_th)
{
    if (gamma_th < 0.0)
        throw std::invalid_argument("Detection threshold must be nonnegative.");
    DetectionRule rule;
    rule.kind = Kind::Threshold;
    rule.threshold = gamma_th;
    return rule;
}

arma::uvec detect(const arma::vec &gamma_hat, const DetectionRule &rule)
{
    const arma::uword n = gamma_hat.n_elem;
    arma::uvec alpha(n, arma::fill::zeros);

    if (rule.kind == DetectionRule::Kind::Threshold)
    {
        if (rule.threshold < 0.0)
            throw std::invalid_argument("Detection threshold must be nonnegative.");
        for (arma::uword i = 0; i < n; ++i)
            alpha(i) = gamma_hat(i) >= rule.threshold ? 1 : 0;
        return alpha;
    }

    if (rule.top_k > n)
        throw std::invalid_argument("top_k cannot exceed the device count.");

    // Stable sort on descending value keeps equal entries in index order, so
    // ties break toward the lowest index.
    std::vector<arma::uword> order(n);
    std::iota(order.begin(), order.end(), arma::uword(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](arma::uword a, arma::uword b) { return gamma_hat(a) > gamma_hat(b); });
    for (std::size_t j = 0; j < rule.top_k; ++j)
        alpha(order[j]) = 1;
    return alpha;
}

arma::uvec support_from_alpha(const arma::uvec &alpha)
{
    return arma::find(alpha == 1);
}

arma::cx_mat estimate_channels(const arma::vec &gamma_pruned, const arma::cx_mat &pilots,
                               const arma::cx_mat &received, double noise_var)
{
    ModelCovariance cov = assemble_covariance(pilots, gamma_pruned, noise_var);
    arma::cx_mat whitened = chol_solve(cov.chol_lower, received); // Sigma^{-1} Y
    arma::cx_mat x_hat = pilots.t() * whitened;                   // A^H Sigma^{-1} Y
    for (arma::uword n = 0; n < x_hat.n_rows; ++n)
        x_hat.row(n) *= gamma_pruned(n);
    return x_hat;
}

arma::cx_mat posterior_covariance(const arma::vec &gamma_pruned, const arma::cx_mat &pilots,
                                  double noise_var)
{
    ModelCovariance cov = assemble_covariance(pilots, gamma_pruned, noise_var);
    arma::cx_mat directions = chol_solve(cov.chol_lower, pilots);
    arma::cx_mat gram = pilots.t() * directions; // A^H Sigma^{-1} A

    arma::cx_vec gamma_cx = arma::conv_to<arma::cx_vec>::from(gamma_pruned);
    arma::cx_mat sigma_x = -(gamma_cx * gamma_cx.st()) % gram;
    sigma_x.diag() += gamma_cx;
    return 0.5 * (sigma_x + sigma_x.t());
}

JadceRun run_jadce(const arma::cx_mat &scm, const arma::cx_mat &received,
                   const arma::cx_mat &pilots, double noise_var, Solver solver,
                   const DetectionRule &rule, const SolverConfig &config,
                   bool want_posterior_cov)
{
    std::size_t mp_steps = solver == Solver::ClMp ? resolve_mp_steps(rule) : 0;

    JadceRun run;
    run.solver = solve(solver, scm, pilots, noise_var, config, mp_steps);

    run.output.alpha_hat = detect(run.solver.gamma_hat, rule);
    run.output.support_hat = support_from_alpha(run.output.alpha_hat);
    run.output.gamma_pruned =
        run.solver.gamma_hat % arma::conv_to<arma::vec>::from(run.output.alpha_hat);
    run.output.x_hat =
        estimate_channels(run.output.gamma_pruned, pilots, received, noise_var);
    if (want_posterior_cov)
        run.output.sigma_x = posterior_covariance(run.output.gamma_pruned, pilots, noise_var);
    return run;
}

JadceRun run_jadce(const Scenario &scenario, Solver solver, const DetectionRule &rule,
                   const SolverConfig &config, bool want_posterior_cov)
{
    return run_jadce(sample_covariance(scenario.received), scenario.received,
                     scenario.pilots, scenario.noise_var, solver, rule, config,
                     want_posterior_cov);
}

double prob_missed_detection(const arma::uvec &true_support, const arma::uvec &est_support)
{
    if (true_support.is_empty())
        throw std::invalid_argument("Missed-detection rate is undefined for an empty support.");
    std::vector<arma::uword> missed;
    std::set_difference(true_support.begin(), true_support.end(), est_support.begin(),
                        est_support.end(), std::back_inserter(missed));
    return double(missed.size()) / double(true_support.n_elem);
}

std::size_t false_alarm_count(const arma::uvec &true_support, const arma::uvec &est_support)
{
    std::vector<arma::uword> spurious;
    std::set_difference(est_support.begin(), est_support.end(), true_support.begin(),
                        true_support.end(), std::back_inserter(spurious));
    return spurious.size();
}

double nmse(const arma::cx_mat &x_hat, const arma::cx_mat &x_true)
{
    double ref = arma::accu(arma::square(arma::abs(x_true)));
    if (ref == 0.0)
        throw std::invalid_argument("NMSE is undefined for an all-zero reference.");
    return arma::accu(arma::square(arma::abs(x_hat - x_true))) / ref;
}

void save_output_json(const JadceOutput &output, const std::string &path)
{
    nlohmann::json j;
    j["support"] = std::vector<std::uint64_t>(output.support_hat.begin(),
                                              output.support_hat.end());
    j["gamma_pruned"] = std::vector<double>(output.gamma_pruned.begin(),
                                            output.gamma_pruned.end());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("Cannot write output to " + path);
    out << j.dump(2) << "\n";
}

void save_channel_matrix(const arma::cx_mat &x, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("Cannot write matrix to " + path);

    std::uint32_t rows = std::uint32_t(x.n_rows);
    std::uint32_t cols = std::uint32_t(x.n_cols);
    out.write(matrix_magic, sizeof(matrix_magic));
    out.write(reinterpret_cast<const char *>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char *>(&cols), sizeof(cols));

    // Row-major (re, im) float64 pairs, little-endian.
    for (arma::uword r = 0; r < x.n_rows; ++r)
        for (arma::uword c = 0; c < x.n_cols; ++c)
        {
            double pair[2] = {x(r, c).real(), x(r, c).imag()};
            out.write(reinterpret_cast<const char *>(pair), sizeof(pair));
        }
    if (!out)
        throw std::runtime_error("Write failed for " + path);
}

arma::cx_mat load_channel_matrix(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("Cannot read matrix from " + path);

    char magic[8];
    std::uint32_t rows = 0, cols = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char *>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char *>(&cols), sizeof(cols));
    if (!in || std::memcmp(magic, matrix_magic, sizeof(magic)) != 0)
        throw std::runtime_error("Bad matrix header in " + path);

    arma::cx_mat x(rows, cols);
    for (arma::uword r = 0; r < rows; ++r)
        for (arma::uword c = 0; c < cols; ++c)
        {
            double pair[2];
            in.read(reinterpret_cast<char *>(pair), sizeof(pair));
            x(r, c) = arma::cx_double(pair[0], pair[1]);
        }
    if (!in)
        throw std::runtime_error("Truncated matrix file " + path);
    return x;
}

} // namespace clsca
