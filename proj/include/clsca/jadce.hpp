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

#ifndef clsca_jadce_H
#define clsca_jadce_H

#include "clsca/model.hpp"
#include "clsca/solvers.hpp"

#include <armadillo>
#include <optional>
#include <string>

namespace clsca
{

// Activity decision applied to the estimated power vector.
struct DetectionRule
{
    enum class Kind
    {
        TopK,     // the n largest entries are declared active
        Threshold // entries >= threshold are declared active
    };

    Kind kind = Kind::TopK;
    std::size_t top_k = 0;
    double threshold = 0.0; // no default threshold is provided on purpose

    static DetectionRule top(std::size_t k);
    static DetectionRule thresholded(double gamma_th);
};

// Binary activity vector. TopK returns exactly top_k ones with ties broken
// toward the lowest index; Threshold marks entries >= threshold. Throws
// std::invalid_argument when top_k exceeds the vector length.
arma::uvec detect(const arma::vec &gamma_hat, const DetectionRule &rule);

arma::uvec support_from_alpha(const arma::uvec &alpha);

// Empirical Bayes channel estimate X = Gamma A^H Sigma^{-1} Y with
// Sigma built from the pruned powers. Rows with zero power are exactly zero.
arma::cx_mat estimate_channels(const arma::vec &gamma_pruned, const arma::cx_mat &pilots,
                               const arma::cx_mat &received, double noise_var);

// Posterior covariance Gamma - Gamma A^H Sigma^{-1} A Gamma (n_devices x
// n_devices, dense); computed on demand only.
arma::cx_mat posterior_covariance(const arma::vec &gamma_pruned, const arma::cx_mat &pilots,
                                  double noise_var);

struct JadceOutput
{
    arma::uvec alpha_hat;
    arma::uvec support_hat;
    arma::vec gamma_pruned; // solver estimate masked by alpha_hat
    arma::cx_mat x_hat;
    std::optional<arma::cx_mat> sigma_x; // filled only when requested
};

struct JadceRun
{
    SolverResult solver;
    JadceOutput output;
};

// Full pipeline: solve for the power vector, detect activity, prune the
// powers with the hard activity mask, then estimate the effective channels.
JadceRun run_jadce(const arma::cx_mat &scm, const arma::cx_mat &received,
                   const arma::cx_mat &pilots, double noise_var, Solver solver,
                   const DetectionRule &rule, const SolverConfig &config = {},
                   bool want_posterior_cov = false);

JadceRun run_jadce(const Scenario &scenario, Solver solver, const DetectionRule &rule,
                   const SolverConfig &config = {}, bool want_posterior_cov = false);

// Single-trial fraction of truly active devices that were missed. Throws
// std::invalid_argument on an empty true support.
double prob_missed_detection(const arma::uvec &true_support, const arma::uvec &est_support);

// Detections outside the true support. Raw count; no normalization is
// defined for it under the top-K rule.
std::size_t false_alarm_count(const arma::uvec &true_support, const arma::uvec &est_support);

// ||x_hat - x_true||_F^2 / ||x_true||_F^2. Throws std::invalid_argument when
// x_true is identically zero.
double nmse(const arma::cx_mat &x_hat, const arma::cx_mat &x_true);

// JSON snapshot of the detection outcome (support and pruned powers).
void save_output_json(const JadceOutput &output, const std::string &path);

// Binary matrix dump: 16-byte header (8-byte magic "CLSCAXMT", uint32 rows,
// uint32 cols, little-endian), then row-major (re, im) float64 pairs.
void save_channel_matrix(const arma::cx_mat &x, const std::string &path);
arma::cx_mat load_channel_matrix(const std::string &path);

} // namespace clsca

#endif
