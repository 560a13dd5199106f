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
#include "clsca/model.hpp"
#include "clsca/oracles.hpp"
#include "clsca/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace clsca;

TEST_CASE("zero powers give a scaled identity covariance")
{
    auto rng = make_engine(1);
    arma::cx_mat pilots = generate_pilots(Dims{6, 4, 1, 0}, rng);
    arma::vec gamma(6, arma::fill::zeros);

    ModelCovariance cov = assemble_covariance(pilots, gamma, 2.5);
    arma::cx_mat expected(4, 4, arma::fill::zeros);
    expected.diag() += 2.5;
    REQUIRE(arma::norm(cov.sigma - expected, "fro") == 0.0);
}

TEST_CASE("single rank-one term matches the entrywise formula")
{
    arma::cx_mat pilots(2, 1);
    pilots(0, 0) = arma::cx_double(1.0, 0.0);
    pilots(1, 0) = arma::cx_double(1.0, 0.0);
    arma::vec gamma{2.0};

    ModelCovariance cov = assemble_covariance(pilots, gamma, 1.0);
    arma::cx_mat expected = 2.0 * (pilots.col(0) * pilots.col(0).t());
    expected.diag() += 1.0;
    REQUIRE(arma::norm(cov.sigma - expected, "fro") <= 1e-14);
}

TEST_CASE("assembly matches the termwise oracle")
{
    auto rng = make_engine(9);
    arma::cx_mat pilots = generate_pilots(Dims{7, 4, 1, 0}, rng);
    arma::vec gamma{0.3, 0.0, 1.2, 0.7, 0.0, 2.1, 0.4};

    ModelCovariance cov = assemble_covariance(pilots, gamma, 0.8);

    arma::cx_mat brute(4, 4, arma::fill::zeros);
    for (arma::uword n = 0; n < 7; ++n)
        brute += gamma(n) * (pilots.col(n) * pilots.col(n).t());
    brute.diag() += 0.8;

    REQUIRE(arma::norm(cov.sigma - brute, "fro") <= 1e-13 * arma::norm(brute, "fro"));
}

TEST_CASE("assembled covariance is Hermitian with a faithful factor")
{
    oracles::RandomInstance inst = oracles::random_instance(3, 6, 10);
    ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, 1.0);

    REQUIRE(arma::norm(cov.sigma - cov.sigma.t(), "fro") == 0.0);
    arma::cx_mat rebuilt = cov.chol_lower * cov.chol_lower.t();
    REQUIRE(arma::norm(rebuilt - cov.sigma, "fro") <= 1e-10 * arma::norm(cov.sigma, "fro"));
}

TEST_CASE("assembly validates its inputs")
{
    auto rng = make_engine(2);
    arma::cx_mat pilots = generate_pilots(Dims{3, 2, 1, 0}, rng);
    arma::vec gamma(3, arma::fill::zeros);

    REQUIRE_THROWS_AS(assemble_covariance(pilots, gamma, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(assemble_covariance(pilots, arma::vec{1.0, -0.1, 0.0}, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(assemble_covariance(pilots, arma::vec{1.0, 1.0}, 1.0),
                      std::invalid_argument);
}

TEST_CASE("objective at the identity is the dimension")
{
    auto rng = make_engine(4);
    arma::cx_mat pilots = generate_pilots(Dims{5, 2, 1, 0}, rng);
    ModelCovariance cov = assemble_covariance(pilots, arma::vec(5, arma::fill::zeros), 1.0);
    arma::cx_mat scm = arma::eye<arma::cx_mat>(2, 2);
    REQUIRE(negative_llf(scm, cov) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("objective with a zero sample covariance is the log-determinant")
{
    auto rng = make_engine(4);
    arma::cx_mat pilots = generate_pilots(Dims{5, 3, 1, 0}, rng);
    ModelCovariance cov = assemble_covariance(pilots, arma::vec(5, arma::fill::zeros), 2.0);
    arma::cx_mat scm(3, 3, arma::fill::zeros);
    REQUIRE(negative_llf(scm, cov) == Catch::Approx(3.0 * std::log(2.0)).margin(1e-12));
}

TEST_CASE("objective matches the eigendecomposition oracle")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        oracles::RandomInstance inst = oracles::random_instance(seed);
        ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);
        double via_chol = negative_llf(inst.scm, cov);
        double via_eig =
            oracles::negative_llf_eig(inst.scm, inst.pilots, inst.gamma, inst.noise_var);
        REQUIRE(via_chol == Catch::Approx(via_eig).epsilon(1e-10));
    }
}

TEST_CASE("gradient vanishes when the sample covariance equals the model")
{
    oracles::RandomInstance inst = oracles::random_instance(8);
    ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);
    arma::vec grad = llf_gradient(cov.sigma, inst.pilots, cov);
    REQUIRE(arma::abs(grad).max() <= 1e-10);
}

TEST_CASE("gradient closed form at zero powers and zero sample covariance")
{
    auto rng = make_engine(12);
    arma::cx_mat pilots = generate_pilots(Dims{8, 5, 1, 0}, rng);
    ModelCovariance cov = assemble_covariance(pilots, arma::vec(8, arma::fill::zeros), 1.0);
    arma::cx_mat scm(5, 5, arma::fill::zeros);

    arma::vec grad = llf_gradient(scm, pilots, cov);
    for (arma::uword i = 0; i < grad.n_elem; ++i)
        REQUIRE(grad(i) == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("gradient matches central finite differences")
{
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        oracles::RandomInstance inst = oracles::random_instance(seed);
        ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);
        arma::vec analytic = llf_gradient(inst.scm, inst.pilots, cov);
        arma::vec numeric =
            oracles::gradient_fd(inst.scm, inst.pilots, inst.gamma, inst.noise_var);

        double scale = std::max(arma::abs(numeric).max(), 1.0);
        for (arma::uword i = 0; i < analytic.n_elem; ++i)
        {
            double rel = std::abs(analytic(i) - numeric(i)) /
                         std::max(std::abs(numeric(i)), 1e-6 * scale);
            worst = std::max(worst, rel);
        }
    }
    REQUIRE(worst < 1e-5);
}

TEST_CASE("downdating with zero power returns the direction unchanged")
{
    oracles::RandomInstance inst = oracles::random_instance(2);
    ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, 1.0);
    arma::cx_vec pilot = inst.pilots.col(0);
    arma::cx_vec b = chol_solve(cov.chol_lower, arma::cx_mat(pilot));
    arma::cx_vec c = downdate_direction(b, pilot, 0.0);
    REQUIRE(arma::norm(c - b, 2) == 0.0);
}

TEST_CASE("downdating in the scalar case recovers the noise-only direction")
{
    arma::cx_mat pilot(1, 1);
    pilot(0, 0) = arma::cx_double(0.6, -0.8);
    double gamma_val = 1.7, noise_var = 0.3;

    ModelCovariance cov = assemble_covariance(pilot, arma::vec{gamma_val}, noise_var);
    arma::cx_vec b = chol_solve(cov.chol_lower, arma::cx_mat(pilot.col(0)));
    arma::cx_vec c = downdate_direction(b, pilot.col(0), gamma_val);

    arma::cx_double expected = pilot(0, 0) / noise_var;
    REQUIRE(std::abs(c(0) - expected) <= 1e-12 * std::abs(expected));
}

TEST_CASE("downdate matches the explicit inverse")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        oracles::RandomInstance inst = oracles::random_instance(seed);
        ModelCovariance cov = assemble_covariance(inst.pilots, inst.gamma, inst.noise_var);
        for (arma::uword i = 0; i < inst.pilots.n_cols; ++i)
        {
            arma::cx_vec pilot = inst.pilots.col(i);
            arma::cx_vec b = chol_solve(cov.chol_lower, arma::cx_mat(pilot));
            arma::cx_vec c = downdate_direction(b, pilot, inst.gamma(i));

            arma::cx_mat downdated = cov.sigma - inst.gamma(i) * (pilot * pilot.t());
            arma::cx_vec explicit_dir = arma::inv(downdated) * pilot;
            REQUIRE(arma::norm(c - explicit_dir, 2) <= 1e-9 * arma::norm(explicit_dir, 2));
        }
    }
}

TEST_CASE("objective is locally minimal near the generating powers")
{
    // Large-snapshot sample covariance concentrates, so the gradient norm at
    // the generating powers falls below the norm at twice those powers.
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        Dims dims{12, 8, 100000, 2};
        Scenario sc = generate_scenario(dims, 1.0, seed);
        arma::cx_mat scm = sample_covariance(sc.received);

        ModelCovariance at_truth =
            assemble_covariance(sc.pilots, sc.powers.gamma_true, 1.0);
        ModelCovariance at_double =
            assemble_covariance(sc.pilots, 2.0 * sc.powers.gamma_true, 1.0);

        double norm_truth = arma::norm(llf_gradient(scm, sc.pilots, at_truth), 2);
        double norm_double = arma::norm(llf_gradient(scm, sc.pilots, at_double), 2);
        REQUIRE(norm_truth < norm_double);
    }
}
