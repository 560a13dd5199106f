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

#include "clsca/model.hpp"
#include "clsca/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

using namespace clsca;

TEST_CASE("pilot entries have unit modulus")
{
    auto rng = make_engine(1);
    arma::cx_mat pilots = generate_pilots(Dims{1, 1, 1, 0}, rng);
    REQUIRE(pilots.n_rows == 1);
    REQUIRE(pilots.n_cols == 1);
    REQUIRE(std::abs(pilots(0, 0)) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(arma::norm(pilots.col(0), 2) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("pilot column norms equal the pilot length")
{
    auto rng = make_engine(7);
    arma::cx_mat pilots = generate_pilots(Dims{300, 20, 1, 0}, rng);
    for (arma::uword n = 0; n < pilots.n_cols; ++n)
    {
        double norm_sq = arma::accu(arma::square(arma::abs(pilots.col(n))));
        REQUIRE(norm_sq == Catch::Approx(20.0).margin(1e-12));
    }
}

TEST_CASE("pilot generation is deterministic given a seed")
{
    auto rng_a = make_engine(42);
    auto rng_b = make_engine(42);
    arma::cx_mat a = generate_pilots(Dims{5, 3, 1, 0}, rng_a);
    arma::cx_mat b = generate_pilots(Dims{5, 3, 1, 0}, rng_b);
    REQUIRE(arma::approx_equal(a, b, "absdiff", 0.0));
}

TEST_CASE("scenario with no active devices is pure noise")
{
    Scenario sc = generate_scenario(Dims{10, 4, 3, 0}, 1.0, 99);
    REQUIRE(arma::norm(sc.effective_channels, "fro") == 0.0);
    REQUIRE(arma::approx_equal(sc.received, sc.noise, "absdiff", 0.0));
}

TEST_CASE("nearly noiseless single device gives a rank-one receive matrix")
{
    Scenario sc = generate_scenario(Dims{6, 5, 4, 1}, 1e-30, 3);
    arma::uword n = sc.activity.support(0);
    arma::cx_mat rank_one = std::sqrt(sc.powers.gamma_true(n)) *
                            (sc.pilots.col(n) * sc.channels.row(n));
    REQUIRE(arma::norm(sc.received - rank_one, "fro") <=
            1e-10 * arma::norm(sc.received, "fro"));
}

TEST_CASE("active powers live on the fading range")
{
    Scenario sc = generate_scenario(Dims{300, 30, 40, 20}, 1.0, 11);
    arma::vec active = sc.powers.gamma_true(sc.activity.support);
    REQUIRE(active.n_elem == 20);
    REQUIRE(active.min() >= std::pow(10.0, -1.5));
    REQUIRE(active.max() <= 1.0);
    // Inactive rows are exactly zero.
    REQUIRE(arma::accu(sc.powers.gamma_true > 0) == 20);
}

TEST_CASE("scenario rejects more active devices than devices")
{
    REQUIRE_THROWS_AS(generate_scenario(Dims{4, 3, 2, 5}, 1.0, 0), std::invalid_argument);
}

TEST_CASE("received matrix satisfies the generative identity")
{
    Scenario sc = generate_scenario(Dims{40, 12, 8, 6}, 0.5, 123);
    arma::cx_mat residual = sc.received - sc.pilots * sc.effective_channels - sc.noise;
    REQUIRE(arma::norm(residual, "fro") <= 1e-13 * arma::norm(sc.received, "fro"));
}

TEST_CASE("scenario generation is reproducible bit for bit")
{
    Scenario a = generate_scenario(Dims{25, 8, 6, 4}, 2.0, 77);
    Scenario b = generate_scenario(Dims{25, 8, 6, 4}, 2.0, 77);
    REQUIRE(arma::approx_equal(a.received, b.received, "absdiff", 0.0));
    REQUIRE(arma::approx_equal(a.pilots, b.pilots, "absdiff", 0.0));
    REQUIRE(arma::all(a.activity.support == b.activity.support));
}

TEST_CASE("sample covariance of zeros is zero")
{
    arma::cx_mat y(4, 6, arma::fill::zeros);
    REQUIRE(arma::norm(sample_covariance(y), "fro") == 0.0);
}

TEST_CASE("sample covariance scalar case")
{
    arma::cx_mat y(1, 2);
    y(0, 0) = arma::cx_double(1.0, 0.0);
    y(0, 1) = arma::cx_double(0.0, 1.0);
    arma::cx_mat s = sample_covariance(y);
    REQUIRE(s(0, 0).real() == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(s(0, 0).imag() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("sample covariance matches the columnwise sum")
{
    auto rng = make_engine(5);
    arma::cx_mat y = randn_circular(3, 5, 1.0, rng);
    arma::cx_mat s = sample_covariance(y);

    arma::cx_mat brute(3, 3, arma::fill::zeros);
    for (arma::uword m = 0; m < y.n_cols; ++m)
        brute += y.col(m) * y.col(m).t();
    brute /= double(y.n_cols);

    REQUIRE(arma::norm(s - brute, "fro") <= 1e-14 * arma::norm(brute, "fro"));
}

TEST_CASE("sample covariance is Hermitian with nonnegative spectrum")
{
    auto rng = make_engine(17);
    arma::cx_mat y = randn_circular(6, 9, 2.0, rng);
    arma::cx_mat s = sample_covariance(y);
    REQUIRE(arma::norm(s - s.t(), "fro") == 0.0);

    arma::vec eigval = arma::eig_sym(s);
    REQUIRE(eigval.min() >= -1e-12 * arma::trace(s).real());
}

TEST_CASE("sample covariance concentrates as snapshots grow")
{
    // Relative error of S against the model covariance shrinks with M.
    auto error_at = [](std::size_t n_antennas, std::uint64_t seed) {
        Dims dims{12, 6, n_antennas, 3};
        Scenario sc = generate_scenario(dims, 1.0, seed);
        arma::cx_mat model(6, 6, arma::fill::zeros);
        for (arma::uword n = 0; n < 12; ++n)
            model += sc.powers.gamma_true(n) * (sc.pilots.col(n) * sc.pilots.col(n).t());
        model.diag() += 1.0;
        arma::cx_mat s = sample_covariance(sc.received);
        return arma::norm(s - model, "fro") / arma::norm(model, "fro");
    };

    std::vector<double> small, large;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        small.push_back(error_at(50, seed));
        large.push_back(error_at(1000, seed));
    }
    std::sort(small.begin(), small.end());
    std::sort(large.begin(), large.end());
    REQUIRE(large[10] < small[10]);
}

TEST_CASE("scenario spec round-trips through JSON and regenerates exactly")
{
    ScenarioSpec spec;
    spec.dims = Dims{30, 10, 5, 7};
    spec.noise_var = 0.25;
    spec.seed = 4242;

    std::string path = "scenario_spec_test.json";
    save_scenario_spec(spec, path);
    ScenarioSpec loaded = load_scenario_spec(path);
    std::remove(path.c_str());

    REQUIRE(loaded.dims.n_devices == spec.dims.n_devices);
    REQUIRE(loaded.dims.pilot_len == spec.dims.pilot_len);
    REQUIRE(loaded.dims.n_antennas == spec.dims.n_antennas);
    REQUIRE(loaded.dims.n_active == spec.dims.n_active);
    REQUIRE(loaded.noise_var == spec.noise_var);
    REQUIRE(loaded.seed == spec.seed);

    Scenario a = materialize(spec);
    Scenario b = materialize(loaded);
    REQUIRE(arma::approx_equal(a.received, b.received, "absdiff", 0.0));
}

TEST_CASE("fixed pilot seed pins the pilot matrix across trial seeds")
{
    Dims dims{20, 6, 4, 5};
    Scenario a = generate_scenario(dims, 1.0, 1, 555);
    Scenario b = generate_scenario(dims, 1.0, 2, 555);
    REQUIRE(arma::approx_equal(a.pilots, b.pilots, "absdiff", 0.0));
    REQUIRE_FALSE(arma::approx_equal(a.received, b.received, "absdiff", 1e-12));
}
