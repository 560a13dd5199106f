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

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace clsca
{

namespace
{

// Sub-stream tags for scenario generation.
enum : std::uint64_t
{
    stream_pilots = 1,
    stream_support = 2,
    stream_lsfc = 3,
    stream_channels = 4,
    stream_noise = 5
};

constexpr double inv_sqrt2 = 0.70710678118654752440;

} // namespace

void Dims::validate() const
{
    if (n_devices == 0)
        throw std::invalid_argument("Device count must be positive.");
    if (pilot_len == 0)
        throw std::invalid_argument("Pilot length must be positive.");
    if (n_antennas == 0)
        throw std::invalid_argument("Antenna count must be positive.");
    if (n_active > n_devices)
        throw std::invalid_argument("Active-device count cannot exceed the device count.");
}

arma::cx_mat generate_pilots(const Dims &dims, std::mt19937_64 &rng)
{
    dims.validate();
    std::uniform_int_distribution<int> corner(0, 3);
    arma::cx_mat pilots(dims.pilot_len, dims.n_devices);
    for (arma::uword c = 0; c < pilots.n_cols; ++c)
        for (arma::uword r = 0; r < pilots.n_rows; ++r)
        {
            int k = corner(rng);
            double re = (k & 1) ? -inv_sqrt2 : inv_sqrt2;
            double im = (k & 2) ? -inv_sqrt2 : inv_sqrt2;
            pilots(r, c) = arma::cx_double(re, im);
        }
    return pilots;
}

Scenario generate_scenario(const Dims &dims, double noise_var, std::uint64_t seed)
{
    return generate_scenario(dims, noise_var, seed, derive_seed(seed, stream_pilots));
}

Scenario generate_scenario(const Dims &dims, double noise_var, std::uint64_t seed,
                           std::uint64_t pilot_seed)
{
    dims.validate();
    if (!(noise_var > 0.0))
        throw std::invalid_argument("Noise variance must be positive.");

    Scenario sc;
    sc.dims = dims;
    sc.noise_var = noise_var;

    auto pilot_rng = make_engine(pilot_seed);
    sc.pilots = generate_pilots(dims, pilot_rng);

    // Support: uniform without replacement (partial Fisher-Yates).
    auto support_rng = make_engine(derive_seed(seed, stream_support));
    arma::uvec order(dims.n_devices);
    for (arma::uword i = 0; i < dims.n_devices; ++i)
        order(i) = i;
    for (std::size_t i = 0; i < dims.n_active; ++i)
    {
        std::uniform_int_distribution<arma::uword> pick(i, dims.n_devices - 1);
        std::swap(order(i), order(pick(support_rng)));
    }
    sc.activity.support = arma::sort(order.head(dims.n_active));
    sc.activity.alpha = arma::uvec(dims.n_devices, arma::fill::zeros);
    for (arma::uword idx : sc.activity.support)
        sc.activity.alpha(idx) = 1;

    // Large-scale fading 10^(u/10), u uniform on [-15, 0] dB; unit transmit power.
    auto lsfc_rng = make_engine(derive_seed(seed, stream_lsfc));
    std::uniform_real_distribution<double> db(-15.0, 0.0);
    sc.powers.lsfc.set_size(dims.n_devices);
    for (arma::uword i = 0; i < dims.n_devices; ++i)
        sc.powers.lsfc(i) = std::pow(10.0, db(lsfc_rng) / 10.0);
    sc.powers.tx_power = arma::vec(dims.n_devices, arma::fill::ones);
    sc.powers.gamma_true = sc.powers.tx_power % sc.powers.lsfc %
                           arma::conv_to<arma::vec>::from(sc.activity.alpha);

    auto channel_rng = make_engine(derive_seed(seed, stream_channels));
    sc.channels = randn_circular(dims.n_devices, dims.n_antennas, 1.0, channel_rng);

    sc.effective_channels = sc.channels;
    for (arma::uword n = 0; n < dims.n_devices; ++n)
        sc.effective_channels.row(n) *= std::sqrt(sc.powers.gamma_true(n));

    auto noise_rng = make_engine(derive_seed(seed, stream_noise));
    sc.noise = randn_circular(dims.pilot_len, dims.n_antennas, noise_var, noise_rng);
    arma::cx_mat signal = sc.pilots * sc.effective_channels;
    sc.received = signal + sc.noise;
    return sc;
}

arma::cx_mat sample_covariance(const arma::cx_mat &received)
{
    arma::cx_mat scm = received * received.t() / double(received.n_cols);
    return 0.5 * (scm + scm.t());
}

Scenario materialize(const ScenarioSpec &spec)
{
    std::uint64_t pilot_seed =
        spec.pilot_seed != 0 ? spec.pilot_seed : derive_seed(spec.seed, stream_pilots);
    return generate_scenario(spec.dims, spec.noise_var, spec.seed, pilot_seed);
}

void save_scenario_spec(const ScenarioSpec &spec, const std::string &path)
{
    nlohmann::json j{{"N", spec.dims.n_devices},   {"L", spec.dims.pilot_len},
                     {"M", spec.dims.n_antennas},  {"K", spec.dims.n_active},
                     {"noise_var", spec.noise_var}, {"seed", spec.seed},
                     {"pilot_seed", spec.pilot_seed}};
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("Cannot write scenario spec to " + path);
    out << j.dump(2) << "\n";
}

ScenarioSpec load_scenario_spec(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("Cannot read scenario spec from " + path);
    nlohmann::json j;
    in >> j;

    ScenarioSpec spec;
    spec.dims.n_devices = j.at("N").get<std::size_t>();
    spec.dims.pilot_len = j.at("L").get<std::size_t>();
    spec.dims.n_antennas = j.at("M").get<std::size_t>();
    spec.dims.n_active = j.at("K").get<std::size_t>();
    spec.noise_var = j.at("noise_var").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.pilot_seed = j.value("pilot_seed", std::uint64_t(0));
    spec.dims.validate();
    return spec;
}

} // namespace clsca
