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

#ifndef clsca_model_H
#define clsca_model_H

#include <armadillo>
#include <cstdint>
#include <random>
#include <string>

namespace clsca
{

// Problem dimensions of one uplink coherence interval.
struct Dims
{
    std::size_t n_devices = 0;  // total device count
    std::size_t pilot_len = 0;  // pilot sequence length (signal dimensions)
    std::size_t n_antennas = 0; // receive antennas (snapshots)
    std::size_t n_active = 0;   // active devices, 0 <= n_active <= n_devices

    // Throws std::invalid_argument on zero sizes or n_active > n_devices.
    void validate() const;
};

// Binary activity indicators plus the sorted index set of active devices.
struct ActivityPattern
{
    arma::uvec alpha;   // length n_devices, entries in {0,1}
    arma::uvec support; // sorted indices where alpha = 1
};

// Per-device power terms. gamma_true = alpha .* tx_power .* lsfc, the
// received signal power of each device (zero off the support).
struct PowerProfile
{
    arma::vec tx_power;
    arma::vec lsfc;
    arma::vec gamma_true;
};

// One synthesized coherence interval. received = pilots * effective_channels
// + noise holds exactly by construction; rows of effective_channels for
// inactive devices are zero.
struct Scenario
{
    Dims dims;
    arma::cx_mat pilots; // pilot_len x n_devices, unit-modulus entries
    ActivityPattern activity;
    PowerProfile powers;
    arma::cx_mat channels; // n_devices x n_antennas, i.i.d. CN(0,1)
    double noise_var = 1.0;
    arma::cx_mat effective_channels; // row n = sqrt(gamma_n) * channel row n
    arma::cx_mat noise;              // pilot_len x n_antennas, CN(0, noise_var)
    arma::cx_mat received;           // pilot_len x n_antennas
};

// Replay handle: everything is regenerated from the seeds, entries are not
// stored. pilot_seed lets callers pin the pilot matrix independently of the
// per-trial randomness (fixed-pilot experiments).
struct ScenarioSpec
{
    Dims dims;
    double noise_var = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t pilot_seed = 0; // 0 = derive from seed
};

// QPSK-alphabet pilot matrix: entries i.i.d. uniform over
// {+-1/sqrt(2) +- j/sqrt(2)}, so every entry has unit modulus and every
// column squared norm equals pilot_len exactly.
arma::cx_mat generate_pilots(const Dims &dims, std::mt19937_64 &rng);

// Synthesizes a full scenario from one seed. Sub-streams (pilots, support,
// fading, channels, noise) are derived with derive_seed so each part is
// reproducible on its own. The support is drawn uniformly without
// replacement; large-scale fading is 10^(u/10) with u uniform on [-15, 0] dB;
// transmit power is 1 for every device.
Scenario generate_scenario(const Dims &dims, double noise_var, std::uint64_t seed);
Scenario generate_scenario(const Dims &dims, double noise_var, std::uint64_t seed,
                           std::uint64_t pilot_seed);

// Sample covariance S = received * received^H / n_antennas, symmetrized so
// the result is Hermitian to the last bit.
arma::cx_mat sample_covariance(const arma::cx_mat &received);

Scenario materialize(const ScenarioSpec &spec);
void save_scenario_spec(const ScenarioSpec &spec, const std::string &path);
ScenarioSpec load_scenario_spec(const std::string &path);

} // namespace clsca

#endif
