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

#ifndef clsca_rng_H
#define clsca_rng_H

#include <armadillo>
#include <cstdint>
#include <random>

namespace clsca
{

// SplitMix64 finalizer, used as a stateless hash for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream split: the derived seed is a pure function of
// (seed, stream, counter), so consumers keyed by counter can run in any
// order or in parallel and still see identical random data.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t counter = 0) noexcept
{
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

inline std::mt19937_64 make_engine(std::uint64_t seed)
{
    return std::mt19937_64(seed);
}

// Matrix with i.i.d. circular complex Gaussian entries of the given variance
// (real and imaginary parts are independent N(0, var/2)).
arma::cx_mat randn_circular(std::size_t n_rows, std::size_t n_cols, double var,
                            std::mt19937_64 &rng);

} // namespace clsca

#endif
