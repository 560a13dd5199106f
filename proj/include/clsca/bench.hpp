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

#ifndef clsca_bench_H
#define clsca_bench_H

#include "clsca/jadce.hpp"
#include "clsca/solvers.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace clsca
{

// Monte-Carlo sweep description. Each (pilot_len, n_antennas, n_active,
// solver) cell runs `trials` independent scenarios.
struct ExperimentSpec
{
    std::size_t n_devices = 300;
    std::vector<std::size_t> pilot_lens;
    std::vector<std::size_t> antenna_counts;
    std::vector<std::size_t> active_counts;
    std::vector<Solver> solvers;
    std::size_t trials = 1000;
    double noise_var = 1.0;
    std::uint64_t master_seed = 0;
    // unset = top-K detection with the cell's n_active; set = fixed threshold
    std::optional<double> detection_threshold;
    bool fix_pilots = false; // reuse one pilot matrix across a cell's trials
    std::size_t workers = 0; // 0 = hardware concurrency
    SolverConfig solver_config;

    void validate() const; // throws std::invalid_argument
};

struct ResultRow
{
    std::string solver;
    std::size_t pilot_len = 0;
    std::size_t n_antennas = 0;
    std::size_t n_active = 0;
    std::size_t trials = 0;
    double p_md_mean = 0.0;
    double p_md_stderr = 0.0;
    double nmse_mean = 0.0;
    double nmse_stderr = 0.0;
    double mean_solver_time_s = 0.0;
    double mean_iterations = 0.0;
};

using CellCallback = std::function<void(const ResultRow &)>;

// Runs every cell of the sweep. Per-trial seeds are a pure function of
// (master_seed, pilot_len, n_antennas, n_active, trial), so results are
// identical for any worker count and all solvers see the same scenarios at a
// given cell. A failed trial aborts its cell with a diagnostic. One warm-up
// trial per cell is run and discarded from the timing statistics.
std::vector<ResultRow> run_experiment(const ExperimentSpec &spec,
                                      const CellCallback &on_cell = nullptr);

// Same sweep with timing focus: trials run sequentially on one worker so
// solver wall times are not distorted by contention. Solver time excludes
// SCM construction throughout.
std::vector<ResultRow> runtime_comparison(const ExperimentSpec &spec,
                                          const CellCallback &on_cell = nullptr);

// Writes rows as CSV (header
// solver,L,M,K,trials,p_md,p_md_se,nmse,nmse_se,time_s,iters and floats with
// 9 significant digits) or as a JSON array with the same keys. Throws
// std::invalid_argument on empty rows, std::runtime_error on I/O failure.
void emit_results(const std::vector<ResultRow> &rows, const std::string &path,
                  const std::string &format);

std::vector<ResultRow> read_results_csv(const std::string &path);
std::vector<ResultRow> read_results_json(const std::string &path);

// JSON config ingestion with field-level validation; unknown keys are
// rejected. Overrides are "key=value" pairs applied on top of the file.
ExperimentSpec load_experiment_spec(const std::string &path,
                                    const std::vector<std::string> &overrides = {});

} // namespace clsca

#endif
