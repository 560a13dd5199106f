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

#include "clsca/bench.hpp"
#include "clsca/jadce.hpp"
#include "clsca/model.hpp"
#include "clsca/oracles.hpp"
#include "clsca/solvers.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace
{

// Trials parallelize across workers; a threaded BLAS underneath them only
// contends. OpenBLAS reads its env var in a library constructor, so it has
// to be reconfigured through the API. An explicit user setting wins.
void pin_blas_threads()
{
    if (std::getenv("OPENBLAS_NUM_THREADS") == nullptr && openblas_set_num_threads)
        openblas_set_num_threads(1);
}

// Exit codes: 0 success, 1 numerical/runtime failure, 2 usage/config error.
enum
{
    exit_ok = 0,
    exit_runtime = 1,
    exit_usage = 2
};

struct SimulateArgs
{
    std::size_t n_devices = 300;
    std::size_t pilot_len = 30;
    std::size_t n_antennas = 40;
    std::size_t n_active = 20;
    double noise_var = 1.0;
    std::string solver = "cl-sca";
    std::uint64_t seed = 0;
    std::size_t top_k = 0; // 0 = use n_active
    double threshold = -1.0;
    std::string output;
};

void print_support(const char *label, const arma::uvec &support)
{
    std::cout << label;
    for (arma::uword idx : support)
        std::cout << ' ' << idx;
    std::cout << '\n';
}

int run_simulate(const SimulateArgs &args)
{
    clsca::Dims dims{args.n_devices, args.pilot_len, args.n_antennas, args.n_active};
    dims.validate();

    clsca::Solver solver = clsca::solver_from_name(args.solver);
    clsca::DetectionRule rule =
        args.threshold >= 0.0
            ? clsca::DetectionRule::thresholded(args.threshold)
            : clsca::DetectionRule::top(args.top_k > 0 ? args.top_k : args.n_active);

    clsca::Scenario sc = clsca::generate_scenario(dims, args.noise_var, args.seed);
    clsca::JadceRun run = clsca::run_jadce(sc, solver, rule);

    std::cout << "# simulate solver=" << args.solver << " N=" << args.n_devices
              << " L=" << args.pilot_len << " M=" << args.n_antennas
              << " K=" << args.n_active << " sigma2=" << args.noise_var
              << " seed=" << args.seed << '\n';
    print_support("true_support:", sc.activity.support);
    print_support("est_support:", run.output.support_hat);

    std::cout << std::setprecision(9);
    if (sc.activity.support.is_empty())
        std::cout << "p_md: n/a\n";
    else
        std::cout << "p_md: "
                  << clsca::prob_missed_detection(sc.activity.support, run.output.support_hat)
                  << '\n';

    if (arma::accu(arma::square(arma::abs(sc.effective_channels))) == 0.0)
        std::cout << "nmse: n/a\n";
    else
        std::cout << "nmse: " << clsca::nmse(run.output.x_hat, sc.effective_channels) << '\n';

    std::cout << "false_alarms: "
              << clsca::false_alarm_count(sc.activity.support, run.output.support_hat) << '\n';
    std::cout << "iterations: " << run.solver.iterations << '\n';
    std::cout << "converged: " << (run.solver.converged ? "yes" : "no") << '\n';
    std::cout << "#time solve_s: " << run.solver.wall_time_s << '\n';

    if (!args.output.empty())
        clsca::save_output_json(run.output, args.output);
    return exit_ok;
}

int run_bench(const std::string &config_path, const std::string &output_path,
              const std::string &format, const std::vector<std::string> &overrides)
{
    clsca::ExperimentSpec spec = clsca::load_experiment_spec(config_path, overrides);

    std::cout << "# bench config=" << config_path << " cells="
              << spec.pilot_lens.size() * spec.antenna_counts.size() *
                     spec.active_counts.size() * spec.solvers.size()
              << " trials=" << spec.trials << '\n';

    auto progress = [](const clsca::ResultRow &row) {
        std::cout << "# cell solver=" << row.solver << " L=" << row.pilot_len
                  << " M=" << row.n_antennas << " K=" << row.n_active
                  << std::setprecision(9) << " p_md=" << row.p_md_mean
                  << " nmse=" << row.nmse_mean << '\n';
        std::cout << "#time cell_solver_mean_s: " << row.mean_solver_time_s << '\n';
        std::cout.flush();
    };

    std::vector<clsca::ResultRow> rows = clsca::run_experiment(spec, progress);
    clsca::emit_results(rows, output_path, format);
    std::cout << "# wrote " << rows.size() << " rows to " << output_path << '\n';
    return exit_ok;
}

int run_verify(std::size_t seeds, const std::string &oracle_filter)
{
    std::vector<clsca::oracles::OracleReport> reports =
        clsca::oracles::run_all(seeds, oracle_filter);
    if (reports.empty())
    {
        std::cerr << "No oracle matches '" << oracle_filter
                  << "'; known: theorem1, gradient, sherman-morrison, em-monotonicity, "
                     "cwo-coordinate.\n";
        return exit_usage;
    }

    bool all_pass = true;
    for (const auto &report : reports)
    {
        std::cout << (report.pass ? "ok   " : "FAIL ") << report.name
                  << std::setprecision(6) << "  max_err=" << report.max_error
                  << "  checks=" << report.checks;
        if (!report.detail.empty())
            std::cout << "  (" << report.detail << ")";
        std::cout << '\n';
        all_pass = all_pass && report.pass;
    }
    return all_pass ? exit_ok : exit_runtime;
}

} // namespace

int main(int argc, char **argv)
{
    pin_blas_threads();

    CLI::App app{"Covariance-learning joint activity detection and channel estimation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App *simulate = app.add_subcommand("simulate", "Run one scenario end to end");
    simulate->add_option("--N", sim.n_devices, "Device count");
    simulate->add_option("--L", sim.pilot_len, "Pilot length");
    simulate->add_option("--M", sim.n_antennas, "Antenna count");
    simulate->add_option("--K", sim.n_active, "Active-device count");
    simulate->add_option("--sigma2", sim.noise_var, "Noise variance");
    simulate
        ->add_option("--solver", sim.solver, "Solver")
        ->check(CLI::IsMember({"cl-sca", "cwo", "cl-mp", "msbl-em"}));
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--topk", sim.top_k, "Top-K detection count (default: K)");
    simulate->add_option("--threshold", sim.threshold, "Threshold detection level");
    simulate->add_option("--output", sim.output, "Write detection output as JSON");

    std::string bench_config, bench_output, bench_format = "csv";
    std::vector<std::string> bench_overrides;
    CLI::App *bench = app.add_subcommand("bench", "Run a Monte-Carlo sweep from a config");
    bench->add_option("--config", bench_config, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    bench->add_option("--output", bench_output, "Result table path")->required();
    bench->add_option("--format", bench_format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    bench->add_option("--override", bench_overrides, "key=value config override");

    std::size_t verify_seeds = 50;
    std::string verify_oracle;
    CLI::App *verify = app.add_subcommand("verify", "Run the numerical cross-checks");
    verify->add_option("--seeds", verify_seeds, "Random instances per oracle")
        ->check(CLI::PositiveNumber);
    verify->add_option("--oracle", verify_oracle, "Run only oracles matching this name");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_usage;
    }

    try
    {
        if (simulate->parsed())
            return run_simulate(sim);
        if (bench->parsed())
            return run_bench(bench_config, bench_output, bench_format, bench_overrides);
        if (verify->parsed())
            return run_verify(verify_seeds, verify_oracle);
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}
