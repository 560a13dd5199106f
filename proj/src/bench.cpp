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
#include "clsca/model.hpp"
#include "clsca/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace clsca
{

namespace
{

struct TrialOutcome
{
    double p_md = 0.0;
    double nmse_val = 0.0;
    double solver_time_s = 0.0;
    double iterations = 0.0;
};

struct Cell
{
    std::size_t pilot_len;
    std::size_t n_antennas;
    std::size_t n_active;
    Solver solver;
};

// Stream id of a cell: a pure function of the dimensions, independent of the
// solver, so every solver sees identical scenarios at a given cell.
std::uint64_t cell_stream(const Cell &cell)
{
    return mix64(mix64(mix64(0xBE7CC377ULL ^ cell.pilot_len) ^ cell.n_antennas) ^
                 cell.n_active);
}

std::string cell_label(const Cell &cell)
{
    std::ostringstream os;
    os << "solver=" << solver_name(cell.solver) << " L=" << cell.pilot_len
       << " M=" << cell.n_antennas << " K=" << cell.n_active;
    return os.str();
}

TrialOutcome run_trial(const ExperimentSpec &spec, const Cell &cell, std::size_t trial)
{
    Dims dims{spec.n_devices, cell.pilot_len, cell.n_antennas, cell.n_active};
    std::uint64_t stream = cell_stream(cell);
    std::uint64_t seed = derive_seed(spec.master_seed, stream, trial);

    Scenario scenario;
    if (spec.fix_pilots)
    {
        std::uint64_t pilot_seed = derive_seed(spec.master_seed, stream ^ 0xF117ED, 0);
        scenario = generate_scenario(dims, spec.noise_var, seed, pilot_seed);
    }
    else
    {
        scenario = generate_scenario(dims, spec.noise_var, seed);
    }

    DetectionRule rule = spec.detection_threshold
                             ? DetectionRule::thresholded(*spec.detection_threshold)
                             : DetectionRule::top(cell.n_active);

    SolverConfig config = spec.solver_config;
    config.record_objective = false; // keep solve times free of bookkeeping

    arma::cx_mat scm = sample_covariance(scenario.received);
    JadceRun run = run_jadce(scm, scenario.received, scenario.pilots, spec.noise_var,
                             cell.solver, rule, config);

    TrialOutcome out;
    out.p_md = prob_missed_detection(scenario.activity.support, run.output.support_hat);
    out.nmse_val = nmse(run.output.x_hat, scenario.effective_channels);
    out.solver_time_s = run.solver.wall_time_s;
    out.iterations = double(run.solver.iterations);
    return out;
}

double mean_of(const std::vector<double> &values)
{
    double sum = 0.0;
    for (double v : values)
        sum += v;
    return sum / double(values.size());
}

double stderr_of(const std::vector<double> &values, double mean)
{
    if (values.size() < 2)
        return 0.0;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    double sample_var = ss / double(values.size() - 1);
    return std::sqrt(sample_var / double(values.size()));
}

// Median of chunk means; robust against scheduler spikes in the timings.
double median_of_means(const std::vector<double> &values)
{
    std::size_t n_chunks = std::min<std::size_t>(10, values.size());
    std::vector<double> chunk_means;
    for (std::size_t c = 0; c < n_chunks; ++c)
    {
        std::size_t lo = c * values.size() / n_chunks;
        std::size_t hi = (c + 1) * values.size() / n_chunks;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            sum += values[i];
        chunk_means.push_back(sum / double(hi - lo));
    }
    std::sort(chunk_means.begin(), chunk_means.end());
    std::size_t mid = chunk_means.size() / 2;
    if (chunk_means.size() % 2 == 1)
        return chunk_means[mid];
    return 0.5 * (chunk_means[mid - 1] + chunk_means[mid]);
}

ResultRow run_cell(const ExperimentSpec &spec, const Cell &cell, std::size_t workers)
{
    const std::size_t trials = spec.trials;
    std::vector<TrialOutcome> outcomes(trials);

    // Warm-up: first trial once more, timing discarded.
    run_trial(spec, cell, 0);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_trial = 0;

    auto work = [&]() {
        for (;;)
        {
            std::size_t t = next.fetch_add(1);
            if (t >= trials)
                return;
            try
            {
                outcomes[t] = run_trial(spec, cell, t);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                {
                    error = std::current_exception();
                    error_trial = t;
                }
                next.store(trials); // stop dispatching further trials
                return;
            }
        }
    };

    workers = std::max<std::size_t>(1, std::min(workers, trials));
    if (workers == 1)
    {
        work();
    }
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &th : pool)
            th.join();
    }

    if (error)
    {
        try
        {
            std::rethrow_exception(error);
        }
        catch (const std::exception &e)
        {
            throw std::runtime_error("Cell " + cell_label(cell) + " failed at trial " +
                                     std::to_string(error_trial) + ": " + e.what());
        }
    }

    std::vector<double> p_md(trials), nmse_vals(trials), times(trials), iters(trials);
    for (std::size_t t = 0; t < trials; ++t)
    {
        p_md[t] = outcomes[t].p_md;
        nmse_vals[t] = outcomes[t].nmse_val;
        times[t] = outcomes[t].solver_time_s;
        iters[t] = outcomes[t].iterations;
    }

    ResultRow row;
    row.solver = solver_name(cell.solver);
    row.pilot_len = cell.pilot_len;
    row.n_antennas = cell.n_antennas;
    row.n_active = cell.n_active;
    row.trials = trials;
    row.p_md_mean = mean_of(p_md);
    row.p_md_stderr = stderr_of(p_md, row.p_md_mean);
    row.nmse_mean = mean_of(nmse_vals);
    row.nmse_stderr = stderr_of(nmse_vals, row.nmse_mean);
    row.mean_solver_time_s = median_of_means(times);
    row.mean_iterations = mean_of(iters);
    return row;
}

std::vector<ResultRow> run_cells(const ExperimentSpec &spec, std::size_t workers,
                                 const CellCallback &on_cell)
{
    spec.validate();
    std::vector<ResultRow> rows;
    for (std::size_t pilot_len : spec.pilot_lens)
        for (std::size_t n_antennas : spec.antenna_counts)
            for (std::size_t n_active : spec.active_counts)
                for (Solver solver : spec.solvers)
                {
                    Cell cell{pilot_len, n_antennas, n_active, solver};
                    rows.push_back(run_cell(spec, cell, workers));
                    if (on_cell)
                        on_cell(rows.back());
                }
    return rows;
}

std::string format_float(double v)
{
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

nlohmann::json row_to_json(const ResultRow &row)
{
    return nlohmann::json{{"solver", row.solver},
                          {"L", row.pilot_len},
                          {"M", row.n_antennas},
                          {"K", row.n_active},
                          {"trials", row.trials},
                          {"p_md", row.p_md_mean},
                          {"p_md_se", row.p_md_stderr},
                          {"nmse", row.nmse_mean},
                          {"nmse_se", row.nmse_stderr},
                          {"time_s", row.mean_solver_time_s},
                          {"iters", row.mean_iterations}};
}

ResultRow row_from_json(const nlohmann::json &j)
{
    ResultRow row;
    row.solver = j.at("solver").get<std::string>();
    row.pilot_len = j.at("L").get<std::size_t>();
    row.n_antennas = j.at("M").get<std::size_t>();
    row.n_active = j.at("K").get<std::size_t>();
    row.trials = j.at("trials").get<std::size_t>();
    row.p_md_mean = j.at("p_md").get<double>();
    row.p_md_stderr = j.at("p_md_se").get<double>();
    row.nmse_mean = j.at("nmse").get<double>();
    row.nmse_stderr = j.at("nmse_se").get<double>();
    row.mean_solver_time_s = j.at("time_s").get<double>();
    row.mean_iterations = j.at("iters").get<double>();
    return row;
}

} // namespace

void ExperimentSpec::validate() const
{
    if (n_devices == 0)
        throw std::invalid_argument("N must be positive.");
    if (trials == 0)
        throw std::invalid_argument("trials must be at least 1.");
    if (pilot_lens.empty() || antenna_counts.empty() || active_counts.empty())
        throw std::invalid_argument("L_values, M_values and K_values must be nonempty.");
    if (solvers.empty())
        throw std::invalid_argument("solvers must be nonempty.");
    if (!(noise_var > 0.0))
        throw std::invalid_argument("noise_var must be positive.");
    for (std::size_t k : active_counts)
    {
        if (k == 0)
            throw std::invalid_argument("K_values entries must be at least 1.");
        if (k > n_devices)
            throw std::invalid_argument("K_values entries cannot exceed N.");
    }
    if (detection_threshold && *detection_threshold < 0.0)
        throw std::invalid_argument("detection threshold must be nonnegative.");
    solver_config.validate();
}

std::vector<ResultRow> run_experiment(const ExperimentSpec &spec, const CellCallback &on_cell)
{
    std::size_t workers = spec.workers;
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    return run_cells(spec, workers, on_cell);
}

std::vector<ResultRow> runtime_comparison(const ExperimentSpec &spec,
                                          const CellCallback &on_cell)
{
    return run_cells(spec, 1, on_cell);
}

void emit_results(const std::vector<ResultRow> &rows, const std::string &path,
                  const std::string &format)
{
    if (rows.empty())
        throw std::invalid_argument("Refusing to emit an empty result table.");
    if (format != "csv" && format != "json")
        throw std::invalid_argument("Unknown result format '" + format + "'.");

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("Cannot write results to " + path);

    if (format == "csv")
    {
        out << "solver,L,M,K,trials,p_md,p_md_se,nmse,nmse_se,time_s,iters\n";
        for (const ResultRow &row : rows)
            out << row.solver << ',' << row.pilot_len << ',' << row.n_antennas << ','
                << row.n_active << ',' << row.trials << ',' << format_float(row.p_md_mean)
                << ',' << format_float(row.p_md_stderr) << ',' << format_float(row.nmse_mean)
                << ',' << format_float(row.nmse_stderr) << ','
                << format_float(row.mean_solver_time_s) << ','
                << format_float(row.mean_iterations) << '\n';
    }
    else
    {
        nlohmann::json j = nlohmann::json::array();
        for (const ResultRow &row : rows)
            j.push_back(row_to_json(row));
        out << j.dump(2) << "\n";
    }

    if (!out.flush())
        throw std::runtime_error("Write failed for " + path);
}

std::vector<ResultRow> read_results_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("Cannot read results from " + path);

    std::string line;
    if (!std::getline(in, line) ||
        line != "solver,L,M,K,trials,p_md,p_md_se,nmse,nmse_se,time_s,iters")
        throw std::runtime_error("Unexpected CSV header in " + path);

    std::vector<ResultRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() != 11)
            throw std::runtime_error("Malformed CSV row in " + path + ": " + line);

        ResultRow row;
        row.solver = fields[0];
        row.pilot_len = std::stoul(fields[1]);
        row.n_antennas = std::stoul(fields[2]);
        row.n_active = std::stoul(fields[3]);
        row.trials = std::stoul(fields[4]);
        row.p_md_mean = std::stod(fields[5]);
        row.p_md_stderr = std::stod(fields[6]);
        row.nmse_mean = std::stod(fields[7]);
        row.nmse_stderr = std::stod(fields[8]);
        row.mean_solver_time_s = std::stod(fields[9]);
        row.mean_iterations = std::stod(fields[10]);
        rows.push_back(row);
    }
    return rows;
}

std::vector<ResultRow> read_results_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("Cannot read results from " + path);
    nlohmann::json j;
    in >> j;
    std::vector<ResultRow> rows;
    for (const auto &item : j)
        rows.push_back(row_from_json(item));
    return rows;
}

ExperimentSpec load_experiment_spec(const std::string &path,
                                    const std::vector<std::string> &overrides)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("Cannot read experiment config from " + path);

    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw std::invalid_argument("Config " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("Config " + path + " must be a JSON object.");

    for (const std::string &entry : overrides)
    {
        auto pos = entry.find('=');
        if (pos == std::string::npos || pos == 0)
            throw std::invalid_argument("Override '" + entry + "' is not of the form key=value.");
        std::string key = entry.substr(0, pos);
        std::string value = entry.substr(pos + 1);
        nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
        j[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
    }

    static const std::vector<std::string> known = {
        "N",         "L_values",  "M_values",  "K_values", "solvers", "trials",
        "noise_var", "master_seed", "detection", "fix_pilots", "workers"};
    for (const auto &item : j.items())
    {
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw std::invalid_argument("Config field '" + item.key() + "' is not recognized.");
    }

    ExperimentSpec spec;
    auto field = [&](const char *name, auto &target, bool required) {
        if (!j.contains(name))
        {
            if (required)
                throw std::invalid_argument(std::string("Config field '") + name +
                                            "' is required.");
            return;
        }
        try
        {
            target = j.at(name).template get<std::decay_t<decltype(target)>>();
        }
        catch (const nlohmann::json::exception &)
        {
            throw std::invalid_argument(std::string("Config field '") + name +
                                        "' has the wrong type.");
        }
    };

    field("N", spec.n_devices, false);
    field("L_values", spec.pilot_lens, true);
    field("M_values", spec.antenna_counts, true);
    field("K_values", spec.active_counts, true);
    field("trials", spec.trials, false);
    field("noise_var", spec.noise_var, false);
    field("master_seed", spec.master_seed, false);
    field("fix_pilots", spec.fix_pilots, false);
    field("workers", spec.workers, false);

    if (!j.contains("solvers"))
        throw std::invalid_argument("Config field 'solvers' is required.");
    if (!j.at("solvers").is_array())
        throw std::invalid_argument("Config field 'solvers' must be an array of names.");
    for (const auto &name : j.at("solvers"))
    {
        if (!name.is_string())
            throw std::invalid_argument("Config field 'solvers' must contain strings.");
        spec.solvers.push_back(solver_from_name(name.get<std::string>()));
    }

    if (j.contains("detection"))
    {
        const auto &det = j.at("detection");
        if (det.is_string() && det.get<std::string>() == "topk")
        {
            spec.detection_threshold.reset();
        }
        else if (det.is_object() && det.value("rule", "") == "topk")
        {
            spec.detection_threshold.reset();
        }
        else if (det.is_object() && det.value("rule", "") == "threshold")
        {
            if (!det.contains("gamma_th") || !det.at("gamma_th").is_number())
                throw std::invalid_argument(
                    "Config field 'detection': threshold rule needs a numeric 'gamma_th'.");
            spec.detection_threshold = det.at("gamma_th").get<double>();
        }
        else
        {
            throw std::invalid_argument(
                "Config field 'detection' must be \"topk\" or {\"rule\": \"topk\"|\"threshold\", ...}.");
        }
    }

    spec.validate();
    return spec;
}

} // namespace clsca
