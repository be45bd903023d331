#pragma once

#include "rlss/sim.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace rlss {

// Thrown on malformed or invalid scenario files; message names the field.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioOverrides {
    std::optional<double> cell_size;
    std::optional<int> robot_count;  // use only the first N robots
    std::optional<Strategy> strategy;
    std::optional<double> duration_cap;
    std::optional<double> trace_period;
};

// Parses and validates a scenario document; all defaults applied. Obstacles
// may be listed as occupied cells, meter-space boxes, or a seeded procedural
// forest of boxes (reproducible bit-for-bit).
Scenario parse_scenario(const nlohmann::json& doc, const ScenarioOverrides& overrides = {});
Scenario parse_scenario_file(const std::string& path, const ScenarioOverrides& overrides = {});

// Resolved scenario configuration echoed into run metadata.
nlohmann::json scenario_echo(const Scenario& scn);
nlohmann::json metrics_to_json(const RunMetrics& m, const Scenario& scn);

// Delimited trace: one row per (sample time, robot id), sorted by time then
// robot, with a versioned header carrying the run metadata.
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

void write_per_robot_samples(const Trace& trace, const std::string& dir);

struct ExperimentOptions {
    std::string out_dir;
    ScenarioOverrides overrides;
    std::vector<int> sweep_robots;
    std::vector<double> sweep_cell_sizes;
    bool per_robot_files = false;
    bool parallel_sweep = false;
};

// Runs the scenario (or its sweep variants), writing trace.csv + metrics.json
// per run and a sweep summary when sweeping. Exit-code semantics: 0 completed,
// 1 validation error, 2 runtime failure.
int run_experiment(const std::string& scenario_path, const ExperimentOptions& options);

}  // namespace rlss
