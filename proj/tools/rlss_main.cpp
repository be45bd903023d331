#include "rlss/scenario_io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

rlss::ScenarioOverrides make_overrides(const std::string& strategy, double cap, double trace_period,
                                       int robots, double cell_size) {
    rlss::ScenarioOverrides ov;
    if (strategy == "HARD")
        ov.strategy = rlss::Strategy::hard;
    else if (strategy == "HARD_SOFT")
        ov.strategy = rlss::Strategy::hard_soft;
    if (cap > 0.0) ov.duration_cap = cap;
    if (trace_period > 0.0) ov.trace_period = trace_period;
    if (robots > 0) ov.robot_count = robots;
    if (cell_size > 0.0) ov.cell_size = cell_size;
    return ov;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RLSS multi-robot trajectory replanning"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", strategy, trace_path;
    double duration_cap = 0.0, trace_period = 0.0, cell_size = 0.0;
    int robots = 0;
    std::vector<int> sweep_robots;
    std::vector<double> sweep_cell_sizes;
    bool per_robot = false, parallel = false;

    CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario (or a sweep) and emit metrics");
    run_cmd->add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_option("--strategy", strategy, "Override strategy: HARD or HARD_SOFT")
        ->check(CLI::IsMember({"HARD", "HARD_SOFT"}));
    run_cmd->add_option("--duration-cap", duration_cap, "Override simulation duration cap [s]");
    run_cmd->add_option("--trace-period", trace_period, "Trace sampling period [s]");
    run_cmd->add_option("--robots", robots, "Use only the first N robots");
    run_cmd->add_option("--cell-size", cell_size, "Override grid cell size [m]");
    run_cmd->add_option("--sweep-robots", sweep_robots, "Robot counts to sweep")->delimiter(',');
    run_cmd->add_option("--sweep-cell-size", sweep_cell_sizes, "Cell sizes to sweep")->delimiter(',');
    run_cmd->add_flag("--per-robot", per_robot, "Write per-robot sampled trajectories");
    run_cmd->add_flag("--parallel", parallel, "Run sweep variants concurrently");

    CLI::App* recount_cmd =
        app.add_subcommand("recount", "Recompute metrics from an emitted trace file");
    recount_cmd->add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
    recount_cmd->add_option("--trace", trace_path, "Trace file")->required();
    recount_cmd->add_option("--strategy", strategy, "Strategy the trace was run with")
        ->check(CLI::IsMember({"HARD", "HARD_SOFT"}));
    recount_cmd->add_option("--robots", robots, "Robot count the trace was run with");
    recount_cmd->add_option("--cell-size", cell_size, "Cell size the trace was run with");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        rlss::ExperimentOptions options;
        options.out_dir = out_dir;
        options.overrides = make_overrides(strategy, duration_cap, trace_period, robots, cell_size);
        options.sweep_robots = sweep_robots;
        options.sweep_cell_sizes = sweep_cell_sizes;
        options.per_robot_files = per_robot;
        options.parallel_sweep = parallel;
        return rlss::run_experiment(scenario_path, options);
    }

    // recount
    try {
        rlss::Scenario scn = rlss::parse_scenario_file(
            scenario_path, make_overrides(strategy, 0.0, 0.0, robots, cell_size));
        rlss::Trace trace = rlss::read_trace(trace_path);
        std::vector<rlss::ConvexShape> shapes;
        std::vector<rlss::Vec> endpoints;
        for (const auto& r : scn.robots) {
            shapes.push_back(r.cfg.shape);
            endpoints.push_back(r.desired.endpoint());
        }
        int collisions = rlss::count_collisions(trace, shapes, scn.grid);
        auto deadlocked = rlss::detect_deadlock(trace, endpoints, scn.deadlock_window,
                                                scn.deadlock_eps, scn.goal_tolerance);
        int deadlocks = 0;
        for (bool d : deadlocked) deadlocks += d ? 1 : 0;
        std::cout << "collisions=" << collisions << " deadlocks=" << deadlocks
                  << " distance=" << rlss::total_distance(trace) << "\n";
        return 0;
    } catch (const rlss::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
