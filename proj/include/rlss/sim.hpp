#pragma once

#include "rlss/rlss.hpp"

#include <string>
#include <vector>

namespace rlss {

struct ScenarioRobot {
    RobotConfig cfg;
    Vec start;
    DesiredTrajectory desired;
};

// Synchronous multi-robot replanning scenario with perfect position sensing.
struct Scenario {
    std::string name;
    int dimension = 3;
    OccupancyGrid grid;
    std::vector<ScenarioRobot> robots;
    Strategy strategy = Strategy::hard_soft;
    double duration_cap = 60.0;
    double sensing_range = 0.0;  // <= 0: unlimited
    double trace_period = 0.01;
    double goal_tolerance = 1e-2;  // epsilon_goal
    double deadlock_window = 5.0;
    double deadlock_eps = 1e-2;
    double sensing_noise = 0.0;  // bounded uniform noise on sensed peer positions
    std::uint64_t noise_seed = 0;

    // Common replanning period; all robots must agree on it.
    double timestep() const;
};

struct IterationRecord {
    bool success = false;
    PlanStage failed_stage = PlanStage::goal_selection;
    bool soft_used = false;
    int rescales = 0;
    double compute_ms = 0.0;
    double continuity_error = 0.0;
    double workspace_violation = 0.0;
    double max_slack = 0.0;
    int skipped_planes = 0;
    double validity_ratio = 0.0;
};

struct Trace {
    int dimension = 0;
    int num_robots = 0;
    double sample_period = 0.01;
    double timestep = 0.1;
    double end_time = 0.0;
    bool hit_cap = false;
    std::vector<double> sample_times;                      // k * period in [0, end_time)
    std::vector<std::vector<Vec>> positions;               // [sample][robot]
    std::vector<std::vector<IterationRecord>> iterations;  // [timestep][robot]

    const IterationRecord& record_for_sample(int sample, int robot) const;
};

struct RunMetrics {
    int collisions = 0;
    int deadlocks = 0;
    double total_distance = 0.0;
    bool completed = false;
    double end_time = 0.0;
    std::vector<bool> goal_reached;
    std::vector<bool> deadlocked;
    double compute_max_ms = 0.0;
    double compute_avg_ms = 0.0;
    std::vector<double> per_robot_max_ms;
    std::vector<double> per_robot_avg_ms;
    int failed_iterations = 0;
    int soft_iterations = 0;
    int total_rescales = 0;
    double max_continuity_error = 0.0;
    double max_workspace_violation = 0.0;
    double max_validity_ratio = 0.0;  // over committed plans; <= 1 means limits held
};

struct RunOutput {
    RunMetrics metrics;
    Trace trace;
};

// Lockstep loop: every robot replans against a shared snapshot of sensed
// positions, then all advance along their committed plans for one period.
// Replanning failures keep the previous plan. Ends when every robot is within
// goal_tolerance of its desired endpoint, or at the duration cap.
RunOutput run(const Scenario& scn);

// Collision counting per the 0.01 s sampling rule: at each sample time add the
// number of intersecting unordered robot pairs plus the number of
// (robot, occupied cell) intersections.
int count_collisions(const Trace& trace, const std::vector<ConvexShape>& shapes,
                     const OccupancyGrid& grid);

// A robot is deadlocked iff the run hit the cap, it is farther than goal_tol
// from its desired endpoint, and its net displacement over the final window is
// below eps.
std::vector<bool> detect_deadlock(const Trace& trace, const std::vector<Vec>& desired_endpoints,
                                  double window, double eps, double goal_tol);

// Sum over robots of sampled path length.
double total_distance(const Trace& trace);

}  // namespace rlss
