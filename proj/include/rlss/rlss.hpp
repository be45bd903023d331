#pragma once

#include "rlss/corridor.hpp"
#include "rlss/geometry.hpp"
#include "rlss/occupancy_grid.hpp"
#include "rlss/planner.hpp"
#include "rlss/qp.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rlss {

// Per-robot planning parameters.
struct RobotConfig {
    ConvexShape shape;
    Workspace workspace;
    int continuity = 2;                     // c: committed plans are C^c
    std::vector<double> derivative_limits;  // gamma^k for k = 1..K
    double replan_period = 0.1;             // dt
    double horizon = 3.0;                   // tau
    int piece_count = 4;                    // L
    std::vector<int> degrees;               // degree of each piece, size L
    std::vector<double> energy_weights;     // lambda for derivative order k at index k-1
    std::vector<double> deviation_weights;  // theta per piece, size L
    double rescale_factor = 1.5;            // r
    double soft_weight = 0.0;               // alpha; 0 picks 1e4 * max(lambda)
    int max_rescale_attempts = 5;           // M
    bool search_avoids_robots = true;       // treat sensed robots as search obstacles
    double obstacle_prune_padding = 0.0;
    double robot_safety_margin = -1.0;      // < 0 picks v_max * replan_period

    double robot_margin() const {
        return robot_safety_margin >= 0.0 ? robot_safety_margin : v_max() * replan_period;
    }

    static RobotConfig defaults(int dimension);
    void validate() const;
    double v_max() const { return derivative_limits.front(); }
    int max_limited_order() const { return static_cast<int>(derivative_limits.size()); }
    double soft_penalty() const;
};

// The robot's committed plan; the planner's notion of state is derived from
// it, not from simulated physics.
struct PlanState {
    PiecewiseTrajectory committed;
    double commit_time = 0.0;

    static PlanState at_rest(const Vec& position);
    Vec position_at(double now) const;
    // Derivatives 0..c of the committed plan at absolute time now (clamped
    // into the plan's domain).
    std::vector<Vec> derivatives_at(double now, int c) const;
};

// --- Trajectory optimization ---

struct QuadraticObjective {
    Eigen::MatrixXd Q;
    Eigen::VectorXd q;
};

// Energy (integrated squared derivative magnitudes, closed-form Bernstein
// integrals over hodograph control points) plus deviation of piece endpoints
// from segment endpoints, over stacked control point coordinates.
QuadraticObjective build_objective(const DiscretePlan& plan, const RobotConfig& cfg);

enum class ConstraintMode { hard, soft };

struct TrajectoryQp {
    QpProblem qp;
    int control_vars = 0;  // leading variables; slacks (soft mode) follow
    int slack_vars = 0;
};

// Objective merged with: initial-derivative equalities (orders 0..c), junction
// continuity equalities, and corridor half-space inequalities on every control
// point. Soft mode adds one slack s >= 0 per obstacle/robot half-space
// (n.P + a <= s) penalized by alpha s^2; continuity and workspace stay hard.
TrajectoryQp build_constraints(const DiscretePlan& plan, const SafeCorridor& corridor,
                               const RobotConfig& cfg, const std::vector<Vec>& initial_derivatives,
                               ConstraintMode mode);

// Control-point solution -> piecewise trajectory with the plan's durations.
PiecewiseTrajectory extract_trajectory(const DiscretePlan& plan, const RobotConfig& cfg,
                                       const Eigen::VectorXd& x);

// Exact Bernstein product integral: G(a,b) = int_0^T B_{a,m} B_{b,m} dt.
Eigen::MatrixXd bernstein_gram(int m, double T);
// Control points of the k-th derivative as a linear map of the piece's
// control points (chained hodographs).
Eigen::MatrixXd hodograph_transform(int degree, double T, int order);

// --- Validity check and temporal rescaling ---

struct ValidityReport {
    bool valid = true;
    std::vector<double> bounds;  // conservative bound on max |d^k f/dt^k|, k = 1..K
};

// Convex-hull bound: the k-th derivative magnitude never exceeds the largest
// control-point norm of the k-th hodograph.
ValidityReport validity_check(const PiecewiseTrajectory& traj, const RobotConfig& cfg);

// All durations multiplied by r (> 1); geometry unchanged.
DiscretePlan temporal_rescale(const DiscretePlan& plan, double r);

// --- Per-robot replanning iteration ---

enum class Strategy { hard, hard_soft };
enum class PlanStage { goal_selection, discrete_search, corridor, optimization, validity };

const char* to_string(Strategy s);
const char* to_string(PlanStage s);

struct SensedRobot {
    ConvexShape shape;
    Vec position;
};

// Per-robot immutable planning context (config + desired trajectory + cached
// grid inflation).
struct PlanContext {
    RobotConfig cfg;
    DesiredTrajectory desired;
    std::shared_ptr<const PlacementMask> mask;

    static PlanContext make(RobotConfig cfg, DesiredTrajectory desired, const OccupancyGrid& grid);
};

struct IterationDiagnostics {
    bool success = false;
    PlanStage failed_stage = PlanStage::goal_selection;
    std::string failure_detail;
    bool soft_used = false;
    int rescales = 0;
    int obstacle_planes = 0;
    int robot_planes = 0;
    int skipped_planes = 0;
    double continuity_error = 0.0;  // max initial/junction mismatch up to order c
    double workspace_violation = 0.0;
    double max_slack = 0.0;       // worst soft-constraint violation, 0 in hard mode
    double validity_ratio = 0.0;  // max over k of hodograph bound / gamma_k
    std::string attempt_log;
};

struct IterationResult {
    bool success = false;
    PiecewiseTrajectory trajectory;
    IterationDiagnostics diag;
};

// One replanning iteration: goal selection, discrete search, corridor
// construction, QP smoothing, validity check; temporal rescaling and (for
// hard_soft) soft fallback on failures. Failure leaves the previous plan in
// force (the caller keeps its PlanState).
IterationResult plan_iteration(const PlanContext& ctx, const OccupancyGrid& grid,
                               const std::vector<SensedRobot>& others, const PlanState& state,
                               double now, Strategy strategy);

// Optimization + validity stages alone, for a given discrete plan and
// corridor builder; exposed so strategy behavior is testable on crafted
// corridors. The corridor_builder is invoked after each temporal rescale.
struct OptimizeOutcome {
    bool success = false;
    PiecewiseTrajectory trajectory;
    PlanStage failed_stage = PlanStage::optimization;
    std::string failure_detail;
    bool soft_used = false;
    int rescales = 0;
    double max_slack = 0.0;
    std::string attempt_log;  // per-attempt outcome markers, for diagnostics
};

using CorridorBuilder = std::function<CorridorResult(const DiscretePlan&)>;

OptimizeOutcome optimize_with_strategy(DiscretePlan plan, const CorridorBuilder& corridor_builder,
                                       const RobotConfig& cfg,
                                       const std::vector<Vec>& initial_derivatives,
                                       Strategy strategy);

}  // namespace rlss
