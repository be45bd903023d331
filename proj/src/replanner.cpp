#include "rlss/rlss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rlss {

RobotConfig RobotConfig::defaults(int dimension) {
    RobotConfig cfg;
    cfg.shape = ConvexShape::box(Vec::Constant(dimension, 0.15));
    cfg.derivative_limits = {2.0, 10.0};
    cfg.degrees = {6, 6, 6, 6};
    cfg.energy_weights = {0.01, 1.0};
    cfg.deviation_weights = {1.0, 1.0, 1.0, 100.0};
    return cfg;
}

void RobotConfig::validate() const {
    if (piece_count < 1) throw std::invalid_argument("RobotConfig: piece_count must be >= 1");
    if (static_cast<int>(degrees.size()) != piece_count)
        throw std::invalid_argument("RobotConfig: degrees must have one entry per piece");
    if (static_cast<int>(deviation_weights.size()) != piece_count)
        throw std::invalid_argument("RobotConfig: deviation_weights must have one entry per piece");
    if (continuity < 0) throw std::invalid_argument("RobotConfig: continuity must be >= 0");
    for (int h : degrees)
        if (h < continuity + 1)
            throw std::invalid_argument("RobotConfig: piece degree must be at least continuity + 1");
    if (derivative_limits.empty() || derivative_limits.front() <= 0.0)
        throw std::invalid_argument("RobotConfig: need a positive velocity limit");
    for (double g : derivative_limits)
        if (g <= 0.0) throw std::invalid_argument("RobotConfig: derivative limits must be positive");
    for (double w : energy_weights)
        if (w < 0.0) throw std::invalid_argument("RobotConfig: energy weights must be >= 0");
    for (double w : deviation_weights)
        if (w < 0.0) throw std::invalid_argument("RobotConfig: deviation weights must be >= 0");
    if (rescale_factor <= 1.0) throw std::invalid_argument("RobotConfig: rescale factor must be > 1");
    if (replan_period <= 0.0) throw std::invalid_argument("RobotConfig: replan period must be > 0");
    if (horizon <= 0.0) throw std::invalid_argument("RobotConfig: horizon must be > 0");
    if (max_rescale_attempts < 0)
        throw std::invalid_argument("RobotConfig: max rescale attempts must be >= 0");
}

double RobotConfig::soft_penalty() const {
    if (soft_weight > 0.0) return soft_weight;
    // Scaled against the strongest objective pull so soft violations stay at
    // the millimeter scale instead of tracking the deviation gradient.
    double wmax = 1.0;
    for (double w : energy_weights) wmax = std::max(wmax, w);
    for (double w : deviation_weights) wmax = std::max(wmax, w);
    return 1e4 * wmax;
}

PlanState PlanState::at_rest(const Vec& position) {
    PlanState s;
    s.committed.pieces.push_back(BezierPiece{1.0, {position}});
    return s;
}

Vec PlanState::position_at(double now) const { return committed.eval_clamped(now - commit_time); }

std::vector<Vec> PlanState::derivatives_at(double now, int c) const {
    std::vector<Vec> out;
    out.reserve(c + 1);
    for (int k = 0; k <= c; ++k) out.push_back(committed.derivative_clamped(now - commit_time, k));
    return out;
}

ValidityReport validity_check(const PiecewiseTrajectory& traj, const RobotConfig& cfg) {
    ValidityReport report;
    const int K = cfg.max_limited_order();
    report.bounds.assign(K, 0.0);
    for (const auto& piece : traj.pieces) {
        BezierPiece hodo = piece;
        for (int k = 1; k <= K; ++k) {
            hodo = bezier_derivative(hodo);
            double worst = 0.0;
            for (const auto& cp : hodo.control_points) worst = std::max(worst, cp.norm());
            report.bounds[k - 1] = std::max(report.bounds[k - 1], worst);
        }
    }
    for (int k = 1; k <= K; ++k)
        if (report.bounds[k - 1] > cfg.derivative_limits[k - 1]) report.valid = false;
    return report;
}

DiscretePlan temporal_rescale(const DiscretePlan& plan, double r) {
    if (r <= 1.0) throw std::invalid_argument("temporal_rescale: r must be > 1");
    DiscretePlan out = plan;
    for (double& d : out.durations) d *= r;
    return out;
}

const char* to_string(Strategy s) { return s == Strategy::hard ? "HARD" : "HARD_SOFT"; }

const char* to_string(PlanStage s) {
    switch (s) {
        case PlanStage::goal_selection: return "goal_selection";
        case PlanStage::discrete_search: return "discrete_search";
        case PlanStage::corridor: return "corridor";
        case PlanStage::optimization: return "optimization";
        case PlanStage::validity: return "validity";
    }
    return "unknown";
}

PlanContext PlanContext::make(RobotConfig cfg, DesiredTrajectory desired,
                              const OccupancyGrid& grid) {
    cfg.validate();
    PlanContext ctx;
    ctx.mask = std::make_shared<PlacementMask>(grid, cfg.shape, cfg.workspace);
    ctx.cfg = std::move(cfg);
    ctx.desired = std::move(desired);
    return ctx;
}

namespace {

double solution_max_slack(const TrajectoryQp& tqp, const Eigen::VectorXd& x) {
    double worst = 0.0;
    for (int s = 0; s < tqp.slack_vars; ++s) worst = std::max(worst, x(tqp.control_vars + s));
    return worst;
}

}  // namespace

OptimizeOutcome optimize_with_strategy(DiscretePlan plan, const CorridorBuilder& corridor_builder,
                                       const RobotConfig& cfg,
                                       const std::vector<Vec>& initial_derivatives,
                                       Strategy strategy) {
    OptimizeOutcome out;
    // The corridor depends on the plan's geometry, not its durations, so the
    // temporal-rescaling retries reuse the one built from the fresh plan.
    CorridorResult corridor = corridor_builder(plan);
    if (!corridor.success) {
        out.failed_stage = PlanStage::corridor;
        out.failure_detail = corridor.error;
        out.attempt_log = "[corridor:" + corridor.error + "]";
        return out;
    }

    for (int attempt = 0; attempt <= cfg.max_rescale_attempts; ++attempt) {
        if (attempt > 0) {
            plan = temporal_rescale(plan, cfg.rescale_factor);
            out.rescales = attempt;
        }

        TrajectoryQp tqp =
            build_constraints(plan, corridor.corridor, cfg, initial_derivatives, ConstraintMode::hard);
        QpSolution sol = solve(tqp.qp);
        bool soft_this_attempt = false;
        out.attempt_log += std::string("[hard:") + to_string(sol.status);

        if (sol.status != QpStatus::optimal && strategy == Strategy::hard_soft) {
            tqp = build_constraints(plan, corridor.corridor, cfg, initial_derivatives,
                                    ConstraintMode::soft);
            sol = solve(tqp.qp);
            soft_this_attempt = true;
            out.attempt_log += std::string(" soft:") + to_string(sol.status);
        }
        if (sol.status != QpStatus::optimal) {
            out.failed_stage = PlanStage::optimization;
            out.failure_detail = std::string("qp ") + to_string(sol.status);
            out.attempt_log += "]";
            continue;
        }

        PiecewiseTrajectory traj = extract_trajectory(plan, cfg, sol.x.head(tqp.control_vars));
        ValidityReport report = validity_check(traj, cfg);
        if (!report.valid) {
            out.failed_stage = PlanStage::validity;
            out.failure_detail = "derivative bound exceeded";
            double worst = 0.0;
            for (int k = 1; k <= cfg.max_limited_order(); ++k)
                worst = std::max(worst, report.bounds[k - 1] / cfg.derivative_limits[k - 1]);
            char buf[40];
            std::snprintf(buf, sizeof buf, " validity:%.2f]", worst);
            out.attempt_log += buf;
            continue;
        }
        out.attempt_log += "]";

        out.success = true;
        out.trajectory = std::move(traj);
        out.soft_used = soft_this_attempt;
        out.max_slack = soft_this_attempt ? solution_max_slack(tqp, sol.x) : 0.0;
        return out;
    }
    return out;
}

IterationResult plan_iteration(const PlanContext& ctx, const OccupancyGrid& grid,
                               const std::vector<SensedRobot>& others, const PlanState& state,
                               double now, Strategy strategy) {
    const RobotConfig& cfg = ctx.cfg;
    IterationResult result;

    const Vec position = state.position_at(now);
    const std::vector<Vec> initial = state.derivatives_at(now, cfg.continuity);

    GoalSelection goal = select_goal(ctx.desired, grid, cfg.shape, cfg.workspace, position, now,
                                     cfg.horizon, cfg.replan_period / 4.0);

    std::vector<DynamicObstacle> dyn;
    dyn.reserve(others.size());
    for (const auto& other : others) dyn.push_back(DynamicObstacle{other.shape, other.position});

    // The pair midplanes bound both the search and the optimization; they
    // depend only on current shapes, so rescale attempts can reuse them.
    std::string pair_error;
    auto pair_planes = make_pair_planes(cfg.shape, position, dyn, cfg.robot_margin(), &pair_error);
    if (!pair_planes) {
        result.diag.failed_stage = PlanStage::corridor;
        result.diag.failure_detail = pair_error;
        return result;
    }
    std::vector<Hyperplane> keep_out;
    keep_out.reserve(pair_planes->size());
    for (const auto& ch : *pair_planes) keep_out.push_back(ch.plane);

    SearchResult search = discrete_search(
        position, goal.goal, *ctx.mask, cfg.shape, cfg.workspace, cfg.piece_count,
        goal.actual_horizon, cfg.replan_period, cfg.v_max(),
        cfg.search_avoids_robots ? dyn : std::vector<DynamicObstacle>{},
        cfg.search_avoids_robots ? keep_out : std::vector<Hyperplane>{});
    if (!search.success) {
        result.diag.failed_stage = PlanStage::discrete_search;
        result.diag.failure_detail = search.error;
        return result;
    }

    IterationDiagnostics& diag = result.diag;
    auto builder = [&](const DiscretePlan& p) {
        CorridorResult cr = build_corridor(p, cfg.shape, grid, *pair_planes, cfg.workspace,
                                           cfg.v_max(), cfg.obstacle_prune_padding);
        if (cr.success) {
            diag.skipped_planes = cr.skipped_piece1_planes;
            diag.obstacle_planes = 0;
            diag.robot_planes = 0;
            for (int j = 0; j < cr.corridor.num_pieces(); ++j) {
                diag.obstacle_planes += cr.corridor.count(j, HyperplaneKind::obstacle);
                diag.robot_planes += cr.corridor.count(j, HyperplaneKind::robot);
            }
        }
        return cr;
    };

    OptimizeOutcome opt = optimize_with_strategy(search.plan, builder, cfg, initial, strategy);
    diag.soft_used = opt.soft_used;
    diag.rescales = opt.rescales;
    diag.max_slack = opt.max_slack;
    diag.attempt_log = opt.attempt_log;
    if (!opt.success) {
        diag.failed_stage = opt.failed_stage;
        diag.failure_detail = opt.failure_detail;
        return result;
    }

    // Post-solve self-checks recorded for the trace: continuity against the
    // committed state and at junctions, and workspace membership of control
    // points (these stay hard in soft mode).
    double cont = 0.0;
    for (int k = 0; k <= cfg.continuity; ++k)
        cont = std::max(cont, (opt.trajectory.derivative(0.0, k) - initial[k]).norm());
    double at = 0.0;
    for (size_t j = 0; j + 1 < opt.trajectory.pieces.size(); ++j) {
        at += opt.trajectory.pieces[j].duration;
        for (int k = 0; k <= cfg.continuity; ++k) {
            Vec left = opt.trajectory.pieces[j].control_points.back();
            if (k > 0) {
                BezierPiece hodo = opt.trajectory.pieces[j];
                for (int i = 0; i < k; ++i) hodo = bezier_derivative(hodo);
                left = hodo.control_points.back();
            }
            Vec right = opt.trajectory.pieces[j + 1].control_points.front();
            if (k > 0) {
                BezierPiece hodo = opt.trajectory.pieces[j + 1];
                for (int i = 0; i < k; ++i) hodo = bezier_derivative(hodo);
                right = hodo.control_points.front();
            }
            cont = std::max(cont, (left - right).norm());
        }
    }
    diag.continuity_error = cont;

    double ws_violation = 0.0;
    for (const auto& piece : opt.trajectory.pieces)
        for (const auto& cp : piece.control_points)
            for (const auto& face : cfg.workspace.region.halfspaces) {
                Hyperplane buffered = buffer_hyperplane(face, cfg.shape);
                ws_violation = std::max(ws_violation, buffered.signed_distance(cp));
            }
    diag.workspace_violation = std::max(ws_violation, 0.0);

    ValidityReport final_report = validity_check(opt.trajectory, cfg);
    for (int k = 1; k <= cfg.max_limited_order(); ++k)
        diag.validity_ratio = std::max(diag.validity_ratio,
                                       final_report.bounds[k - 1] / cfg.derivative_limits[k - 1]);

    diag.success = true;
    result.success = true;
    result.trajectory = std::move(opt.trajectory);
    return result;
}

}  // namespace rlss
