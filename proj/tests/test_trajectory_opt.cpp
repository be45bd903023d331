#include "rlss/rlss.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace rlss;

namespace {

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

RobotConfig config_2d(int pieces, int degree, int continuity) {
    RobotConfig cfg = RobotConfig::defaults(2);
    cfg.piece_count = pieces;
    cfg.degrees.assign(pieces, degree);
    cfg.deviation_weights.assign(pieces, 1.0);
    cfg.deviation_weights.back() = 100.0;
    cfg.continuity = continuity;
    cfg.workspace = Workspace::box(Vec::Constant(2, -10.0), Vec::Constant(2, 10.0));
    return cfg;
}

SafeCorridor workspace_only_corridor(const RobotConfig& cfg) {
    SafeCorridor corridor;
    corridor.pieces.resize(cfg.piece_count);
    for (int j = 0; j < cfg.piece_count; ++j)
        for (const auto& face : cfg.workspace.region.halfspaces) {
            CorridorHyperplane ch;
            ch.raw = face.normalized();
            ch.plane = buffer_hyperplane(ch.raw, cfg.shape);
            ch.kind = HyperplaneKind::workspace;
            corridor.pieces[j].push_back(ch);
        }
    return corridor;
}

DiscretePlan plan_of(const std::vector<Vec>& waypoints, std::vector<double> durations) {
    DiscretePlan plan;
    plan.waypoints = waypoints;
    plan.durations = std::move(durations);
    return plan;
}

std::vector<Vec> rest_state(const Vec& p, int c) {
    std::vector<Vec> derivs(c + 1, Vec::Zero(p.size()));
    derivs[0] = p;
    return derivs;
}

double quadratic_energy(const QuadraticObjective& obj, const DiscretePlan& plan,
                        const RobotConfig& cfg, const std::vector<Vec>& control_points) {
    const int d = 2;
    Eigen::VectorXd x(static_cast<int>(control_points.size()) * d);
    for (size_t i = 0; i < control_points.size(); ++i) x.segment(i * d, d) = control_points[i];
    (void)plan;
    (void)cfg;
    return 0.5 * x.dot(obj.Q * x) + obj.q.dot(x);
}

}  // namespace

TEST_CASE("bernstein gram matrix matches the closed forms") {
    Eigen::MatrixXd g0 = bernstein_gram(0, 2.0);
    CHECK(g0(0, 0) == doctest::Approx(2.0));
    Eigen::MatrixXd g1 = bernstein_gram(1, 3.0);
    CHECK(g1(0, 0) == doctest::Approx(1.0));       // T/3
    CHECK(g1(0, 1) == doctest::Approx(0.5));       // T/6
    CHECK(g1(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("energy of a straight unit-speed line is length^2 / T") {
    RobotConfig cfg = config_2d(1, 1, 0);
    cfg.energy_weights = {1.0};
    cfg.deviation_weights = {0.0};
    DiscretePlan plan = plan_of({vec2(0, 0), vec2(1, 0)}, {1.0});
    QuadraticObjective obj = build_objective(plan, cfg);
    double energy = quadratic_energy(obj, plan, cfg, {vec2(0, 0), vec2(1, 0)});
    CHECK(energy == doctest::Approx(1.0));
}

TEST_CASE("energy of a stationary curve is zero") {
    RobotConfig cfg = config_2d(1, 3, 0);
    cfg.energy_weights = {1.0, 1.0};
    cfg.deviation_weights = {0.0};
    DiscretePlan plan = plan_of({vec2(2, 2), vec2(2, 2)}, {1.5});
    QuadraticObjective obj = build_objective(plan, cfg);
    std::vector<Vec> pts(4, vec2(2, 2));
    CHECK(quadratic_energy(obj, plan, cfg, pts) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("quadratic-form energy matches Simpson quadrature of the hodograph") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        int degree = 3 + static_cast<int>(oracles::uniform(rng, 0.0, 3.999));
        double T = oracles::uniform(rng, 0.5, 2.5);
        int order = 1 + static_cast<int>(oracles::uniform(rng, 0.0, 2.999));
        if (order > degree) order = degree;

        RobotConfig cfg = config_2d(1, degree, 0);
        cfg.energy_weights.assign(order, 0.0);
        cfg.energy_weights[order - 1] = 1.0;
        cfg.deviation_weights = {0.0};

        std::vector<Vec> pts;
        BezierPiece piece;
        piece.duration = T;
        for (int k = 0; k <= degree; ++k) {
            pts.push_back(oracles::random_vec(rng, 2, -3.0, 3.0));
            piece.control_points.push_back(pts.back());
        }
        DiscretePlan plan = plan_of({pts.front(), pts.back()}, {T});
        QuadraticObjective obj = build_objective(plan, cfg);
        double closed_form = quadratic_energy(obj, plan, cfg, pts);

        BezierPiece hodo = piece;
        for (int k = 0; k < order; ++k) hodo = bezier_derivative(hodo);
        double quad = oracles::simpson(
            [&](double t) { return bezier_eval(hodo, std::min(t, T)).squaredNorm(); }, T, 2000);
        CHECK(closed_form == doctest::Approx(quad).epsilon(1e-6));
    }
}

TEST_CASE("hard constraints pin the initial state exactly") {
    RobotConfig cfg = config_2d(1, 3, 0);
    SafeCorridor corridor = workspace_only_corridor(cfg);
    DiscretePlan plan = plan_of({vec2(0.3, -0.2), vec2(1, 1)}, {1.0});
    TrajectoryQp tqp =
        build_constraints(plan, corridor, cfg, rest_state(vec2(0.3, -0.2), 0), ConstraintMode::hard);
    QpSolution sol = solve(tqp.qp);
    REQUIRE(sol.status == QpStatus::optimal);
    PiecewiseTrajectory traj = extract_trajectory(plan, cfg, sol.x.head(tqp.control_vars));
    CHECK(traj.pieces[0].control_points[0](0) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(traj.pieces[0].control_points[0](1) == doctest::Approx(-0.2).epsilon(1e-9));
}

TEST_CASE("large final deviation weight drives the endpoint to the goal") {
    RobotConfig cfg = config_2d(2, 4, 1);
    cfg.deviation_weights = {0.0, 1e6};
    SafeCorridor corridor = workspace_only_corridor(cfg);
    Vec goal = vec2(2, 1);
    DiscretePlan plan = plan_of({vec2(0, 0), vec2(1, 0.5), goal}, {1.0, 1.0});
    TrajectoryQp tqp =
        build_constraints(plan, corridor, cfg, rest_state(vec2(0, 0), 1), ConstraintMode::hard);
    QpSolution sol = solve(tqp.qp);
    REQUIRE(sol.status == QpStatus::optimal);
    PiecewiseTrajectory traj = extract_trajectory(plan, cfg, sol.x.head(tqp.control_vars));
    CHECK((traj.eval(traj.total_duration()) - goal).norm() <= 1e-3);
}

TEST_CASE("junction continuity holds to order c") {
    RobotConfig cfg = config_2d(2, 5, 2);
    SafeCorridor corridor = workspace_only_corridor(cfg);
    DiscretePlan plan = plan_of({vec2(0, 0), vec2(1.5, 0.5), vec2(2, 2)}, {0.8, 1.3});
    std::vector<Vec> initial = rest_state(vec2(0, 0), 2);
    initial[1] = vec2(0.5, 0.0);  // start while moving
    TrajectoryQp tqp = build_constraints(plan, corridor, cfg, initial, ConstraintMode::hard);
    QpSolution sol = solve(tqp.qp);
    REQUIRE(sol.status == QpStatus::optimal);
    PiecewiseTrajectory traj = extract_trajectory(plan, cfg, sol.x.head(tqp.control_vars));

    double junction = plan.durations[0];
    for (int k = 0; k <= 2; ++k) {
        BezierPiece left = traj.pieces[0], right = traj.pieces[1];
        for (int i = 0; i < k; ++i) {
            left = bezier_derivative(left);
            right = bezier_derivative(right);
        }
        Vec l = bezier_eval(left, traj.pieces[0].duration);
        Vec r = bezier_eval(right, 0.0);
        CHECK((l - r).norm() <= 1e-6);
    }
    for (int k = 0; k <= 2; ++k)
        CHECK((traj.derivative(0.0, k) - initial[k]).norm() <= 1e-6);
    CHECK(junction > 0.0);
}

TEST_CASE("soft mode recovers from a hard-infeasible corridor and keeps hard parts hard") {
    RobotConfig cfg = config_2d(2, 3, 1);
    cfg.soft_weight = 1e4;
    // Disjoint slabs: piece 1 must stay x <= 0.4, piece 2 must stay x >= 0.6;
    // the shared junction control point cannot satisfy both.
    SafeCorridor corridor = workspace_only_corridor(cfg);
    CorridorHyperplane left, right;
    left.raw = Hyperplane{vec2(1, 0), -0.4};
    left.plane = left.raw;
    left.kind = HyperplaneKind::obstacle;
    right.raw = Hyperplane{vec2(-1, 0), 0.6};
    right.plane = right.raw;
    right.kind = HyperplaneKind::obstacle;
    corridor.pieces[0].push_back(left);
    corridor.pieces[1].push_back(right);

    DiscretePlan plan = plan_of({vec2(0, 0), vec2(0.4, 0), vec2(1.2, 0)}, {1.0, 1.0});
    std::vector<Vec> initial = rest_state(vec2(0, 0), 1);

    TrajectoryQp hard = build_constraints(plan, corridor, cfg, initial, ConstraintMode::hard);
    CHECK(solve(hard.qp).status == QpStatus::infeasible);

    TrajectoryQp soft = build_constraints(plan, corridor, cfg, initial, ConstraintMode::soft);
    QpSolution sol = solve(soft.qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(soft.slack_vars == 2);  // one slack per soft half-space, not per control point
    PiecewiseTrajectory traj = extract_trajectory(plan, cfg, sol.x.head(soft.control_vars));

    // Continuity stays exact.
    for (int k = 0; k <= 1; ++k) {
        BezierPiece l = traj.pieces[0], r = traj.pieces[1];
        for (int i = 0; i < k; ++i) {
            l = bezier_derivative(l);
            r = bezier_derivative(r);
        }
        CHECK((bezier_eval(l, l.duration) - bezier_eval(r, 0.0)).norm() <= 1e-6);
        CHECK((traj.derivative(0.0, k) - initial[k]).norm() <= 1e-6);
    }
    // Workspace stays hard.
    for (const auto& piece : traj.pieces)
        for (const auto& cp : piece.control_points) CHECK(cfg.workspace.contains_point(cp, 1e-6));
    // And the soft planes were actually relaxed.
    double max_slack = sol.x.tail(soft.slack_vars).maxCoeff();
    CHECK(max_slack > 1e-3);
}
