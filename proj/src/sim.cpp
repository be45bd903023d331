#include "rlss/sim.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rlss {

namespace {

// Robots riding a shared separating plane can sit in exact surface contact;
// only penetrations deeper than this count as collisions.
constexpr double kPenetrationTol = 1e-6;

Eigen::MatrixXd shrunk_vertices(const ConvexShape& shape, const Vec& p, double eps) {
    Eigen::MatrixXd verts = shape.vertices_at(p);
    Vec center = verts.rowwise().mean();
    double radius = 0.0;
    for (int i = 0; i < verts.cols(); ++i)
        radius = std::max(radius, (verts.col(i) - center).norm());
    if (radius <= eps) return center;
    double scale = 1.0 - eps / radius;
    return (verts.colwise() - center) * scale + center.replicate(1, verts.cols());
}

bool shapes_penetrate(const ConvexShape& a, const Vec& pa, const ConvexShape& b, const Vec& pb) {
    Vec lo_a, hi_a, lo_b, hi_b;
    a.aabb_at(pa, lo_a, hi_a);
    b.aabb_at(pb, lo_b, hi_b);
    if (!boxes_intersect(lo_a, hi_a, lo_b, hi_b, -kPenetrationTol)) return false;
    if (a.is_box && b.is_box) return true;
    return convex_sets_intersect(shrunk_vertices(a, pa, kPenetrationTol / 2),
                                 shrunk_vertices(b, pb, kPenetrationTol / 2), 1e-12);
}

int count_occupied_overlaps(const OccupancyGrid& grid, const ConvexShape& shape, const Vec& p) {
    Vec lo, hi;
    shape.aabb_at(p, lo, hi);
    int hits = 0;
    grid.for_each_occupied_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        Vec clo, chi;
        grid.cell_bounds(cell, clo, chi);
        if (!boxes_intersect(lo, hi, clo, chi, -kPenetrationTol)) return;
        if (shape.is_box || convex_sets_intersect(shrunk_vertices(shape, p, kPenetrationTol / 2),
                                                  box_corners(clo, chi), 1e-12))
            ++hits;
    });
    return hits;
}

double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

double Scenario::timestep() const {
    if (robots.empty()) throw std::invalid_argument("Scenario: no robots");
    double dt = robots.front().cfg.replan_period;
    for (const auto& r : robots)
        if (r.cfg.replan_period != dt)
            throw std::invalid_argument("Scenario: robots must share one replanning period");
    return dt;
}

const IterationRecord& Trace::record_for_sample(int sample, int robot) const {
    int u = static_cast<int>(std::floor(sample_times[sample] / timestep + 1e-9));
    u = std::min(u, static_cast<int>(iterations.size()) - 1);
    return iterations[u][robot];
}

RunOutput run(const Scenario& scn) {
    const int n = static_cast<int>(scn.robots.size());
    if (n == 0) throw std::invalid_argument("run: scenario has no robots");
    const double dt = scn.timestep();
    const int max_steps = static_cast<int>(std::ceil(scn.duration_cap / dt - 1e-9));

    std::vector<PlanContext> contexts;
    std::vector<PlanState> states;
    contexts.reserve(n);
    for (const auto& r : scn.robots) {
        contexts.push_back(PlanContext::make(r.cfg, r.desired, scn.grid));
        states.push_back(PlanState::at_rest(r.start));
    }

    RunOutput out;
    Trace& trace = out.trace;
    trace.dimension = scn.dimension;
    trace.num_robots = n;
    trace.sample_period = scn.trace_period;
    trace.timestep = dt;

    std::mt19937_64 noise_rng(scn.noise_seed);

    long sample_index = 0;
    bool completed = false;
    int step = 0;
    for (; step < max_steps; ++step) {
        const double now = step * dt;

        // Shared sensing snapshot.
        std::vector<Vec> positions(n);
        for (int i = 0; i < n; ++i) positions[i] = states[i].position_at(now);
        std::vector<Vec> sensed = positions;
        if (scn.sensing_noise > 0.0)
            for (auto& p : sensed)
                for (int a = 0; a < p.size(); ++a)
                    p(a) += scn.sensing_noise * uniform_pm1(noise_rng);

        std::vector<IterationRecord> records(n);
        std::vector<PlanState> next = states;
        for (int i = 0; i < n; ++i) {
            std::vector<SensedRobot> others;
            others.reserve(n - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if (scn.sensing_range > 0.0 &&
                    (positions[j] - positions[i]).norm() > scn.sensing_range)
                    continue;
                others.push_back(SensedRobot{scn.robots[j].cfg.shape, sensed[j]});
            }
            auto t0 = std::chrono::steady_clock::now();
            IterationResult res =
                plan_iteration(contexts[i], scn.grid, others, states[i], now, scn.strategy);
            auto t1 = std::chrono::steady_clock::now();

            IterationRecord& rec = records[i];
            rec.compute_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            rec.success = res.success;
            rec.failed_stage = res.diag.failed_stage;
            rec.soft_used = res.diag.soft_used;
            rec.rescales = res.diag.rescales;
            rec.continuity_error = res.diag.continuity_error;
            rec.workspace_violation = res.diag.workspace_violation;
            rec.max_slack = res.diag.max_slack;
            rec.skipped_planes = res.diag.skipped_planes;
            rec.validity_ratio = res.diag.validity_ratio;
            if (res.success) next[i] = PlanState{std::move(res.trajectory), now};
        }
        states = std::move(next);  // simultaneous commit
        trace.iterations.push_back(std::move(records));

        // Sample executed positions over [now, now + dt).
        while (sample_index * scn.trace_period < now + dt - 1e-12) {
            double t = sample_index * scn.trace_period;
            trace.sample_times.push_back(t);
            std::vector<Vec> row(n);
            for (int i = 0; i < n; ++i)
                row[i] = states[i].committed.eval_clamped(t - states[i].commit_time);
            trace.positions.push_back(std::move(row));
            ++sample_index;
        }

        const double boundary = (step + 1) * dt;
        bool all_at_goal = true;
        for (int i = 0; i < n && all_at_goal; ++i)
            all_at_goal = (states[i].position_at(boundary) - scn.robots[i].desired.endpoint()).norm() <=
                          scn.goal_tolerance;
        if (all_at_goal) {
            completed = true;
            trace.end_time = boundary;
            break;
        }
    }
    if (!completed) trace.end_time = max_steps * dt;
    trace.hit_cap = !completed;

    // Metrics.
    RunMetrics& m = out.metrics;
    m.completed = completed;
    m.end_time = trace.end_time;
    std::vector<ConvexShape> shapes;
    std::vector<Vec> endpoints;
    for (const auto& r : scn.robots) {
        shapes.push_back(r.cfg.shape);
        endpoints.push_back(r.desired.endpoint());
    }
    m.collisions = count_collisions(trace, shapes, scn.grid);
    m.deadlocked = detect_deadlock(trace, endpoints, scn.deadlock_window, scn.deadlock_eps,
                                   scn.goal_tolerance);
    for (bool d : m.deadlocked) m.deadlocks += d ? 1 : 0;
    m.total_distance = total_distance(trace);

    m.goal_reached.resize(n);
    for (int i = 0; i < n; ++i)
        m.goal_reached[i] =
            (states[i].position_at(trace.end_time) - endpoints[i]).norm() <= scn.goal_tolerance;

    m.per_robot_max_ms.assign(n, 0.0);
    m.per_robot_avg_ms.assign(n, 0.0);
    long total_iters = 0;
    double total_ms = 0.0;
    for (const auto& row : trace.iterations)
        for (int i = 0; i < n; ++i) {
            const auto& rec = row[i];
            m.per_robot_max_ms[i] = std::max(m.per_robot_max_ms[i], rec.compute_ms);
            m.per_robot_avg_ms[i] += rec.compute_ms;
            m.compute_max_ms = std::max(m.compute_max_ms, rec.compute_ms);
            total_ms += rec.compute_ms;
            ++total_iters;
            if (!rec.success) ++m.failed_iterations;
            if (rec.soft_used) ++m.soft_iterations;
            m.total_rescales += rec.rescales;
            m.max_continuity_error = std::max(m.max_continuity_error, rec.continuity_error);
            m.max_workspace_violation = std::max(m.max_workspace_violation, rec.workspace_violation);
            m.max_validity_ratio = std::max(m.max_validity_ratio, rec.validity_ratio);
        }
    if (!trace.iterations.empty())
        for (int i = 0; i < n; ++i) m.per_robot_avg_ms[i] /= static_cast<double>(trace.iterations.size());
    if (total_iters > 0) m.compute_avg_ms = total_ms / static_cast<double>(total_iters);

    return out;
}

int count_collisions(const Trace& trace, const std::vector<ConvexShape>& shapes,
                     const OccupancyGrid& grid) {
    const int n = trace.num_robots;
    int collisions = 0;
    for (size_t k = 0; k < trace.sample_times.size(); ++k) {
        const auto& row = trace.positions[k];
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j)
                if (shapes_penetrate(shapes[i], row[i], shapes[j], row[j])) ++collisions;
            collisions += count_occupied_overlaps(grid, shapes[i], row[i]);
        }
    }
    return collisions;
}

std::vector<bool> detect_deadlock(const Trace& trace, const std::vector<Vec>& desired_endpoints,
                                  double window, double eps, double goal_tol) {
    if (window <= 0.0) throw std::invalid_argument("detect_deadlock: window must be positive");
    const int n = trace.num_robots;
    std::vector<bool> flags(n, false);
    if (!trace.hit_cap || trace.sample_times.empty()) return flags;
    size_t last = trace.sample_times.size() - 1;
    double window_start = std::max(0.0, trace.sample_times[last] - window);
    size_t first = 0;
    while (first < last && trace.sample_times[first] < window_start - 1e-12) ++first;
    for (int i = 0; i < n; ++i) {
        bool away = (trace.positions[last][i] - desired_endpoints[i]).norm() > goal_tol;
        bool stuck = (trace.positions[last][i] - trace.positions[first][i]).norm() < eps;
        flags[i] = away && stuck;
    }
    return flags;
}

double total_distance(const Trace& trace) {
    double dist = 0.0;
    for (size_t k = 1; k < trace.sample_times.size(); ++k)
        for (int i = 0; i < trace.num_robots; ++i)
            dist += (trace.positions[k][i] - trace.positions[k - 1][i]).norm();
    return dist;
}

}  // namespace rlss
