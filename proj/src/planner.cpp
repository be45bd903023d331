#include "rlss/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace rlss {

Workspace Workspace::box(const Vec& lo, const Vec& hi) {
    const int d = static_cast<int>(lo.size());
    Workspace w;
    for (int a = 0; a < d; ++a) {
        Vec n = Vec::Zero(d);
        n(a) = 1.0;
        w.region.halfspaces.push_back(Hyperplane{n, -hi(a)});
        w.region.halfspaces.push_back(Hyperplane{-n, lo(a)});
    }
    return w;
}

bool Workspace::contains_point(const Vec& p, double tol) const {
    return polytope_contains(region, p, tol);
}

bool Workspace::contains_shape(const ConvexShape& shape, const Vec& p, double tol) const {
    for (const auto& h : region.halfspaces)
        if (h.normal.dot(p) + shape.support(h.normal) + h.offset > tol) return false;
    return true;
}

DesiredTrajectory DesiredTrajectory::from_waypoints(const std::vector<double>& times,
                                                    const std::vector<Vec>& points) {
    if (times.size() != points.size() || times.size() < 2)
        throw std::invalid_argument("DesiredTrajectory: need at least two timed waypoints");
    if (times.front() != 0.0) throw std::invalid_argument("DesiredTrajectory: first time must be 0");
    DesiredTrajectory out;
    for (size_t i = 0; i + 1 < times.size(); ++i) {
        double dur = times[i + 1] - times[i];
        if (dur <= 0.0) throw std::invalid_argument("DesiredTrajectory: times must increase");
        out.path.pieces.push_back(BezierPiece{dur, {points[i], points[i + 1]}});
    }
    return out;
}

double DiscretePlan::total_duration() const {
    double total = 0.0;
    for (double d : durations) total += d;
    return total;
}

double DiscretePlan::length() const {
    double total = 0.0;
    for (int j = 0; j + 1 < static_cast<int>(waypoints.size()); ++j)
        total += (waypoints[j + 1] - waypoints[j]).norm();
    return total;
}

GoalSelection select_goal(const DesiredTrajectory& desired, const OccupancyGrid& grid,
                          const ConvexShape& shape, const Workspace& workspace,
                          const Vec& current_position, double now, double tau, double resolution) {
    if (tau <= 0.0) throw std::invalid_argument("select_goal: tau must be positive");
    if (resolution <= 0.0) throw std::invalid_argument("select_goal: resolution must be positive");
    const int steps = static_cast<int>(std::ceil(tau / resolution));
    for (int k = 0; k <= steps; ++k) {
        double t = std::max(now, now + tau - k * resolution);
        Vec candidate = desired.at(t);
        if (workspace.contains_shape(shape, candidate) &&
            placement_clear_of_obstacles(grid, shape, candidate))
            return GoalSelection{candidate, t - now};
        if (t == now) break;
    }
    return GoalSelection{current_position, tau};
}

PlacementMask::PlacementMask(const OccupancyGrid& grid, const ConvexShape& shape,
                             const Workspace& workspace)
    : grid_(&grid) {
    blocked_.assign(grid.num_cells(), 0);
    for (long idx = 0; idx < grid.num_cells(); ++idx) {
        Eigen::VectorXi cell = grid.cell_of_index(idx);
        Vec center = grid.cell_center(cell);
        if (!workspace.contains_shape(shape, center) ||
            !placement_clear_of_obstacles(grid, shape, center))
            blocked_[idx] = 1;
    }
}

namespace {

constexpr double kZeroLength = 1e-12;
constexpr double kMinPieceDuration = 1e-6;

// Closed segment p->q against the box [lo, hi] (slab test).
bool segment_hits_box(const Vec& p, const Vec& q, const Vec& lo, const Vec& hi, double tol = 1e-9) {
    double t0 = 0.0, t1 = 1.0;
    for (int a = 0; a < p.size(); ++a) {
        double dir = q(a) - p(a);
        if (std::abs(dir) < 1e-15) {
            if (p(a) < lo(a) - tol || p(a) > hi(a) + tol) return false;
        } else {
            double ta = (lo(a) - tol - p(a)) / dir;
            double tb = (hi(a) + tol - p(a)) / dir;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
    }
    return true;
}

// Robots legitimately ride their shared separating planes in surface contact;
// grazing a dynamic obstacle must not block the search, only penetration does.
constexpr double kGrazeTol = -1e-9;

bool dynamic_overlap(const ConvexShape& shape, const Vec& p, const DynamicObstacle& obs) {
    Vec lo, hi, olo, ohi;
    shape.aabb_at(p, lo, hi);
    obs.shape.aabb_at(obs.position, olo, ohi);
    if (!boxes_intersect(lo, hi, olo, ohi, kGrazeTol)) return false;
    if (shape.is_box && obs.shape.is_box) return true;
    return convex_sets_intersect(shape.vertices_at(p), obs.shape.vertices_at(obs.position), 0.0);
}

// Free-space test for the volume swept between two placements of the shape.
// A box shape swept along a segment is the Minkowski sum of segment and box,
// so box-vs-box sweeps reduce to a segment test against an expanded box.
bool sweep_free(const OccupancyGrid& grid, const ConvexShape& shape, const Vec& from, const Vec& to,
                const std::vector<DynamicObstacle>& dyn) {
    Vec lo_f, hi_f, lo_t, hi_t;
    shape.aabb_at(from, lo_f, hi_f);
    shape.aabb_at(to, lo_t, hi_t);
    Vec lo = lo_f.cwiseMin(lo_t), hi = hi_f.cwiseMax(hi_t);

    Eigen::MatrixXd hull;
    if (!shape.is_box) hull = segment_swept_hull(from, to, shape);

    bool hit = false;
    grid.for_each_occupied_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        if (hit) return;
        Vec clo, chi;
        grid.cell_bounds(cell, clo, chi);
        if (!boxes_intersect(lo, hi, clo, chi)) return;
        if (shape.is_box)
            hit = segment_hits_box(from, to, clo - shape.box_half_extents,
                                   chi + shape.box_half_extents);
        else
            hit = convex_sets_intersect(hull, box_corners(clo, chi));
    });
    if (hit) return false;

    for (const auto& obs : dyn) {
        Vec olo, ohi;
        obs.shape.aabb_at(obs.position, olo, ohi);
        if (!boxes_intersect(lo, hi, olo, ohi, kGrazeTol)) continue;
        if (shape.is_box && obs.shape.is_box) {
            if (segment_hits_box(from, to, olo - shape.box_half_extents,
                                 ohi + shape.box_half_extents, kGrazeTol))
                return false;
            continue;
        }
        if (hull.size() == 0) hull = segment_swept_hull(from, to, shape);
        if (convex_sets_intersect(hull, obs.shape.vertices_at(obs.position), 0.0)) return false;
    }
    return true;
}

struct AStarEntry {
    double f;
    double h;
    long idx;
    bool operator>(const AStarEntry& o) const {
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        return idx > o.idx;
    }
};

DiscretePlan resize_to_segments(std::vector<Vec> waypoints, int L) {
    // Collapse consecutive duplicates first.
    std::vector<Vec> w;
    for (const auto& p : waypoints)
        if (w.empty() || (p - w.back()).norm() > kZeroLength) w.push_back(p);
    if (w.size() == 1) w.assign(static_cast<size_t>(L) + 1, w.front());

    if (static_cast<int>(w.size()) - 1 > L) w.resize(static_cast<size_t>(L) + 1);

    while (static_cast<int>(w.size()) - 1 < L) {
        int longest = 0;
        double best = -1.0;
        for (int j = 0; j + 1 < static_cast<int>(w.size()); ++j) {
            double len = (w[j + 1] - w[j]).norm();
            if (len > best + kZeroLength) {
                best = len;
                longest = j;
            }
        }
        if (best <= kZeroLength) {
            w.push_back(w.back());
        } else {
            Vec mid = 0.5 * (w[longest] + w[longest + 1]);
            w.insert(w.begin() + longest + 1, mid);
        }
    }

    DiscretePlan plan;
    plan.waypoints = std::move(w);
    plan.durations.assign(L, 0.0);
    return plan;
}

void assign_durations(DiscretePlan& plan, double tau_actual, double dt, double v_max) {
    const int L = plan.num_segments();
    double total_len = plan.length();
    double T = std::max({tau_actual, total_len / v_max, dt});

    int zeros = 0;
    for (int j = 0; j < L; ++j)
        if (plan.segment_length(j) <= kZeroLength) ++zeros;

    if (zeros == L) {
        std::fill(plan.durations.begin(), plan.durations.end(), T / L);
    } else {
        double zero_share = T / (10.0 * L);
        double remaining = T - zeros * zero_share;
        for (int j = 0; j < L; ++j) {
            double len = plan.segment_length(j);
            plan.durations[j] = len <= kZeroLength ? zero_share : remaining * len / total_len;
        }
    }

    // The committed window [0, dt] should live inside the first piece.
    if (plan.durations[0] < dt && L > 1) {
        double rest_new = T - dt;
        double rest_old = T - plan.durations[0];
        plan.durations[0] = dt;
        if (rest_new < (L - 1) * kMinPieceDuration) {
            for (int j = 1; j < L; ++j) plan.durations[j] = kMinPieceDuration;
        } else {
            for (int j = 1; j < L; ++j) plan.durations[j] *= rest_new / rest_old;
        }
    } else if (L == 1 && plan.durations[0] < dt) {
        plan.durations[0] = dt;
    }
}

}  // namespace

SearchResult discrete_search(const Vec& start, const Vec& goal, const PlacementMask& mask,
                             const ConvexShape& shape, const Workspace& workspace, int L,
                             double tau_actual, double dt, double v_max,
                             const std::vector<DynamicObstacle>& extra_obstacles,
                             const std::vector<Hyperplane>& keep_out) {
    if (L < 1) throw std::invalid_argument("discrete_search: L must be >= 1");
    if (v_max <= 0.0) throw std::invalid_argument("discrete_search: v_max must be positive");
    const OccupancyGrid& grid = mask.grid();
    const int d = grid.dimension();

    SearchResult result;
    Eigen::VectorXi start_cell = grid.cell_at(start);
    if (!grid.in_bounds(start_cell)) {
        result.error = "start outside grid";
        return result;
    }
    if (mask.blocked(start_cell)) {
        result.error = "start cell blocked";
        return result;
    }
    const long start_idx = grid.index_of(start_cell);

    // Other robots' shapes block placements, except at the start cell so the
    // robot can always leave its own neighborhood. Keep-out half-spaces are
    // soft in the search (detours around a crowd beat pushing into it) and
    // the found path is clipped to them afterwards so the optimizer's
    // separation constraints stay satisfiable.
    auto beyond_keep_out = [&](const Vec& center) {
        for (const auto& h : keep_out)
            if (h.signed_distance(center) > 1e-9) return true;
        return false;
    };
    constexpr double kKeepOutCost = 5.0;
    std::unordered_set<long> dyn_blocked;
    for (const auto& obs : extra_obstacles) {
        Vec olo, ohi;
        obs.shape.aabb_at(obs.position, olo, ohi);
        Vec slo = shape.vertices.rowwise().minCoeff(), shi = shape.vertices.rowwise().maxCoeff();
        Vec lo = olo - shi, hi = ohi - slo;  // centers whose placement can reach the obstacle
        grid.for_each_cell_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
            long idx = grid.index_of(cell);
            if (dyn_blocked.count(idx)) return;
            if (dynamic_overlap(shape, grid.cell_center(cell), obs)) dyn_blocked.insert(idx);
        });
    }
    dyn_blocked.erase(start_idx);

    Eigen::VectorXi goal_cell = grid.cell_at(goal);
    for (int a = 0; a < d; ++a) goal_cell(a) = std::clamp(goal_cell(a), 0, grid.dims()(a) - 1);
    const long goal_idx = grid.index_of(goal_cell);
    const Vec goal_center = grid.cell_center(goal_cell);

    auto heuristic = [&](const Eigen::VectorXi& cell) {
        return (grid.cell_center(cell) - goal_center).norm();
    };

    std::vector<double> g(grid.num_cells(), std::numeric_limits<double>::infinity());
    std::vector<long> parent(grid.num_cells(), -1);
    std::vector<std::uint8_t> closed(grid.num_cells(), 0);
    std::priority_queue<AStarEntry, std::vector<AStarEntry>, std::greater<AStarEntry>> open;

    g[start_idx] = 0.0;
    open.push({heuristic(start_cell), heuristic(start_cell), start_idx});

    long best_idx = start_idx;
    double best_h = heuristic(start_cell);
    bool reached = false;

    while (!open.empty()) {
        AStarEntry top = open.top();
        open.pop();
        if (closed[top.idx]) continue;
        closed[top.idx] = 1;
        Eigen::VectorXi cell = grid.cell_of_index(top.idx);
        if (top.h < best_h || (top.h == best_h && top.idx < best_idx)) {
            best_h = top.h;
            best_idx = top.idx;
        }
        if (top.idx == goal_idx) {
            reached = true;
            break;
        }
        Vec center = grid.cell_center(cell);
        for (int a = 0; a < d; ++a) {
            for (int dir : {-1, 1}) {
                Eigen::VectorXi nb = cell;
                nb(a) += dir;
                if (!grid.in_bounds(nb)) continue;
                long nb_idx = grid.index_of(nb);
                if (closed[nb_idx] || mask.blocked(nb) || dyn_blocked.count(nb_idx)) continue;
                double cost = g[top.idx] + grid.cell_size()(a);
                if (cost >= g[nb_idx]) continue;
                if (!keep_out.empty() && beyond_keep_out(grid.cell_center(nb))) continue;
                if (!sweep_free(grid, shape, center, grid.cell_center(nb), extra_obstacles)) continue;
                g[nb_idx] = cost;
                parent[nb_idx] = top.idx;
                double h = heuristic(nb);
                open.push({cost + h, h, nb_idx});
            }
        }
    }

    std::vector<long> cell_path;
    for (long idx = best_idx; idx != -1; idx = parent[idx]) cell_path.push_back(idx);
    std::reverse(cell_path.begin(), cell_path.end());
    result.reached_goal = reached;
    for (long idx : cell_path) result.raw_cells.push_back(grid.cell_of_index(idx));

    // The start cell's own center is skipped: hopping back to it from an
    // off-center start is a pointless jog and may cross a nearby robot.
    std::vector<Vec> waypoints;
    waypoints.push_back(start);
    for (size_t ci = 1; ci < cell_path.size(); ++ci)
        waypoints.push_back(grid.cell_center(grid.cell_of_index(cell_path[ci])));

    if (waypoints.size() > 1 && (waypoints[1] - waypoints[0]).norm() > kZeroLength &&
        !sweep_free(grid, shape, waypoints[0], waypoints[1], extra_obstacles)) {
        result.error = "swept hull from start is blocked";
        return result;
    }

    if (reached && (goal - waypoints.back()).norm() > kZeroLength &&
        workspace.contains_shape(shape, goal) && !beyond_keep_out(goal) &&
        sweep_free(grid, shape, waypoints.back(), goal, extra_obstacles))
        waypoints.push_back(goal);

    // Greedy shortcutting: jump as far ahead as the swept hull stays free.
    std::vector<Vec> shortcut;
    size_t i = 0;
    shortcut.push_back(waypoints[0]);
    while (i + 1 < waypoints.size()) {
        size_t next = i + 1;
        for (size_t j = waypoints.size() - 1; j > i + 1; --j) {
            if (sweep_free(grid, shape, waypoints[i], waypoints[j], extra_obstacles)) {
                next = j;
                break;
            }
        }
        shortcut.push_back(waypoints[next]);
        i = next;
    }

    result.plan = resize_to_segments(std::move(shortcut), L);
    assign_durations(result.plan, tau_actual, dt, v_max);
    result.success = true;
    return result;
}

SearchResult discrete_search(const Vec& start, const Vec& goal, const OccupancyGrid& grid,
                             const ConvexShape& shape, const Workspace& workspace, int L,
                             double tau_actual, double dt, double v_max,
                             const std::vector<DynamicObstacle>& extra_obstacles,
                             const std::vector<Hyperplane>& keep_out) {
    PlacementMask mask(grid, shape, workspace);
    return discrete_search(start, goal, mask, shape, workspace, L, tau_actual, dt, v_max,
                           extra_obstacles, keep_out);
}

}  // namespace rlss
