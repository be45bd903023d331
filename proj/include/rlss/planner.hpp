#pragma once

#include "rlss/geometry.hpp"
#include "rlss/occupancy_grid.hpp"

#include <string>
#include <unordered_set>
#include <vector>

namespace rlss {

// Convex region the robot must stay inside.
struct Workspace {
    ConvexPolytope region;

    static Workspace box(const Vec& lo, const Vec& hi);
    bool contains_point(const Vec& p, double tol = kFeasEps) const;
    bool contains_shape(const ConvexShape& shape, const Vec& p, double tol = kFeasEps) const;
};

// Reference trajectory the robot should follow; need not be collision-free or
// feasible. Defined for all t >= 0 by clamping.
struct DesiredTrajectory {
    PiecewiseTrajectory path;

    static DesiredTrajectory from_waypoints(const std::vector<double>& times,
                                            const std::vector<Vec>& points);
    double duration() const { return path.total_duration(); }
    Vec at(double t) const { return path.eval_clamped(t); }
    Vec endpoint() const { return path.eval(path.total_duration()); }
};

// Chained path segments with per-segment durations; segment j runs from
// waypoints[j] to waypoints[j+1].
struct DiscretePlan {
    std::vector<Vec> waypoints;
    std::vector<double> durations;

    int num_segments() const { return static_cast<int>(durations.size()); }
    double total_duration() const;
    double length() const;
    const Vec& segment_start(int j) const { return waypoints[j]; }
    const Vec& segment_end(int j) const { return waypoints[j + 1]; }
    double segment_length(int j) const { return (waypoints[j + 1] - waypoints[j]).norm(); }
};

struct GoalSelection {
    Vec goal;
    double actual_horizon = 0.0;
};

// Latest point on the desired trajectory within [now, now + tau] (scanned
// backward at the given resolution) where the robot shape fits: no grid
// obstacle overlap and inside the workspace. Falls back to a stand-still goal
// at current_position with horizon tau when no sample is valid.
GoalSelection select_goal(const DesiredTrajectory& desired, const OccupancyGrid& grid,
                          const ConvexShape& shape, const Workspace& workspace,
                          const Vec& current_position, double now, double tau, double resolution);

// Cell-center placement validity mask for one shape on one grid, precomputed
// so repeated searches share the inflation work.
class PlacementMask {
  public:
    PlacementMask(const OccupancyGrid& grid, const ConvexShape& shape, const Workspace& workspace);
    bool blocked(const Eigen::VectorXi& cell) const { return blocked_[grid_->index_of(cell)] != 0; }
    const OccupancyGrid& grid() const { return *grid_; }

  private:
    const OccupancyGrid* grid_;
    std::vector<std::uint8_t> blocked_;
};

// Convex shapes at fixed positions treated as additional obstacles for one
// search (other robots' sensed shapes).
struct DynamicObstacle {
    ConvexShape shape;
    Vec position;
};

struct SearchResult {
    bool success = false;
    DiscretePlan plan;
    std::vector<Eigen::VectorXi> raw_cells;  // A* cell path before shortcutting
    bool reached_goal = false;
    std::string error;
};

// Best-effort shortest path on the inflated grid graph (axis-connected A*,
// deterministic tie-breaking), greedy-shortcut, resized to exactly L segments
// with durations proportional to segment lengths. When the goal is
// unreachable the path heads to the expanded cell closest to the goal.
// keep_out half-spaces (reference-point space, e.g. buffered robot-pair
// midplanes) block every placement beyond them except the start cell, keeping
// plans consistent with the trajectory optimizer's separation constraints.
SearchResult discrete_search(const Vec& start, const Vec& goal, const PlacementMask& mask,
                             const ConvexShape& shape, const Workspace& workspace, int L,
                             double tau_actual, double dt, double v_max,
                             const std::vector<DynamicObstacle>& extra_obstacles = {},
                             const std::vector<Hyperplane>& keep_out = {});

// Convenience overload building the placement mask on the fly.
SearchResult discrete_search(const Vec& start, const Vec& goal, const OccupancyGrid& grid,
                             const ConvexShape& shape, const Workspace& workspace, int L,
                             double tau_actual, double dt, double v_max,
                             const std::vector<DynamicObstacle>& extra_obstacles = {},
                             const std::vector<Hyperplane>& keep_out = {});

}  // namespace rlss
