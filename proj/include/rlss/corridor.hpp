#pragma once

#include "rlss/geometry.hpp"
#include "rlss/occupancy_grid.hpp"
#include "rlss/planner.hpp"

#include <string>
#include <vector>

namespace rlss {

enum class HyperplaneKind { obstacle, robot, workspace };

struct CorridorHyperplane {
    Hyperplane plane;  // buffered: constrains the shape's reference point
    Hyperplane raw;    // unbuffered SVM midline (workspace faces: the face itself)
    HyperplaneKind kind = HyperplaneKind::workspace;
    int source = -1;  // occupied-cell index or robot index
};

// One convex polytope of buffered separating half-spaces per plan segment.
struct SafeCorridor {
    std::vector<std::vector<CorridorHyperplane>> pieces;

    int num_pieces() const { return static_cast<int>(pieces.size()); }
    ConvexPolytope polytope(int j) const;
    int count(int j, HyperplaneKind kind) const;
};

struct CorridorResult {
    bool success = false;
    SafeCorridor corridor;
    std::string error;            // names the failing (segment, shape) pair
    int skipped_piece1_planes = 0;  // obstacle planes dropped to keep piece 1 feasible
};

// Separating hyperplanes between the robot's current shape and each other
// robot's current sensed shape, buffered by the robot's own shape. The
// maximum-margin plane of a pair is unique up to sign, so both robots of a
// pair bound themselves by the same midline. robot_safety_margin shifts each
// midline toward the robot (a reserve of one replanning period of travel),
// capped at half the robot's own clearance so the current position always
// stays feasible. Returns nullopt when some pair's shapes are not separable.
std::optional<std::vector<CorridorHyperplane>> make_pair_planes(
    const ConvexShape& shape, const Vec& position, const std::vector<DynamicObstacle>& other_robots,
    double robot_safety_margin, std::string* error = nullptr);

// For each segment: SVM hyperplanes separating the segment's swept hull from
// every occupied cell within pruning distance, buffered by the robot's own
// shape, plus the pair midplanes above (in every piece) and the buffered
// workspace faces. Obstacle pruning radius per segment: v_max * duration +
// shape diameter + prune_padding. Zero-length segments reuse the previous
// segment's polytope. Obstacle separation failures on segment 1 drop that
// plane (the recovery path when the current position overlaps an obstacle);
// all other separation failures fail the corridor.
CorridorResult build_corridor(const DiscretePlan& plan, const ConvexShape& shape,
                              const OccupancyGrid& grid,
                              const std::vector<CorridorHyperplane>& pair_planes,
                              const Workspace& workspace, double v_max, double prune_padding = 0.0);

// Convenience overload computing the pair planes internally.
CorridorResult build_corridor(const DiscretePlan& plan, const ConvexShape& shape,
                              const OccupancyGrid& grid,
                              const std::vector<DynamicObstacle>& other_robots,
                              const Workspace& workspace, double v_max,
                              double prune_padding = 0.0, double robot_safety_margin = 0.0);

}  // namespace rlss
