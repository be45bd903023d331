#include "rlss/corridor.hpp"

#include <cmath>
#include <sstream>

namespace rlss {

ConvexPolytope SafeCorridor::polytope(int j) const {
    ConvexPolytope poly;
    poly.halfspaces.reserve(pieces[j].size());
    for (const auto& ch : pieces[j]) poly.halfspaces.push_back(ch.plane);
    return poly;
}

int SafeCorridor::count(int j, HyperplaneKind kind) const {
    int n = 0;
    for (const auto& ch : pieces[j])
        if (ch.kind == kind) ++n;
    return n;
}

std::optional<std::vector<CorridorHyperplane>> make_pair_planes(
    const ConvexShape& shape, const Vec& position, const std::vector<DynamicObstacle>& other_robots,
    double robot_safety_margin, std::string* error) {
    std::vector<CorridorHyperplane> planes;
    Eigen::MatrixXd own = shape.vertices_at(position);
    for (int r = 0; r < static_cast<int>(other_robots.size()); ++r) {
        const auto& other = other_robots[r];
        auto sep = svm_separate(own, other.shape.vertices_at(other.position));
        if (!sep) {
            if (error) {
                std::ostringstream os;
                os << "current shape not separable from robot " << r;
                *error = os.str();
            }
            return std::nullopt;
        }
        CorridorHyperplane ch;
        ch.raw = *sep;
        ch.plane = buffer_hyperplane(*sep, shape);
        if (robot_safety_margin > 0.0) {
            double clearance = -ch.plane.signed_distance(position);
            ch.plane.offset += std::min(robot_safety_margin, std::max(0.0, 0.5 * clearance));
        }
        ch.kind = HyperplaneKind::robot;
        ch.source = r;
        planes.push_back(std::move(ch));
    }
    return planes;
}

CorridorResult build_corridor(const DiscretePlan& plan, const ConvexShape& shape,
                              const OccupancyGrid& grid,
                              const std::vector<DynamicObstacle>& other_robots,
                              const Workspace& workspace, double v_max, double prune_padding,
                              double robot_safety_margin) {
    CorridorResult result;
    std::string error;
    auto pair_planes = make_pair_planes(shape, plan.waypoints.front(), other_robots,
                                        robot_safety_margin, &error);
    if (!pair_planes) {
        result.error = error;
        return result;
    }
    return build_corridor(plan, shape, grid, *pair_planes, workspace, v_max, prune_padding);
}

CorridorResult build_corridor(const DiscretePlan& plan, const ConvexShape& shape,
                              const OccupancyGrid& grid,
                              const std::vector<CorridorHyperplane>& pair_planes,
                              const Workspace& workspace, double v_max, double prune_padding) {
    CorridorResult result;
    const int L = plan.num_segments();
    result.corridor.pieces.resize(L);
    const double diameter = shape.diameter();
    const Vec& start_position = plan.waypoints.front();

    for (int j = 0; j < L; ++j) {
        auto& piece = result.corridor.pieces[j];

        if (j > 0 && plan.segment_length(j) <= 1e-12) {
            piece = result.corridor.pieces[j - 1];
            continue;
        }

        Eigen::MatrixXd hull = segment_swept_hull(plan.segment_start(j), plan.segment_end(j), shape);
        Vec hull_lo, hull_hi;
        aabb_of(hull, hull_lo, hull_hi);
        const double prune_radius = v_max * plan.durations[j] + diameter + prune_padding;

        bool failed = false;
        std::string failure;
        Vec query_lo = hull_lo.array() - prune_radius;
        Vec query_hi = hull_hi.array() + prune_radius;
        grid.for_each_occupied_in_aabb(query_lo, query_hi, [&](const Eigen::VectorXi& cell) {
            if (failed) return;
            Vec clo, chi;
            grid.cell_bounds(cell, clo, chi);
            if (aabb_distance(hull_lo, hull_hi, clo, chi) > prune_radius) return;
            auto sep = svm_separate(hull, box_corners(clo, chi));
            if (!sep) {
                if (j == 0) {
                    ++result.skipped_piece1_planes;
                    return;
                }
                std::ostringstream os;
                os << "segment " << j << " not separable from obstacle cell "
                   << grid.index_of(cell);
                failure = os.str();
                failed = true;
                return;
            }
            CorridorHyperplane ch;
            ch.raw = *sep;
            ch.plane = buffer_hyperplane(*sep, shape);
            ch.kind = HyperplaneKind::obstacle;
            ch.source = static_cast<int>(grid.index_of(cell));
            if (j == 0 && ch.plane.signed_distance(start_position) > kFeasEps) {
                ++result.skipped_piece1_planes;
                return;
            }
            piece.push_back(std::move(ch));
        });
        if (failed) {
            result.error = failure;
            return result;
        }

        // The pair midplanes bound every piece: the whole committed plan stays
        // on this robot's side of each midline, even when a later replan fails
        // and the plan is followed past its first period.
        piece.insert(piece.end(), pair_planes.begin(), pair_planes.end());

        for (int w = 0; w < static_cast<int>(workspace.region.halfspaces.size()); ++w) {
            CorridorHyperplane ch;
            ch.raw = workspace.region.halfspaces[w].normalized();
            ch.plane = buffer_hyperplane(ch.raw, shape);
            ch.kind = HyperplaneKind::workspace;
            ch.source = w;
            piece.push_back(std::move(ch));
        }
    }

    result.success = true;
    return result;
}

}  // namespace rlss
