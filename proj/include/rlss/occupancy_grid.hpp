#pragma once

#include "rlss/geometry.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace rlss {

// Dense d-dimensional boolean occupancy lattice. Each occupied cell is treated
// as a separate axis-aligned-box obstacle.
class OccupancyGrid {
  public:
    OccupancyGrid() = default;
    OccupancyGrid(Vec origin, Vec cell_size, Eigen::VectorXi dims);

    int dimension() const { return static_cast<int>(dims_.size()); }
    const Vec& origin() const { return origin_; }
    const Vec& cell_size() const { return cell_size_; }
    const Eigen::VectorXi& dims() const { return dims_; }
    long num_cells() const { return static_cast<long>(occupied_.size()); }
    long occupied_count() const;

    bool in_bounds(const Eigen::VectorXi& cell) const;
    long index_of(const Eigen::VectorXi& cell) const;
    Eigen::VectorXi cell_of_index(long index) const;

    bool occupied(const Eigen::VectorXi& cell) const;
    void set_occupied(const Eigen::VectorXi& cell, bool value = true);

    // Cell containing p (unclamped; may be out of bounds).
    Eigen::VectorXi cell_at(const Vec& p) const;
    Vec cell_center(const Eigen::VectorXi& cell) const;
    void cell_bounds(const Eigen::VectorXi& cell, Vec& lo, Vec& hi) const;
    // The occupied cell as a box obstacle: (shape, center position).
    ConvexShape cell_shape() const { return ConvexShape::box(cell_size_ / 2.0); }

    Vec extent_lo() const { return origin_; }
    Vec extent_hi() const;

    // Visits every in-bounds cell whose box overlaps [lo, hi] (widened by one
    // cell; callers do their own exact tests).
    void for_each_cell_in_aabb(const Vec& lo, const Vec& hi,
                               const std::function<void(const Eigen::VectorXi&)>& fn) const;
    void for_each_occupied_in_aabb(const Vec& lo, const Vec& hi,
                                   const std::function<void(const Eigen::VectorXi&)>& fn) const;
    void for_each_occupied(const std::function<void(const Eigen::VectorXi&)>& fn) const;

    // True iff some occupied cell box overlaps the convex point set (exact test).
    bool region_hits_occupied(const Eigen::MatrixXd& points, double tol = 1e-9) const;

  private:
    Vec origin_;
    Vec cell_size_;
    Eigen::VectorXi dims_;
    std::vector<std::uint8_t> occupied_;
};

// True iff the shape placed at p overlaps no occupied cell.
bool placement_clear_of_obstacles(const OccupancyGrid& grid, const ConvexShape& shape, const Vec& p,
                                  double tol = 1e-9);

}  // namespace rlss
