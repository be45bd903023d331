#include "rlss/occupancy_grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlss {

OccupancyGrid::OccupancyGrid(Vec origin, Vec cell_size, Eigen::VectorXi dims)
    : origin_(std::move(origin)), cell_size_(std::move(cell_size)), dims_(std::move(dims)) {
    if (origin_.size() != cell_size_.size() || origin_.size() != dims_.size())
        throw std::invalid_argument("OccupancyGrid: dimension mismatch");
    if ((cell_size_.array() <= 0.0).any())
        throw std::invalid_argument("OccupancyGrid: cell size must be positive");
    if ((dims_.array() <= 0).any()) throw std::invalid_argument("OccupancyGrid: empty dims");
    long cells = 1;
    for (int a = 0; a < dims_.size(); ++a) cells *= dims_(a);
    occupied_.assign(cells, 0);
}

long OccupancyGrid::occupied_count() const {
    return std::accumulate(occupied_.begin(), occupied_.end(), 0L);
}

bool OccupancyGrid::in_bounds(const Eigen::VectorXi& cell) const {
    for (int a = 0; a < dims_.size(); ++a)
        if (cell(a) < 0 || cell(a) >= dims_(a)) return false;
    return true;
}

long OccupancyGrid::index_of(const Eigen::VectorXi& cell) const {
    long idx = 0;
    for (int a = dims_.size() - 1; a >= 0; --a) idx = idx * dims_(a) + cell(a);
    return idx;
}

Eigen::VectorXi OccupancyGrid::cell_of_index(long index) const {
    Eigen::VectorXi cell(dims_.size());
    for (int a = 0; a < dims_.size(); ++a) {
        cell(a) = static_cast<int>(index % dims_(a));
        index /= dims_(a);
    }
    return cell;
}

bool OccupancyGrid::occupied(const Eigen::VectorXi& cell) const {
    return in_bounds(cell) && occupied_[index_of(cell)] != 0;
}

void OccupancyGrid::set_occupied(const Eigen::VectorXi& cell, bool value) {
    if (!in_bounds(cell)) throw std::out_of_range("OccupancyGrid::set_occupied: cell out of bounds");
    occupied_[index_of(cell)] = value ? 1 : 0;
}

Eigen::VectorXi OccupancyGrid::cell_at(const Vec& p) const {
    Eigen::VectorXi cell(dims_.size());
    for (int a = 0; a < dims_.size(); ++a)
        cell(a) = static_cast<int>(std::floor((p(a) - origin_(a)) / cell_size_(a)));
    return cell;
}

Vec OccupancyGrid::cell_center(const Eigen::VectorXi& cell) const {
    Vec c(dims_.size());
    for (int a = 0; a < dims_.size(); ++a)
        c(a) = origin_(a) + (cell(a) + 0.5) * cell_size_(a);
    return c;
}

void OccupancyGrid::cell_bounds(const Eigen::VectorXi& cell, Vec& lo, Vec& hi) const {
    lo.resize(dims_.size());
    hi.resize(dims_.size());
    for (int a = 0; a < dims_.size(); ++a) {
        lo(a) = origin_(a) + cell(a) * cell_size_(a);
        hi(a) = lo(a) + cell_size_(a);
    }
}

Vec OccupancyGrid::extent_hi() const {
    Vec hi(dims_.size());
    for (int a = 0; a < dims_.size(); ++a) hi(a) = origin_(a) + dims_(a) * cell_size_(a);
    return hi;
}

void OccupancyGrid::for_each_cell_in_aabb(
    const Vec& lo, const Vec& hi, const std::function<void(const Eigen::VectorXi&)>& fn) const {
    const int d = dimension();
    Eigen::VectorXi first(d), last(d);
    for (int a = 0; a < d; ++a) {
        first(a) = std::max(0, static_cast<int>(std::floor((lo(a) - origin_(a)) / cell_size_(a))) - 1);
        last(a) = std::min(dims_(a) - 1,
                           static_cast<int>(std::floor((hi(a) - origin_(a)) / cell_size_(a))) + 1);
        if (first(a) > last(a)) return;
    }
    Eigen::VectorXi cell = first;
    while (true) {
        fn(cell);
        int a = 0;
        while (a < d) {
            if (++cell(a) <= last(a)) break;
            cell(a) = first(a);
            ++a;
        }
        if (a == d) break;
    }
}

void OccupancyGrid::for_each_occupied_in_aabb(
    const Vec& lo, const Vec& hi, const std::function<void(const Eigen::VectorXi&)>& fn) const {
    for_each_cell_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        if (occupied_[index_of(cell)]) fn(cell);
    });
}

void OccupancyGrid::for_each_occupied(const std::function<void(const Eigen::VectorXi&)>& fn) const {
    for (long idx = 0; idx < num_cells(); ++idx)
        if (occupied_[idx]) fn(cell_of_index(idx));
}

bool OccupancyGrid::region_hits_occupied(const Eigen::MatrixXd& points, double tol) const {
    Vec lo, hi;
    aabb_of(points, lo, hi);
    bool hit = false;
    for_each_occupied_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        if (hit) return;
        Vec clo, chi;
        cell_bounds(cell, clo, chi);
        if (!boxes_intersect(lo, hi, clo, chi, tol)) return;
        if (convex_sets_intersect(points, box_corners(clo, chi), tol)) hit = true;
    });
    return hit;
}

bool placement_clear_of_obstacles(const OccupancyGrid& grid, const ConvexShape& shape, const Vec& p,
                                  double tol) {
    Vec lo, hi;
    shape.aabb_at(p, lo, hi);
    bool hit = false;
    grid.for_each_occupied_in_aabb(lo, hi, [&](const Eigen::VectorXi& cell) {
        if (hit) return;
        Vec clo, chi;
        grid.cell_bounds(cell, clo, chi);
        if (shape.is_box) {
            hit = boxes_intersect(lo, hi, clo, chi, tol);
        } else {
            if (boxes_intersect(lo, hi, clo, chi, tol))
                hit = convex_sets_intersect(shape.vertices_at(p), box_corners(clo, chi), tol);
        }
    });
    return !hit;
}

}  // namespace rlss
