#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace rlss {

// Points and directions in R^d, d in {2, 3}.
using Vec = Eigen::VectorXd;

// Feasibility tolerance for polytope membership checks.
inline constexpr double kFeasEps = 1e-7;

// Bezier curve of degree h on [0, duration], defined by h+1 control points.
struct BezierPiece {
    double duration = 1.0;
    std::vector<Vec> control_points;

    int degree() const { return static_cast<int>(control_points.size()) - 1; }
    int dimension() const { return control_points.empty() ? 0 : static_cast<int>(control_points.front().size()); }
};

// Spline of Bezier pieces evaluated on [0, sum of piece durations].
struct PiecewiseTrajectory {
    std::vector<BezierPiece> pieces;

    double total_duration() const;
    int dimension() const { return pieces.empty() ? 0 : pieces.front().dimension(); }
    // Piece index and local time for a global time t in [0, total_duration].
    std::pair<int, double> locate(double t) const;
    Vec eval(double t) const;
    Vec derivative(double t, int order) const;
    // Evaluation with t clamped into the domain (callers replaying committed
    // plans past their horizon).
    Vec eval_clamped(double t) const;
    Vec derivative_clamped(double t, int order) const;
};

// Half-space {x : normal . x + offset <= 0}. Construction helpers keep
// normals at unit length so offsets are metric.
struct Hyperplane {
    Vec normal;
    double offset = 0.0;

    double signed_distance(const Vec& x) const { return normal.dot(x) + offset; }
    Hyperplane normalized() const;
};

// Intersection of half-spaces.
struct ConvexPolytope {
    std::vector<Hyperplane> halfspaces;
};

// Convex collision shape in vertex form, stored relative to its reference
// point: the shape placed at p has vertices {v + p}.
struct ConvexShape {
    Eigen::MatrixXd vertices;  // d x m, one column per base vertex
    bool is_box = false;
    Vec box_half_extents;  // valid when is_box

    static ConvexShape box(const Vec& half_extents);
    static ConvexShape points(Eigen::MatrixXd verts);

    int dimension() const { return static_cast<int>(vertices.rows()); }
    int num_vertices() const { return static_cast<int>(vertices.cols()); }
    Eigen::MatrixXd vertices_at(const Vec& p) const;
    // max_v dir . v over base vertices (support function at the reference frame).
    double support(const Vec& dir) const;
    double diameter() const;
    void aabb_at(const Vec& p, Vec& lo, Vec& hi) const;
};

// --- Bezier operations ---

// De Casteljau evaluation; throws std::domain_error for t outside [0, duration].
Vec bezier_eval(const BezierPiece& piece, double t);

// Hodograph: degree h-1 piece with control points (h/T)(P_{k+1} - P_k).
// A degree-0 input yields the zero curve of degree 0.
BezierPiece bezier_derivative(const BezierPiece& piece);

// --- Linear separation ---

// Maximum-margin hyperplane between two finite point sets (hard-margin SVM,
// solved as a convex QP over the normal and offset). The returned plane is the
// margin midline with unit normal and set_a on the non-positive side.
// Returns nullopt when the sets are not strictly separable.
std::optional<Hyperplane> svm_separate(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b);

// Shifts h so that a reference point satisfying the result implies the whole
// shape placed there satisfies h.
Hyperplane buffer_hyperplane(const Hyperplane& h, const ConvexShape& shape);

bool polytope_contains(const ConvexPolytope& poly, const Vec& x, double tol = kFeasEps);

// Vertex set of the convex hull swept by the shape translated from seg_start
// to seg_end (shape copies at both endpoints; interior-redundant vertices may
// remain).
Eigen::MatrixXd segment_swept_hull(const Vec& seg_start, const Vec& seg_end, const ConvexShape& shape);

// --- Convex set queries (columns are points) ---

// Distance between the convex hulls of two point sets (0 when they intersect).
double convex_sets_distance(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b);

bool convex_sets_intersect(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b,
                           double tol = 1e-9);

// Shapes placed at the given positions (box-box pairs short-circuit to an
// interval test).
bool shapes_overlap(const ConvexShape& a, const Vec& pa, const ConvexShape& b, const Vec& pb,
                    double tol = 1e-9);

// Axis-aligned boxes given by corners.
bool boxes_intersect(const Vec& lo_a, const Vec& hi_a, const Vec& lo_b, const Vec& hi_b,
                     double tol = 1e-9);
double aabb_distance(const Vec& lo_a, const Vec& hi_a, const Vec& lo_b, const Vec& hi_b);
void aabb_of(const Eigen::MatrixXd& points, Vec& lo, Vec& hi);

// The 2^d corner points of an axis-aligned box.
Eigen::MatrixXd box_corners(const Vec& lo, const Vec& hi);

}  // namespace rlss
