#include "rlss/geometry.hpp"

#include "rlss/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace rlss {

double PiecewiseTrajectory::total_duration() const {
    double total = 0.0;
    for (const auto& piece : pieces) total += piece.duration;
    return total;
}

std::pair<int, double> PiecewiseTrajectory::locate(double t) const {
    if (pieces.empty()) throw std::domain_error("PiecewiseTrajectory: empty");
    double total = total_duration();
    if (t < 0.0 || t > total + 1e-12) throw std::domain_error("PiecewiseTrajectory: time outside domain");
    double start = 0.0;
    for (int j = 0; j + 1 < static_cast<int>(pieces.size()); ++j) {
        if (t <= start + pieces[j].duration) return {j, t - start};
        start += pieces[j].duration;
    }
    int last = static_cast<int>(pieces.size()) - 1;
    return {last, std::min(t - start, pieces[last].duration)};
}

Vec PiecewiseTrajectory::eval(double t) const {
    auto [j, local] = locate(t);
    return bezier_eval(pieces[j], local);
}

Vec PiecewiseTrajectory::derivative(double t, int order) const {
    auto [j, local] = locate(t);
    BezierPiece piece = pieces[j];
    for (int k = 0; k < order; ++k) piece = bezier_derivative(piece);
    return bezier_eval(piece, local);
}

Vec PiecewiseTrajectory::eval_clamped(double t) const {
    return eval(std::clamp(t, 0.0, total_duration()));
}

Vec PiecewiseTrajectory::derivative_clamped(double t, int order) const {
    return derivative(std::clamp(t, 0.0, total_duration()), order);
}

Hyperplane Hyperplane::normalized() const {
    double n = normal.norm();
    if (n <= 0.0) throw std::invalid_argument("Hyperplane: zero normal");
    return Hyperplane{normal / n, offset / n};
}

ConvexShape ConvexShape::box(const Vec& half_extents) {
    const int d = static_cast<int>(half_extents.size());
    ConvexShape s;
    s.is_box = true;
    s.box_half_extents = half_extents;
    s.vertices.resize(d, 1 << d);
    for (int corner = 0; corner < (1 << d); ++corner)
        for (int axis = 0; axis < d; ++axis)
            s.vertices(axis, corner) = (corner >> axis & 1) ? half_extents(axis) : -half_extents(axis);
    return s;
}

ConvexShape ConvexShape::points(Eigen::MatrixXd verts) {
    if (verts.cols() == 0) throw std::invalid_argument("ConvexShape: empty vertex list");
    ConvexShape s;
    s.vertices = std::move(verts);
    return s;
}

Eigen::MatrixXd ConvexShape::vertices_at(const Vec& p) const {
    return vertices.colwise() + p;
}

double ConvexShape::support(const Vec& dir) const {
    return (dir.transpose() * vertices).maxCoeff();
}

double ConvexShape::diameter() const {
    double best = 0.0;
    for (int i = 0; i < vertices.cols(); ++i)
        for (int j = i + 1; j < vertices.cols(); ++j)
            best = std::max(best, (vertices.col(i) - vertices.col(j)).norm());
    return best;
}

void ConvexShape::aabb_at(const Vec& p, Vec& lo, Vec& hi) const {
    lo = vertices.rowwise().minCoeff() + p;
    hi = vertices.rowwise().maxCoeff() + p;
}

Vec bezier_eval(const BezierPiece& piece, double t) {
    if (piece.control_points.empty()) throw std::domain_error("bezier_eval: no control points");
    if (piece.duration <= 0.0) throw std::domain_error("bezier_eval: non-positive duration");
    if (t < 0.0 || t > piece.duration) throw std::domain_error("bezier_eval: t outside [0, T]");
    const double u = t / piece.duration;
    std::vector<Vec> pts = piece.control_points;
    for (int r = static_cast<int>(pts.size()) - 1; r >= 1; --r)
        for (int i = 0; i < r; ++i) pts[i] = (1.0 - u) * pts[i] + u * pts[i + 1];
    return pts[0];
}

BezierPiece bezier_derivative(const BezierPiece& piece) {
    const int h = piece.degree();
    BezierPiece out;
    out.duration = piece.duration;
    if (h == 0) {
        out.control_points = {Vec::Zero(piece.dimension())};
        return out;
    }
    out.control_points.reserve(h);
    const double scale = h / piece.duration;
    for (int k = 0; k < h; ++k)
        out.control_points.push_back(scale * (piece.control_points[k + 1] - piece.control_points[k]));
    return out;
}

std::optional<Hyperplane> svm_separate(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b) {
    if (set_a.cols() == 0 || set_b.cols() == 0)
        throw std::invalid_argument("svm_separate: empty point set");
    if (set_a.rows() != set_b.rows()) throw std::invalid_argument("svm_separate: dimension mismatch");
    const int d = static_cast<int>(set_a.rows());
    const int na = static_cast<int>(set_a.cols());
    const int nb = static_cast<int>(set_b.cols());

    // Variables (n, a): min ||n||^2 s.t. n.x + a <= -1 on set_a, >= +1 on set_b.
    QpProblem qp = QpProblem::zero(d + 1);
    qp.Q.topLeftCorner(d, d) = 2.0 * Eigen::MatrixXd::Identity(d, d);
    qp.A_in = Eigen::MatrixXd::Zero(na + nb, d + 1);
    qp.b_in = Eigen::VectorXd::Constant(na + nb, -1.0);
    for (int i = 0; i < na; ++i) {
        qp.A_in.block(i, 0, 1, d) = set_a.col(i).transpose();
        qp.A_in(i, d) = 1.0;
    }
    for (int i = 0; i < nb; ++i) {
        qp.A_in.block(na + i, 0, 1, d) = -set_b.col(i).transpose();
        qp.A_in(na + i, d) = -1.0;
    }

    QpSolution sol = solve(qp);
    if (sol.status != QpStatus::optimal) return std::nullopt;
    Vec normal = sol.x.head(d);
    double norm = normal.norm();
    if (norm <= 0.0) return std::nullopt;
    return Hyperplane{normal / norm, sol.x(d) / norm};
}

Hyperplane buffer_hyperplane(const Hyperplane& h, const ConvexShape& shape) {
    Hyperplane unit = h.normalized();
    unit.offset += shape.support(unit.normal);
    return unit;
}

bool polytope_contains(const ConvexPolytope& poly, const Vec& x, double tol) {
    for (const auto& h : poly.halfspaces)
        if (h.signed_distance(x) > tol) return false;
    return true;
}

Eigen::MatrixXd segment_swept_hull(const Vec& seg_start, const Vec& seg_end, const ConvexShape& shape) {
    if ((seg_end - seg_start).norm() == 0.0) return shape.vertices_at(seg_start);
    Eigen::MatrixXd hull(shape.dimension(), 2 * shape.num_vertices());
    hull.leftCols(shape.num_vertices()) = shape.vertices_at(seg_start);
    hull.rightCols(shape.num_vertices()) = shape.vertices_at(seg_end);
    return hull;
}

double convex_sets_distance(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b) {
    const int na = static_cast<int>(set_a.cols());
    const int nb = static_cast<int>(set_b.cols());
    if (na == 0 || nb == 0) throw std::invalid_argument("convex_sets_distance: empty point set");

    // min || A w - B z ||^2 over the product of simplices.
    QpProblem qp = QpProblem::zero(na + nb);
    qp.Q.topLeftCorner(na, na) = 2.0 * set_a.transpose() * set_a;
    qp.Q.topRightCorner(na, nb) = -2.0 * set_a.transpose() * set_b;
    qp.Q.bottomLeftCorner(nb, na) = qp.Q.topRightCorner(na, nb).transpose();
    qp.Q.bottomRightCorner(nb, nb) = 2.0 * set_b.transpose() * set_b;
    qp.A_eq = Eigen::MatrixXd::Zero(2, na + nb);
    qp.A_eq.row(0).head(na).setOnes();
    qp.A_eq.row(1).tail(nb).setOnes();
    qp.b_eq = Eigen::VectorXd::Ones(2);
    qp.A_in = -Eigen::MatrixXd::Identity(na + nb, na + nb);
    qp.b_in = Eigen::VectorXd::Zero(na + nb);

    QpSolution sol = solve(qp);
    if (sol.status != QpStatus::optimal)
        throw std::runtime_error("convex_sets_distance: QP solve failed");
    Vec diff = set_a * sol.x.head(na) - set_b * sol.x.tail(nb);
    return diff.norm();
}

bool convex_sets_intersect(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b, double tol) {
    Vec lo_a, hi_a, lo_b, hi_b;
    aabb_of(set_a, lo_a, hi_a);
    aabb_of(set_b, lo_b, hi_b);
    if (!boxes_intersect(lo_a, hi_a, lo_b, hi_b, tol)) return false;
    return convex_sets_distance(set_a, set_b) <= tol;
}

bool shapes_overlap(const ConvexShape& a, const Vec& pa, const ConvexShape& b, const Vec& pb,
                    double tol) {
    Vec lo_a, hi_a, lo_b, hi_b;
    a.aabb_at(pa, lo_a, hi_a);
    b.aabb_at(pb, lo_b, hi_b);
    if (!boxes_intersect(lo_a, hi_a, lo_b, hi_b, tol)) return false;
    if (a.is_box && b.is_box) return true;
    return convex_sets_intersect(a.vertices_at(pa), b.vertices_at(pb), tol);
}

bool boxes_intersect(const Vec& lo_a, const Vec& hi_a, const Vec& lo_b, const Vec& hi_b, double tol) {
    for (int axis = 0; axis < lo_a.size(); ++axis)
        if (lo_a(axis) > hi_b(axis) + tol || lo_b(axis) > hi_a(axis) + tol) return false;
    return true;
}

double aabb_distance(const Vec& lo_a, const Vec& hi_a, const Vec& lo_b, const Vec& hi_b) {
    double sq = 0.0;
    for (int axis = 0; axis < lo_a.size(); ++axis) {
        double gap = std::max({0.0, lo_b(axis) - hi_a(axis), lo_a(axis) - hi_b(axis)});
        sq += gap * gap;
    }
    return std::sqrt(sq);
}

void aabb_of(const Eigen::MatrixXd& points, Vec& lo, Vec& hi) {
    lo = points.rowwise().minCoeff();
    hi = points.rowwise().maxCoeff();
}

Eigen::MatrixXd box_corners(const Vec& lo, const Vec& hi) {
    const int d = static_cast<int>(lo.size());
    Eigen::MatrixXd corners(d, 1 << d);
    for (int corner = 0; corner < (1 << d); ++corner)
        for (int axis = 0; axis < d; ++axis)
            corners(axis, corner) = (corner >> axis & 1) ? hi(axis) : lo(axis);
    return corners;
}

}  // namespace rlss
