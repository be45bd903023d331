#include "rlss/geometry.hpp"

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

BezierPiece random_piece(std::mt19937_64& rng, int max_degree = 8) {
    int d = oracles::uniform(rng, 0.0, 1.0) < 0.5 ? 2 : 3;
    int h = static_cast<int>(oracles::uniform(rng, 0.0, max_degree + 0.999));
    BezierPiece piece;
    piece.duration = oracles::uniform(rng, 0.3, 3.0);
    for (int k = 0; k <= h; ++k) piece.control_points.push_back(oracles::random_vec(rng, d, -5.0, 5.0));
    return piece;
}

Eigen::MatrixXd columns(const std::vector<Vec>& pts) {
    Eigen::MatrixXd m(pts.front().size(), pts.size());
    for (size_t i = 0; i < pts.size(); ++i) m.col(i) = pts[i];
    return m;
}

double svm_margin(const Hyperplane& h, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.cols(); ++i) margin = std::min(margin, std::abs(h.signed_distance(a.col(i))));
    for (int i = 0; i < b.cols(); ++i) margin = std::min(margin, std::abs(h.signed_distance(b.col(i))));
    return margin;
}

}  // namespace

TEST_CASE("bezier_eval: linear interpolation and endpoints") {
    BezierPiece line{1.0, {vec2(0, 0), vec2(1, 0)}};
    Vec mid = bezier_eval(line, 0.5);
    CHECK(mid(0) == doctest::Approx(0.5));
    CHECK(mid(1) == doctest::Approx(0.0));

    BezierPiece quad{2.0, {vec2(0, 0), vec2(1, 1), vec2(2, 0)}};
    CHECK(bezier_eval(quad, 0.0).isApprox(quad.control_points.front()));
    CHECK(bezier_eval(quad, 2.0).isApprox(quad.control_points.back()));
    Vec at1 = bezier_eval(quad, 1.0);
    CHECK(at1(0) == doctest::Approx(1.0));
    CHECK(at1(1) == doctest::Approx(0.5));

    CHECK_THROWS_AS(bezier_eval(quad, -0.1), std::domain_error);
    CHECK_THROWS_AS(bezier_eval(quad, 2.1), std::domain_error);
}

TEST_CASE("bezier_derivative: hodograph control points") {
    BezierPiece line{2.0, {vec2(0, 0), vec2(2, 0)}};
    BezierPiece hodo = bezier_derivative(line);
    REQUIRE(hodo.degree() == 0);
    CHECK(hodo.control_points[0](0) == doctest::Approx(1.0));

    BezierPiece constant{1.0, {vec2(3, 4)}};
    BezierPiece zero = bezier_derivative(constant);
    CHECK(zero.control_points[0].norm() == doctest::Approx(0.0));
}

TEST_CASE("bezier_derivative matches central finite differences") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        BezierPiece piece = random_piece(rng);
        if (piece.degree() < 1) continue;
        BezierPiece hodo = bezier_derivative(piece);
        const double h = 1e-6 * piece.duration;
        for (int s = 1; s <= 11; ++s) {
            double t = piece.duration * s / 12.0;
            Vec fd = oracles::central_difference([&](double tt) { return bezier_eval(piece, tt); },
                                                 t, h);
            Vec an = bezier_eval(hodo, t);
            CHECK((fd - an).norm() <= 1e-6 * (1.0 + an.norm()));
        }
    }
}

TEST_CASE("convex hull property of Bezier curves") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        BezierPiece piece = random_piece(rng);
        Eigen::MatrixXd hull = columns(piece.control_points);
        for (int s = 0; s <= 20; ++s) {
            Vec p = bezier_eval(piece, std::min(piece.duration, piece.duration * s / 20.0));
            CHECK(oracles::point_hull_distance(p, hull) <= 1e-7);
        }
    }
}

TEST_CASE("piecewise trajectory evaluation and clamping") {
    PiecewiseTrajectory traj;
    traj.pieces.push_back(BezierPiece{1.0, {vec2(0, 0), vec2(1, 0)}});
    traj.pieces.push_back(BezierPiece{2.0, {vec2(1, 0), vec2(1, 2)}});
    CHECK(traj.total_duration() == doctest::Approx(3.0));
    CHECK(traj.eval(0.5)(0) == doctest::Approx(0.5));
    CHECK(traj.eval(1.0)(0) == doctest::Approx(1.0));
    CHECK(traj.eval(3.0)(1) == doctest::Approx(2.0));
    CHECK(traj.eval_clamped(5.0)(1) == doctest::Approx(2.0));
    CHECK(traj.eval_clamped(-1.0)(0) == doctest::Approx(0.0));
    CHECK(traj.derivative(0.5, 1)(0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(traj.eval(3.5), std::domain_error);
}

TEST_CASE("svm_separate: symmetric point pairs") {
    Eigen::MatrixXd a(2, 1), b(2, 1);
    a.col(0) = vec2(0, 0);
    b.col(0) = vec2(2, 0);
    auto h = svm_separate(a, b);
    REQUIRE(h.has_value());
    CHECK(h->normal(0) == doctest::Approx(1.0));
    CHECK(h->normal(1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(h->offset == doctest::Approx(-1.0));  // midline x = 1

    Eigen::MatrixXd a2(2, 2), b2(2, 2);
    a2.col(0) = vec2(0, 0);
    a2.col(1) = vec2(0, 1);
    b2.col(0) = vec2(2, 0);
    b2.col(1) = vec2(2, 1);
    auto h2 = svm_separate(a2, b2);
    REQUIRE(h2.has_value());
    CHECK(h2->offset / -h2->normal(0) == doctest::Approx(1.0));  // midline x = 1
}

TEST_CASE("svm_separate margin equals half the hull distance") {
    Eigen::MatrixXd a(2, 2), b(2, 1);
    a.col(0) = vec2(0, 0);
    a.col(1) = vec2(1, 1);
    b.col(0) = vec2(3, 0);
    auto h = svm_separate(a, b);
    REQUIRE(h.has_value());
    double margin = svm_margin(*h, a, b);
    double expected = oracles::hull_distance(a, b) / 2.0;
    CHECK(expected == doctest::Approx(std::sqrt(5.0) / 2.0));
    CHECK(margin == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("svm_separate: random separable pairs are sided and maximal-margin") {
    std::mt19937_64 rng(303);
    int done = 0;
    while (done < 40) {
        int d = oracles::uniform(rng, 0.0, 1.0) < 0.5 ? 2 : 3;
        int na = 1 + static_cast<int>(oracles::uniform(rng, 0.0, 12.0));
        int nb = 1 + static_cast<int>(oracles::uniform(rng, 0.0, 12.0));
        Eigen::MatrixXd a(d, na), b(d, nb);
        Vec shift = oracles::random_vec(rng, d, -4.0, 4.0);
        for (int i = 0; i < na; ++i) a.col(i) = oracles::random_vec(rng, d, -2.0, 2.0);
        for (int i = 0; i < nb; ++i) b.col(i) = oracles::random_vec(rng, d, -2.0, 2.0) + shift;
        if (oracles::hull_distance(a, b) < 1e-3) continue;
        ++done;
        auto h = svm_separate(a, b);
        REQUIRE(h.has_value());
        CHECK(h->normal.norm() == doctest::Approx(1.0));
        for (int i = 0; i < na; ++i) CHECK(h->signed_distance(a.col(i)) < 0.0);
        for (int i = 0; i < nb; ++i) CHECK(h->signed_distance(b.col(i)) > 0.0);
        double margin = svm_margin(*h, a, b);
        CHECK(margin == doctest::Approx(oracles::hull_distance(a, b) / 2.0).epsilon(1e-6));
    }
}

TEST_CASE("svm_separate is antisymmetric under swapping") {
    std::mt19937_64 rng(404);
    Eigen::MatrixXd a(3, 4), b(3, 4);
    for (int i = 0; i < 4; ++i) {
        a.col(i) = oracles::random_vec(rng, 3, -1.0, 1.0);
        b.col(i) = oracles::random_vec(rng, 3, -1.0, 1.0) + Vec::Constant(3, 4.0);
    }
    auto h1 = svm_separate(a, b);
    auto h2 = svm_separate(b, a);
    REQUIRE(h1.has_value());
    REQUIRE(h2.has_value());
    CHECK((h1->normal + h2->normal).norm() <= 1e-6);
    CHECK(h1->offset + h2->offset == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("svm_separate refuses overlapping sets") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a.col(0) = vec2(0, 0);
    a.col(1) = vec2(2, 0);
    b.col(0) = vec2(1, -1);
    b.col(1) = vec2(1, 1);
    CHECK(!svm_separate(a, b).has_value());
}

TEST_CASE("buffer_hyperplane: box support and point identity") {
    Hyperplane plane{vec2(1, 0), -2.0};  // x <= 2
    ConvexShape square = ConvexShape::box(vec2(0.5, 0.5));
    Hyperplane buffered = buffer_hyperplane(plane, square);
    CHECK(buffered.offset == doctest::Approx(-1.5));  // x <= 1.5

    Eigen::MatrixXd origin(2, 1);
    origin.col(0) = vec2(0, 0);
    ConvexShape point = ConvexShape::points(origin);
    Hyperplane same = buffer_hyperplane(plane, point);
    CHECK(same.offset == doctest::Approx(plane.offset));
    CHECK(same.normal.isApprox(plane.normal));
}

TEST_CASE("buffer_hyperplane soundness on random shapes") {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 100; ++trial) {
        int d = oracles::uniform(rng, 0.0, 1.0) < 0.5 ? 2 : 3;
        int nv = 3 + static_cast<int>(oracles::uniform(rng, 0.0, 5.0));
        Eigen::MatrixXd verts(d, nv);
        for (int i = 0; i < nv; ++i) verts.col(i) = oracles::random_vec(rng, d, -0.5, 0.5);
        ConvexShape shape = ConvexShape::points(verts);
        Vec n = oracles::random_vec(rng, d, -1.0, 1.0);
        if (n.norm() < 1e-3) continue;
        Hyperplane plane{n, oracles::uniform(rng, -2.0, 2.0)};
        Hyperplane buffered = buffer_hyperplane(plane, shape);
        Hyperplane unit = plane.normalized();
        for (int k = 0; k < 100; ++k) {
            Vec p = oracles::random_vec(rng, d, -10.0, 10.0);
            if (buffered.signed_distance(p) > 0.0) continue;
            Eigen::MatrixXd at = shape.vertices_at(p);
            for (int i = 0; i < at.cols(); ++i) CHECK(unit.signed_distance(at.col(i)) <= 1e-9);
        }
    }
}

TEST_CASE("polytope_contains") {
    ConvexPolytope box;
    box.halfspaces = {Hyperplane{vec2(1, 0), -1.0}, Hyperplane{vec2(-1, 0), 0.0},
                      Hyperplane{vec2(0, 1), -1.0}, Hyperplane{vec2(0, -1), 0.0}};
    CHECK(polytope_contains(box, vec2(0.5, 0.5)));
    CHECK(!polytope_contains(box, vec2(1.5, 0.5)));

    std::mt19937_64 rng(606);
    for (int k = 0; k < 1000; ++k) {
        Vec p = oracles::random_vec(rng, 2, -2.0, 2.0);
        bool manual = true;
        for (const auto& h : box.halfspaces)
            if (h.normal.dot(p) + h.offset > kFeasEps) manual = false;
        CHECK(polytope_contains(box, p) == manual);
    }
}

TEST_CASE("segment_swept_hull") {
    Eigen::MatrixXd origin(2, 1);
    origin.col(0) = vec2(0, 0);
    ConvexShape point = ConvexShape::points(origin);
    Eigen::MatrixXd hull = segment_swept_hull(vec2(0, 0), vec2(1, 0), point);
    REQUIRE(hull.cols() == 2);
    CHECK(hull.col(0).isApprox(vec2(0, 0)));
    CHECK(hull.col(1).isApprox(vec2(1, 0)));

    ConvexShape square = ConvexShape::box(vec2(0.5, 0.5));
    Eigen::MatrixXd degenerate = segment_swept_hull(vec2(2, 2), vec2(2, 2), square);
    CHECK(degenerate.cols() == 4);

    Eigen::MatrixXd swept = segment_swept_hull(vec2(0, 0), vec2(2, 0), square);
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        Vec p = vec2(2 * t, 0);
        Eigen::MatrixXd at = square.vertices_at(p);
        for (int i = 0; i < at.cols(); ++i)
            CHECK(oracles::point_hull_distance(at.col(i), swept) <= 1e-7);
    }
}

TEST_CASE("convex set distance against the oracle") {
    std::mt19937_64 rng(707);
    for (int trial = 0; trial < 30; ++trial) {
        int d = oracles::uniform(rng, 0.0, 1.0) < 0.5 ? 2 : 3;
        Eigen::MatrixXd a(d, 5), b(d, 5);
        for (int i = 0; i < 5; ++i) {
            a.col(i) = oracles::random_vec(rng, d, -2.0, 2.0);
            b.col(i) = oracles::random_vec(rng, d, -2.0, 2.0) + Vec::Constant(d, 3.0);
        }
        CHECK(convex_sets_distance(a, b) ==
              doctest::Approx(oracles::hull_distance(a, b)).epsilon(1e-6));
    }
}

TEST_CASE("box helpers") {
    CHECK(boxes_intersect(vec2(0, 0), vec2(1, 1), vec2(0.5, 0.5), vec2(2, 2)));
    CHECK(!boxes_intersect(vec2(0, 0), vec2(1, 1), vec2(1.5, 1.5), vec2(2, 2)));
    CHECK(aabb_distance(vec2(0, 0), vec2(1, 1), vec2(2, 1), vec2(3, 2)) == doctest::Approx(1.0));
    ConvexShape sq = ConvexShape::box(vec2(0.5, 0.5));
    CHECK(shapes_overlap(sq, vec2(0, 0), sq, vec2(0.9, 0)));
    CHECK(!shapes_overlap(sq, vec2(0, 0), sq, vec2(1.1, 0)));
}
