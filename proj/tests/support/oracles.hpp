#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

// Independent reference computations used by the test suites. Nothing here
// calls the production QP solver or planners.
namespace oracles {

// Euclidean projection onto the probability simplex (Condat's method).
Eigen::VectorXd project_simplex(Eigen::VectorXd v);

// Distance between convex hulls of two point sets (columns are points),
// computed by accelerated projected gradient over convex-combination weights
// with an exact KKT polish and optimality certificate. Throws when the
// certificate cannot be established.
double hull_distance(const Eigen::MatrixXd& set_a, const Eigen::MatrixXd& set_b);

// Distance from a point to the convex hull of a point set.
double point_hull_distance(const Eigen::VectorXd& p, const Eigen::MatrixXd& hull);

// Composite Simpson quadrature of f over [0, T] with n (even) intervals.
double simpson(const std::function<double(double)>& f, double T, int n);

// Central finite difference of a vector-valued curve.
Eigen::VectorXd central_difference(const std::function<Eigen::VectorXd(double)>& f, double t,
                                   double h);

// Reference solver for strictly convex QPs with inequality constraints only
// (min 0.5 x'Qx + q'x s.t. Ax <= b) by projected gradient ascent on the dual.
Eigen::VectorXd qp_dual_projected_gradient(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                                           const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                           int max_iters = 2000000, double tol = 1e-12);

// Shortest path length in moves on a blocked lattice, 4/6-connected BFS.
// Returns -1 when unreachable. blocked is indexed x + dims[0]*(y + dims[1]*z).
int bfs_grid_moves(const std::vector<int>& dims, const std::vector<bool>& blocked,
                   const std::vector<int>& start, const std::vector<int>& goal);

// Deterministic helpers for randomized tests.
double uniform(std::mt19937_64& rng, double lo, double hi);
Eigen::VectorXd random_vec(std::mt19937_64& rng, int dim, double lo, double hi);

}  // namespace oracles
