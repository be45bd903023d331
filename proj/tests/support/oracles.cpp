#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace oracles {

Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0, theta = 0.0;
    for (int j = 0; j < n; ++j) {
        cumulative += u[j];
        double t = (cumulative - 1.0) / (j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0);
}

namespace {

struct HullCandidate {
    Eigen::VectorXd w, z;
    double distance = 0.0;
    bool certified = false;
};

// Exact minimization on the detected supports with NNLS-style pruning of
// negative weights; the certificate checks the simplex KKT conditions of the
// full problem.
HullCandidate polish(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& z) {
    const int na = static_cast<int>(A.cols()), nb = static_cast<int>(B.cols());
    std::vector<int> sa, sb;
    for (int i = 0; i < na; ++i)
        if (w(i) > 1e-9) sa.push_back(i);
    for (int i = 0; i < nb; ++i)
        if (z(i) > 1e-9) sb.push_back(i);

    Eigen::VectorXd y;
    while (true) {
        if (sa.empty() || sb.empty()) return {};
        const int ka = static_cast<int>(sa.size()), kb = static_cast<int>(sb.size());
        Eigen::MatrixXd M(A.rows(), ka + kb);
        for (int i = 0; i < ka; ++i) M.col(i) = A.col(sa[i]);
        for (int i = 0; i < kb; ++i) M.col(ka + i) = -B.col(sb[i]);

        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(ka + kb + 2, ka + kb + 2);
        kkt.topLeftCorner(ka + kb, ka + kb) = M.transpose() * M;
        for (int i = 0; i < ka; ++i) kkt(ka + kb, i) = kkt(i, ka + kb) = 1.0;
        for (int i = 0; i < kb; ++i) kkt(ka + kb + 1, ka + i) = kkt(ka + i, ka + kb + 1) = 1.0;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ka + kb + 2);
        rhs(ka + kb) = 1.0;
        rhs(ka + kb + 1) = 1.0;
        y = kkt.completeOrthogonalDecomposition().solve(rhs);

        int worst = -1;
        double most_negative = -1e-10;
        for (int i = 0; i < ka + kb; ++i)
            if (y(i) < most_negative) {
                most_negative = y(i);
                worst = i;
            }
        if (worst < 0) break;
        if (worst < ka)
            sa.erase(sa.begin() + worst);
        else
            sb.erase(sb.begin() + (worst - ka));
    }

    const int ka = static_cast<int>(sa.size()), kb = static_cast<int>(sb.size());
    HullCandidate cand;
    cand.w = Eigen::VectorXd::Zero(na);
    cand.z = Eigen::VectorXd::Zero(nb);
    for (int i = 0; i < ka; ++i) cand.w(sa[i]) = y(i);
    for (int i = 0; i < kb; ++i) cand.z(sb[i]) = y(ka + i);
    cand.w = cand.w.cwiseMax(0.0);
    cand.z = cand.z.cwiseMax(0.0);
    cand.w /= cand.w.sum();
    cand.z /= cand.z.sum();

    Eigen::VectorXd u = A * cand.w - B * cand.z;
    cand.distance = u.norm();
    double scale = 1e-9 * (1.0 + u.norm() * (A.cwiseAbs().maxCoeff() + B.cwiseAbs().maxCoeff()));

    Eigen::VectorXd ga = A.transpose() * u;
    Eigen::VectorXd gb = B.transpose() * u;
    double ga_min = ga.minCoeff(), gb_max = gb.maxCoeff();
    bool ok = true;
    for (int i = 0; i < na && ok; ++i)
        if (cand.w(i) > 1e-9 && ga(i) > ga_min + scale) ok = false;
    for (int i = 0; i < nb && ok; ++i)
        if (cand.z(i) > 1e-9 && gb(i) < gb_max - scale) ok = false;
    cand.certified = ok;
    return cand;
}

}  // namespace

double hull_distance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const int na = static_cast<int>(A.cols()), nb = static_cast<int>(B.cols());
    Eigen::VectorXd w = Eigen::VectorXd::Constant(na, 1.0 / na);
    Eigen::VectorXd z = Eigen::VectorXd::Constant(nb, 1.0 / nb);
    Eigen::VectorXd w_prev = w, z_prev = z;

    double lipschitz = 0.0;
    lipschitz += A.squaredNorm() + B.squaredNorm();
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    double momentum = 1.0;
    for (int iter = 1; iter <= 400000; ++iter) {
        double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        double beta = (momentum - 1.0) / momentum_next;
        Eigen::VectorXd yw = w + beta * (w - w_prev);
        Eigen::VectorXd yz = z + beta * (z - z_prev);
        Eigen::VectorXd u = A * yw - B * yz;
        w_prev = w;
        z_prev = z;
        w = project_simplex(yw - step * (A.transpose() * u));
        z = project_simplex(yz + step * (B.transpose() * u));
        momentum = momentum_next;

        if (iter % 100 == 0 || iter == 1) {
            double f = (A * w - B * z).squaredNorm();
            if (f < 1e-22) return std::sqrt(f);
            HullCandidate cand = polish(A, B, w, z);
            if (cand.certified) return cand.distance;
        }
    }
    HullCandidate cand = polish(A, B, w, z);
    if (cand.certified) return cand.distance;
    throw std::runtime_error("hull_distance oracle: no optimality certificate");
}

double point_hull_distance(const Eigen::VectorXd& p, const Eigen::MatrixXd& hull) {
    Eigen::MatrixXd single(p.size(), 1);
    single.col(0) = p;
    return hull_distance(single, hull);
}

double simpson(const std::function<double(double)>& f, double T, int n) {
    if (n % 2 != 0) ++n;
    const double h = T / n;
    double sum = f(0.0) + f(T);
    for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

Eigen::VectorXd central_difference(const std::function<Eigen::VectorXd(double)>& f, double t,
                                   double h) {
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

Eigen::VectorXd qp_dual_projected_gradient(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                                           const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                           int max_iters, double tol) {
    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("qp_dual_projected_gradient: Q must be positive definite");
    const int m = static_cast<int>(b.size());
    Eigen::MatrixXd AQinvAt = A * llt.solve(A.transpose());
    double step = 0.9 / std::max(AQinvAt.norm(), 1e-12);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd x = -llt.solve(q);
    for (int iter = 0; iter < max_iters; ++iter) {
        x = -llt.solve(q + A.transpose() * mu);
        Eigen::VectorXd g = A * x - b;
        Eigen::VectorXd mu_next = (mu + step * g).cwiseMax(0.0);
        double delta = (mu_next - mu).lpNorm<Eigen::Infinity>();
        mu = mu_next;
        if (delta < tol && iter > 100) break;
    }
    return -llt.solve(q + A.transpose() * mu);
}

int bfs_grid_moves(const std::vector<int>& dims, const std::vector<bool>& blocked,
                   const std::vector<int>& start, const std::vector<int>& goal) {
    const int d = static_cast<int>(dims.size());
    auto index = [&](const std::vector<int>& c) {
        long idx = 0;
        for (int a = d - 1; a >= 0; --a) idx = idx * dims[a] + c[a];
        return idx;
    };
    long total = 1;
    for (int a = 0; a < d; ++a) total *= dims[a];
    std::vector<int> dist(total, -1);
    std::deque<std::vector<int>> queue;
    if (blocked[index(start)]) return -1;
    dist[index(start)] = 0;
    queue.push_back(start);
    while (!queue.empty()) {
        std::vector<int> c = queue.front();
        queue.pop_front();
        if (c == goal) return dist[index(c)];
        for (int a = 0; a < d; ++a)
            for (int dir : {-1, 1}) {
                std::vector<int> nb = c;
                nb[a] += dir;
                if (nb[a] < 0 || nb[a] >= dims[a]) continue;
                long ni = index(nb);
                if (blocked[ni] || dist[ni] >= 0) continue;
                dist[ni] = dist[index(c)] + 1;
                queue.push_back(nb);
            }
    }
    return -1;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, int dim, double lo, double hi) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = uniform(rng, lo, hi);
    return v;
}

}  // namespace oracles
