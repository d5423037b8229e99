#include "edeg/random.hpp"
#include "edeg/reduce.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace edeg;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    const CounterRng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(static_cast<std::uint64_t>(i));
    return m;
}

// Cyclic Jacobi rotations: eigenvalues descending with matching columns.
void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
    values.resize(n);
    vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
}

}  // namespace

TEST_CASE("identical outputs project to zero") {
    Eigen::MatrixXd ys = Eigen::MatrixXd::Ones(5, 3) * 2.5;
    const auto p = pca_project(ys, 2);
    CHECK(p.projected.isZero(0.0));
    CHECK(p.explained_variance.isZero(0.0));
    CHECK_FALSE(p.active.any());
}

TEST_CASE("rank-one data is captured by one component") {
    Eigen::VectorXd dir(4);
    dir << 1, -2, 0.5, 3;
    const double s[6] = {-1.0, 0.3, 2.0, 0.7, -0.4, 1.1};
    Eigen::MatrixXd ys(6, 4);
    for (int i = 0; i < 6; ++i) ys.row(i) = (s[i] * dir).transpose();
    const auto p = pca_project(ys, 1);
    Eigen::MatrixXd centered = ys.rowwise() - ys.colwise().mean();
    const double total = centered.squaredNorm() / 5.0;
    CHECK(p.explained_variance[0] / total == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 6; ++i) {
        const Eigen::VectorXd rebuilt = p.mean + p.projected(i, 0) * p.components.col(0);
        CHECK((rebuilt - ys.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("components match a Jacobi eigensolver") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd ys = random_matrix(6, 10, seed);
        const auto p = pca_project(ys, 3);
        const Eigen::MatrixXd centered = ys.rowwise() - ys.colwise().mean();
        const Eigen::MatrixXd cov = centered.transpose() * centered / 5.0;
        Eigen::VectorXd values;
        Eigen::MatrixXd vectors;
        jacobi_eigen(cov, values, vectors);
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(p.explained_variance[j] - values[j]) < 1e-8);
            const double dot = p.components.col(j).dot(vectors.col(j));
            CHECK(std::abs(std::abs(dot) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("projection invariants") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::MatrixXd ys = random_matrix(7, 5, seed + 50);
        const int m = 1 + static_cast<int>(seed % 5);
        const auto p = pca_project(ys, m);
        const Eigen::MatrixXd gram = p.components.transpose() * p.components;
        CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-8);
        for (int j = 1; j < m; ++j) CHECK(p.explained_variance[j] <= p.explained_variance[j - 1]);
        const Eigen::MatrixXd centered = ys.rowwise() - ys.colwise().mean();
        const double total = centered.squaredNorm() / 6.0;
        CHECK(p.explained_variance.sum() <= total * (1 + 1e-12));
        for (Eigen::Index i = 0; i < ys.rows(); ++i) {
            for (int j = 0; j < m; ++j)
                CHECK(p.projected(i, j) == doctest::Approx(centered.row(i).dot(p.components.col(j))).epsilon(1e-12));
            CHECK(p.projected.row(i).norm() <= centered.row(i).norm() * (1 + 1e-12));
            if (m == 5) CHECK(p.projected.row(i).norm() == doctest::Approx(centered.row(i).norm()).epsilon(1e-10));
        }
        if (m == 5) CHECK(p.explained_variance.sum() == doctest::Approx(total).epsilon(1e-10));
        for (int j = 0; j < m; ++j) {
            Eigen::Index arg;
            p.components.col(j).cwiseAbs().maxCoeff(&arg);
            CHECK(p.components(arg, j) >= 0.0);
        }
        const auto again = pca_project(ys, m);
        CHECK(again.components == p.components);
        CHECK(again.projected == p.projected);
    }
}

TEST_CASE("component count is validated") {
    const Eigen::MatrixXd ys = random_matrix(4, 3, 1);
    CHECK_THROWS(pca_project(ys, 0));
    CHECK_THROWS(pca_project(ys, 4));
    CHECK_NOTHROW(pca_project(ys, 3));
    CHECK_THROWS(pca_project(random_matrix(1, 3, 2), 1));
}

TEST_CASE("pullback is the transpose of the fixed projection") {
    const Eigen::MatrixXd ys = random_matrix(6, 4, 9);
    const auto p = pca_project(ys, 2);
    const Eigen::MatrixXd g = random_matrix(6, 2, 10);
    const Eigen::MatrixXd dy = random_matrix(6, 4, 11);
    // <g, d project(ys) [dy]> == <pullback(g), dy> for the affine map with fixed mean.
    const Eigen::MatrixXd dproj = p.project(ys + dy) - p.project(ys);
    CHECK((g.array() * dproj.array()).sum() == doctest::Approx((p.pullback(g).array() * dy.array()).sum()).epsilon(1e-10));
}

TEST_CASE("tied spectra are flagged") {
    Eigen::MatrixXd ys(4, 2);
    ys << 1, 0, -1, 0, 0, 1, 0, -1;
    const auto p = pca_project(ys, 2);
    CHECK(p.tied_spectrum);
    const auto q = pca_project(random_matrix(5, 3, 4), 2);
    CHECK_FALSE(q.tied_spectrum);
}
