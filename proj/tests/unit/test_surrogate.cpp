#include "edeg/error.hpp"
#include "edeg/random.hpp"
#include "edeg/sampling.hpp"
#include "edeg/surrogate.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace edeg;

namespace {

// Reference solver: Gaussian elimination with partial pivoting on plain
// nested vectors, no Eigen.
std::vector<double> reference_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<double> reference_fit(const std::vector<double>& alphas, const std::vector<double>& ys, int K, double eps) {
    const std::size_t r = alphas.size();
    const std::size_t n = static_cast<std::size_t>(K) + 1;
    std::vector<std::vector<double>> t(r, std::vector<double>(n));
    for (std::size_t i = 0; i < r; ++i) {
        const double x = 2 * alphas[i] - 1;
        t[i][0] = 1;
        if (n > 1) t[i][1] = x;
        for (std::size_t k = 2; k < n; ++k) t[i][k] = 2 * x * t[i][k - 1] - t[i][k - 2];
    }
    std::vector<std::vector<double>> normal(n, std::vector<double>(n, 0.0));
    std::vector<double> rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < r; ++i) normal[j][k] += t[i][j] * t[i][k];
        normal[j][j] += eps;
        for (std::size_t i = 0; i < r; ++i) rhs[j] += t[i][j] * ys[i];
    }
    return reference_solve(normal, rhs);
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal(i);
    return v;
}

double ed_of(const PathAbscissas& a, const std::vector<double>& ys, int K, double eps) {
    return effective_degree(fit(a, ys, K, eps)).ed;
}

}  // namespace

TEST_CASE("basis element is recovered exactly") {
    const auto nodes = chebyshev_nodes(4);
    std::vector<double> ys;
    for (double a : nodes.alphas) ys.push_back(basis_eval(BasisKind::chebyshev, 3, 2 * a - 1));
    const auto s = fit(nodes, ys, 3, 0.0);
    const double expected[4] = {0, 0, 0, 1};
    for (int k = 0; k < 4; ++k) CHECK(std::abs(s.coefficients[k] - expected[k]) < 1e-10);
}

TEST_CASE("constant outputs give a constant surrogate") {
    const auto nodes = randomized_cosine(6, 3, false);
    const std::vector<double> ys(6, 5.0);
    const auto s = fit(nodes, ys, 3, 0.0);
    CHECK(std::abs(s.coefficients[0] - 5.0) < 1e-10);
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(s.coefficients[k]) < 1e-10);
}

TEST_CASE("damped fit matches an independent dense solve") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto nodes = randomized_cosine(8, seed, false);
        const auto ys = random_values(8, seed + 100);
        const auto s = fit(nodes, ys, 5, 1e-3);
        const auto ref = reference_fit(nodes.alphas, ys, 5, 1e-3);
        for (int k = 0; k <= 5; ++k) CHECK(std::abs(s.coefficients[k] - ref[static_cast<std::size_t>(k)]) < 1e-9);
    }
}

TEST_CASE("surrogate evaluation reproduces the fitted expansion") {
    const auto nodes = chebyshev_nodes(5);
    std::vector<double> ys;
    for (double a : nodes.alphas) ys.push_back(1 + 2 * a - 3 * a * a + a * a * a * a);
    const auto s = fit(nodes, ys, 4, 0.0);
    for (double a : {0.0, 0.3, 0.77, 1.0}) CHECK(s(a) == doctest::Approx(1 + 2 * a - 3 * a * a + a * a * a * a));
}

TEST_CASE("undamped singular system is refused") {
    PathAbscissas same;
    same.alphas = {0.5, 0.5, 0.5, 0.5};
    const std::vector<double> ys{1, 2, 3, 4};
    CHECK_THROWS_AS(fit(same, ys, 2, 0.0), SingularSystemError);
    CHECK_NOTHROW(fit(same, ys, 2, 1e-3));
    CHECK_THROWS_AS(fit(same, ys, 2, -1.0), std::invalid_argument);
}

TEST_CASE("effective degree values") {
    auto ed = [](std::initializer_list<double> c) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
        Eigen::Index i = 0;
        for (double x : c) v[i++] = x;
        return effective_degree(v);
    };
    CHECK(ed({0, 0, 0, 1}).ed == 3.0);
    CHECK(ed({0, 0, 0, 1}).ed_norm == 3.0);
    CHECK(ed({2, -1, 3}).ed == 7.0);
    CHECK(ed({1, 1}).ed == 1.0);
    CHECK(ed({1, 1}).ed_norm == 0.5);
    CHECK(ed({0, 0, 0}).ed == 0.0);
    CHECK(ed({0, 0, 0}).ed_norm == 0.0);
}

TEST_CASE("ED is Lipschitz in the coefficients and positively homogeneous") {
    const int K = 6;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = random_values(K + 1, seed);
        const auto b = random_values(K + 1, seed + 1000);
        const Eigen::Map<const Eigen::VectorXd> ca(a.data(), K + 1);
        const Eigen::Map<const Eigen::VectorXd> cb(b.data(), K + 1);
        CHECK(std::abs(effective_degree(ca).ed - effective_degree(cb).ed) <= K * (ca - cb).lpNorm<1>() + 1e-12);
        const double lambda = 0.1 + std::abs(b[0]) * 3;
        const Eigen::VectorXd scaled = lambda * ca;
        CHECK(effective_degree(scaled).ed == doctest::Approx(lambda * effective_degree(ca).ed).epsilon(1e-12));
        CHECK(effective_degree(scaled).ed_norm == doctest::Approx(effective_degree(ca).ed_norm).epsilon(1e-12));
    }
}

TEST_CASE("ridge shrinkage is monotone in the damping") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto nodes = randomized_cosine(10, seed, false);
        const auto ys = random_values(10, seed + 7);
        double prev = INFINITY;
        for (double eps : {0.0, 1e-6, 1e-3, 1e-1}) {
            const double norm = fit(nodes, ys, 7, eps).coefficients.norm();
            CHECK(norm <= prev * (1 + 1e-12));
            prev = norm;
        }
    }
}

TEST_CASE("gradient of a degree-zero fit is zero") {
    const auto nodes = randomized_cosine(5, 1, false);
    const auto g = ed_gradient(nodes, random_values(5, 2), 0, 1e-6);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("gradient is odd in the outputs") {
    const auto nodes = randomized_cosine(9, 4, false);
    auto ys = random_values(9, 5);
    const auto g = ed_gradient(nodes, ys, 6, 1e-6);
    for (double& y : ys) y = -y;
    const auto h = ed_gradient(nodes, ys, 6, 1e-6);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(h[i] == doctest::Approx(-g[i]).epsilon(1e-12));
}

TEST_CASE("gradient agrees with central finite differences") {
    const double h = 1e-6;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto nodes = randomized_cosine(8, seed, false);
        const auto ys = random_values(8, seed + 300);
        const auto s = fit(nodes, ys, 5, 1e-6);
        if (s.coefficients.cwiseAbs().minCoeff() <= 1e-8) continue;
        const auto g = ed_gradient(nodes, ys, 5, 1e-6);
        for (std::size_t i = 0; i < ys.size(); ++i) {
            auto plus = ys;
            auto minus = ys;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (ed_of(nodes, plus, 5, 1e-6) - ed_of(nodes, minus, 5, 1e-6)) / (2 * h);
            CHECK(std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6}) < 1e-5);
        }
        ++checked;
    }
    CHECK(checked >= 30);
}

TEST_CASE("sign(0) contributes nothing to the gradient") {
    Eigen::VectorXd c(4);
    c << 1.0, 0.0, -2.0, 0.0;
    const Eigen::VectorXd g = detail::ed_coefficient_gradient(c);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == -2.0);
    CHECK(g[3] == 0.0);
}

TEST_CASE("vector ED averages over dimensions") {
    PolynomialSurrogate a{BasisKind::chebyshev, 2, Eigen::Vector3d(0, 2, 0), 0.0};
    PolynomialSurrogate b{BasisKind::chebyshev, 2, Eigen::Vector3d(0, 0, 2), 0.0};
    const std::vector<PolynomialSurrogate> both{a, b};
    CHECK(ed_vector(both).ed == 3.0);
    const std::vector<PolynomialSurrogate> single{b};
    CHECK(ed_vector(single).ed == effective_degree(b).ed);
    CHECK(ed_vector(single).ed_norm == effective_degree(b).ed_norm);
    PolynomialSurrogate z{BasisKind::chebyshev, 2, Eigen::Vector3d::Zero(), 0.0};
    const std::vector<PolynomialSurrogate> zeros{z, z, z};
    CHECK(ed_vector(zeros).ed == 0.0);
    CHECK(ed_vector(zeros).ed_norm == 0.0);
    CHECK_THROWS(ed_vector(std::span<const PolynomialSurrogate>{}));
    PolynomialSurrogate other{BasisKind::legendre, 2, Eigen::Vector3d(1, 1, 1), 0.0};
    const std::vector<PolynomialSurrogate> mixed{a, other};
    CHECK_THROWS(ed_vector(mixed));
}

TEST_CASE("exact recovery for every basis element up to degree 14") {
    for (int K = 0; K <= 14; ++K) {
        const auto nodes = chebyshev_nodes(K + 1);
        for (int j = 0; j <= K; ++j) {
            std::vector<double> ys;
            for (double a : nodes.alphas) ys.push_back(basis_eval(BasisKind::chebyshev, j, 2 * a - 1));
            const auto c = fit(nodes, ys, K, 0.0).coefficients;
            for (int k = 0; k <= K; ++k) CHECK(std::abs(c[k] - (k == j ? 1.0 : 0.0)) < 1e-9);
        }
    }
}
