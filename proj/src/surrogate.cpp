#include "edeg/surrogate.hpp"

#include "edeg/error.hpp"

#include <cmath>

namespace edeg {

double PolynomialSurrogate::operator()(double alpha) const {
    return basis_row(basis, max_degree, 2.0 * alpha - 1.0).dot(coefficients);
}

PathFitter::PathFitter(BasisKind kind, std::span<const double> alphas, int max_degree, double damping)
    : design_(kind, alphas, max_degree), damping_(damping) {
    if (!(damping >= 0.0) || !std::isfinite(damping)) {
        throw ConfigError("damping must be a finite nonnegative value");
    }
    const Eigen::MatrixXd& t = design_.matrix();
    normal_ = t.transpose() * t;
    if (damping == 0.0) {
        const double cond = condition_number(normal_);
        if (!(cond < kMaxUndampedCondition)) {
            throw SingularSystemError("normal equations are numerically singular (condition estimate " +
                                      std::to_string(cond) + ")");
        }
    }
    normal_.diagonal().array() += damping;
    lu_.compute(normal_);
}

Eigen::VectorXd PathFitter::solve(const Eigen::VectorXd& ys) const {
    const Eigen::MatrixXd& t = design_.matrix();
    if (ys.size() != t.rows()) throw ConfigError("output count does not match the number of abscissas");
    const Eigen::VectorXd rhs = t.transpose() * ys;
    Eigen::VectorXd c = lu_.solve(rhs);
    const double residual = (normal_ * c - rhs).lpNorm<Eigen::Infinity>();
    if (!(residual < 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))) {
        throw NumericalError("damped normal equation residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return c;
}

Eigen::MatrixXd PathFitter::solve(const Eigen::MatrixXd& ys) const {
    Eigen::MatrixXd out(design_.cols(), ys.cols());
    for (Eigen::Index j = 0; j < ys.cols(); ++j) out.col(j) = solve(Eigen::VectorXd(ys.col(j)));
    return out;
}

Eigen::VectorXd PathFitter::ed_gradient(const Eigen::VectorXd& coefficients) const {
    return design_.matrix() * lu_.solve(detail::ed_coefficient_gradient(coefficients));
}

PolynomialSurrogate PathFitter::surrogate(Eigen::VectorXd coefficients) const {
    return {design_.kind(), design_.max_degree(), std::move(coefficients), damping_};
}

namespace detail {

Eigen::VectorXd ed_coefficient_gradient(const Eigen::VectorXd& coefficients, double sign_factor) {
    Eigen::VectorXd g(coefficients.size());
    for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
        const double c = coefficients[k];
        const double sign = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
        g[k] = sign_factor * sign * static_cast<double>(k);
    }
    return g;
}

} // namespace detail

PolynomialSurrogate fit(const PathAbscissas& alphas, std::span<const double> ys, int max_degree,
                        double damping, BasisKind basis) {
    const PathFitter fitter(basis, alphas.alphas, max_degree, damping);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return fitter.surrogate(fitter.solve(Eigen::VectorXd(y)));
}

EDValue effective_degree(const Eigen::VectorXd& coefficients) {
    double weighted = 0.0;
    double mass = 0.0;
    for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
        const double a = std::abs(coefficients[k]);
        weighted += a * static_cast<double>(k);
        mass += a;
    }
    return {weighted, mass > 0.0 ? weighted / mass : 0.0};
}

EDValue effective_degree(const PolynomialSurrogate& s) { return effective_degree(s.coefficients); }

std::vector<double> ed_gradient(const PathAbscissas& alphas, std::span<const double> ys, int max_degree,
                                double damping, BasisKind basis) {
    const PathFitter fitter(basis, alphas.alphas, max_degree, damping);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const Eigen::VectorXd g = fitter.ed_gradient(fitter.solve(Eigen::VectorXd(y)));
    return {g.data(), g.data() + g.size()};
}

EDValue ed_vector(std::span<const PolynomialSurrogate> surrogates) {
    if (surrogates.empty()) throw ConfigError("ed_vector needs at least one surrogate");
    const auto& first = surrogates.front();
    EDValue sum;
    for (const auto& s : surrogates) {
        if (s.basis != first.basis || s.max_degree != first.max_degree) {
            throw ConfigError("surrogates must share basis and maximum degree");
        }
        const EDValue v = effective_degree(s);
        sum.ed += v.ed;
        sum.ed_norm += v.ed_norm;
    }
    const double m = static_cast<double>(surrogates.size());
    return {sum.ed / m, sum.ed_norm / m};
}

} // namespace edeg
