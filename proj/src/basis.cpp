#include "edeg/basis.hpp"

#include "edeg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edeg {

namespace {

constexpr double kDomainSlack = 1e-12;

double clamp_unit(double x) {
    if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
        throw ConfigError("basis argument " + std::to_string(x) + " outside [-1, 1]");
    }
    return std::clamp(x, -1.0, 1.0);
}

double clamp_alpha(double a) {
    if (!(a >= -kDomainSlack && a <= 1.0 + kDomainSlack)) {
        throw ConfigError("path abscissa " + std::to_string(a) + " outside [0, 1]");
    }
    return std::clamp(a, 0.0, 1.0);
}

} // namespace

std::string_view to_string(BasisKind kind) {
    return kind == BasisKind::chebyshev ? "chebyshev" : "legendre";
}

BasisKind basis_from_string(std::string_view name) {
    if (name == "chebyshev") return BasisKind::chebyshev;
    if (name == "legendre") return BasisKind::legendre;
    throw ConfigError("unknown basis '" + std::string(name) + "'");
}

Eigen::VectorXd basis_row(BasisKind kind, int max_degree, double x) {
    if (max_degree < 0) throw ConfigError("max degree must be nonnegative");
    x = clamp_unit(x);
    Eigen::VectorXd row(max_degree + 1);
    row[0] = 1.0;
    if (max_degree >= 1) row[1] = x;
    for (int k = 1; k < max_degree; ++k) {
        if (kind == BasisKind::chebyshev) {
            row[k + 1] = 2.0 * x * row[k] - row[k - 1];
        } else {
            // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
            row[k + 1] = ((2.0 * k + 1.0) * x * row[k] - k * row[k - 1]) / (k + 1.0);
        }
    }
    return row;
}

double basis_eval(BasisKind kind, int k, double x) {
    if (k < 0) throw ConfigError("basis degree must be nonnegative");
    return basis_row(kind, k, x)[k];
}

DesignMatrix::DesignMatrix(BasisKind kind, std::span<const double> alphas, int max_degree)
    : kind_(kind) {
    if (max_degree < 0) throw ConfigError("max degree must be nonnegative");
    const auto r = static_cast<Eigen::Index>(alphas.size());
    if (r < max_degree + 1) {
        throw ConfigError("under-determined fit: " + std::to_string(r) + " samples for " +
                          std::to_string(max_degree + 1) + " coefficients");
    }
    values_.resize(r, max_degree + 1);
    for (Eigen::Index i = 0; i < r; ++i) {
        const double x = 2.0 * clamp_alpha(alphas[static_cast<std::size_t>(i)]) - 1.0;
        values_.row(i) = basis_row(kind, max_degree, x).transpose();
    }
}

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smallest = s[s.size() - 1];
    if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / smallest;
}

} // namespace edeg
