#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace edeg {

enum class BasisKind { chebyshev, legendre };

std::string_view to_string(BasisKind kind);
BasisKind basis_from_string(std::string_view name);

/// Value of the degree-k basis polynomial at x. Inputs within 1e-12 of
/// [-1, 1] are clamped onto the interval.
double basis_eval(BasisKind kind, int k, double x);

/// All basis values phi_0(x) .. phi_K(x) in one forward recurrence.
Eigen::VectorXd basis_row(BasisKind kind, int max_degree, double x);

/// Path design matrix: entry (i, k) = phi_k(2 alpha_i - 1).
///
/// Rows are path samples, columns degrees 0..K. Construction refuses an
/// under-determined fit (fewer samples than coefficients).
class DesignMatrix {
public:
    DesignMatrix(BasisKind kind, std::span<const double> alphas, int max_degree);

    BasisKind kind() const noexcept { return kind_; }
    int max_degree() const noexcept { return static_cast<int>(values_.cols()) - 1; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index k) const { return values_(i, k); }
    const Eigen::MatrixXd& matrix() const noexcept { return values_; }

private:
    BasisKind kind_;
    Eigen::MatrixXd values_;
};

inline DesignMatrix design_matrix(BasisKind kind, std::span<const double> alphas, int max_degree) {
    return DesignMatrix(kind, alphas, max_degree);
}

/// 2-norm condition number via singular values.
double condition_number(const Eigen::MatrixXd& m);

} // namespace edeg
