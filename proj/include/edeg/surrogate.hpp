#pragma once

#include "edeg/basis.hpp"
#include "edeg/sampling.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace edeg {

inline constexpr double kDefaultDamping = 1e-6;
/// Largest accepted condition estimate of T^T T for an undamped fit.
inline constexpr double kMaxUndampedCondition = 1e12;

/// Fitted basis coefficients c_0..c_K of one univariate path restriction.
struct PolynomialSurrogate {
    BasisKind basis = BasisKind::chebyshev;
    int max_degree = 0;
    Eigen::VectorXd coefficients;
    double damping = 0.0;

    double operator()(double alpha) const;
};

struct EDValue {
    double ed = 0.0;
    double ed_norm = 0.0;
};

/// Damped least-squares fitter for one set of path abscissas.
///
/// Factorizes (T^T T + eps I) once; any number of output columns can then be
/// fitted and differentiated against the same factorization.
class PathFitter {
public:
    PathFitter(BasisKind kind, std::span<const double> alphas, int max_degree, double damping);

    const DesignMatrix& design() const noexcept { return design_; }
    double damping() const noexcept { return damping_; }
    int max_degree() const noexcept { return design_.max_degree(); }

    /// Coefficients of (T^T T + eps I) c = T^T y.
    Eigen::VectorXd solve(const Eigen::VectorXd& ys) const;
    /// One coefficient column per output column of `ys` (r x n).
    Eigen::MatrixXd solve(const Eigen::MatrixXd& ys) const;

    /// dED/dy = T (T^T T + eps I)^{-1} (sign(c) * d) for coefficients c.
    Eigen::VectorXd ed_gradient(const Eigen::VectorXd& coefficients) const;

    PolynomialSurrogate surrogate(Eigen::VectorXd coefficients) const;

private:
    DesignMatrix design_;
    double damping_;
    Eigen::MatrixXd normal_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

PolynomialSurrogate fit(const PathAbscissas& alphas, std::span<const double> ys, int max_degree,
                        double damping = kDefaultDamping, BasisKind basis = BasisKind::chebyshev);

EDValue effective_degree(const Eigen::VectorXd& coefficients);
EDValue effective_degree(const PolynomialSurrogate& s);

/// Gradient of the unnormalized ED with respect to the sampled outputs.
std::vector<double> ed_gradient(const PathAbscissas& alphas, std::span<const double> ys,
                                int max_degree, double damping = kDefaultDamping,
                                BasisKind basis = BasisKind::chebyshev);

/// Mean ED and ED_norm across the output dimensions of a vector-valued surrogate.
EDValue ed_vector(std::span<const PolynomialSurrogate> surrogates);

namespace detail {
/// sign(c_k) * k with sign(0) = 0. `sign_factor` exists for harness self-tests.
Eigen::VectorXd ed_coefficient_gradient(const Eigen::VectorXd& coefficients, double sign_factor = 1.0);
} // namespace detail

} // namespace edeg
