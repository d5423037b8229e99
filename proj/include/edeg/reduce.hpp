#pragma once

#include <Eigen/Dense>

namespace edeg {

/// Eigenvalues below this are treated as degenerate (zero-variance) directions.
inline constexpr double kDegenerateVariance = 1e-12;

/// Per-path PCA of sampled outputs.
///
/// `components` holds m orthonormal output-space directions as columns,
/// ordered by non-increasing explained variance. Each column is sign-fixed
/// so that its largest-magnitude entry is nonnegative. Degenerate
/// directions keep their component but project to zero.
struct PathProjection {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;
    Eigen::MatrixXd projected;
    Eigen::VectorXd explained_variance;
    Eigen::Array<bool, Eigen::Dynamic, 1> active;
    bool tied_spectrum = false;

    int dim() const noexcept { return static_cast<int>(components.cols()); }

    /// Fixed linear map y -> components^T (y - mean) applied row-wise, with
    /// inactive components zeroed.
    Eigen::MatrixXd project(const Eigen::MatrixXd& ys) const;

    /// Pullback of a gradient on projected coordinates (r x m) to the
    /// sampled outputs (r x output_dim), mean and components held fixed.
    Eigen::MatrixXd pullback(const Eigen::MatrixXd& grad_projected) const;
};

/// PCA of r output vectors stored as the rows of `ys`, keeping the top m
/// components. Covariance uses the r - 1 divisor.
PathProjection pca_project(const Eigen::MatrixXd& ys, int m);

} // namespace edeg
