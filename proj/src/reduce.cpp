#include "edeg/reduce.hpp"

#include "edeg/error.hpp"

#include <cmath>
#include <string>

namespace edeg {

Eigen::MatrixXd PathProjection::project(const Eigen::MatrixXd& ys) const {
    Eigen::MatrixXd out = (ys.rowwise() - mean.transpose()) * components;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (!active[j]) out.col(j).setZero();
    }
    return out;
}

Eigen::MatrixXd PathProjection::pullback(const Eigen::MatrixXd& grad_projected) const {
    Eigen::MatrixXd g = grad_projected;
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        if (!active[j]) g.col(j).setZero();
    }
    return g * components.transpose();
}

PathProjection pca_project(const Eigen::MatrixXd& ys, int m) {
    const Eigen::Index r = ys.rows();
    const Eigen::Index dim = ys.cols();
    if (r < 2) throw ConfigError("PCA needs at least two samples");
    if (m < 1 || m > std::min(r, dim)) {
        throw ConfigError("PCA dimension " + std::to_string(m) + " outside [1, " +
                          std::to_string(std::min(r, dim)) + "]");
    }

    PathProjection out;
    out.mean = ys.colwise().mean().transpose();
    const Eigen::MatrixXd centered = ys.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(r - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();   // ascending
    const Eigen::MatrixXd& vectors = eig.eigenvectors();

    out.components.resize(dim, m);
    out.explained_variance.resize(m);
    out.active.resize(m);
    for (int j = 0; j < m; ++j) {
        const Eigen::Index src = dim - 1 - j;
        Eigen::VectorXd v = vectors.col(src);
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v[argmax] < 0.0) v = -v;
        out.components.col(j) = v;
        const double lambda = values[src];
        out.active[j] = lambda >= kDegenerateVariance;
        out.explained_variance[j] = out.active[j] ? lambda : 0.0;
    }
    // A tie among retained non-degenerate eigenvalues, or across the
    // retention cut, leaves the component identity ambiguous.
    for (int j = 0; j < m && j + 1 < dim; ++j) {
        const double a = values[dim - 1 - j];
        const double b = values[dim - 2 - j];
        if (a >= kDegenerateVariance && a - b < kDegenerateVariance) out.tied_spectrum = true;
    }
    out.projected = out.project(ys);
    return out;
}

} // namespace edeg
