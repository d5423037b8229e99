#pragma once

#include "edeg/net.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edeg::gradcheck {

/// Coordinate-wise relative error |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct CellResult {
    int resolution = 0;
    int max_degree = 0;
    double damping = 0.0;
    std::size_t instances = 0;
    std::size_t coordinates = 0;
    double max_rel_error = 0.0;
};

struct SurrogateSuiteConfig {
    std::size_t instances = 120;
    std::uint64_t seed = 0;
    double fd_step = 1e-6;
    double tolerance = 1e-4;
    /// Flips the sign convention of the analytic gradient; exists so the
    /// harness can prove it detects a broken implementation.
    bool corrupt_sign = false;
};

struct SurrogateSuiteReport {
    std::vector<CellResult> cells;
    std::size_t checked = 0;
    std::size_t skipped = 0;  ///< instances with some |c_k| <= 1e-8
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Analytic dED/dy against central finite differences over random
/// (r, K, eps) instances with r in [4, 15], K in [3, 14], eps in {1e-6, 1e-3}.
SurrogateSuiteReport surrogate_suite(const SurrogateSuiteConfig& cfg);

struct CompositeCase {
    std::string description;
    double max_rel_error = 0.0;
    std::size_t parameters = 0;
};

struct CompositeSuiteConfig {
    std::size_t instances = 24;
    std::uint64_t seed = 0;
    double fd_step = 1e-6;
    double tolerance = 1e-3;
};

struct CompositeSuiteReport {
    std::vector<CompositeCase> cases;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Full parameter gradient of L_task + lambda * ED through interpolation,
/// optional anchoring, optional fixed-basis PCA, fit and ED, against
/// central finite differences of the same composite objective.
CompositeSuiteReport composite_suite(const CompositeSuiteConfig& cfg);

/// Max coordinate-wise relative error of `objective`'s gradient at `net`.
double check_objective(const CompositeObjective& objective, const FeedForwardNet& net, double fd_step);

} // namespace edeg::gradcheck
