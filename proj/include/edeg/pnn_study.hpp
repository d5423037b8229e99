#pragma once

#include "edeg/net.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace edeg {

/// Target mapping of study task `task` (1..6) at x in R^3. Tasks 4-6 are
/// tasks 1-3 scaled by 2.
Eigen::Vector3d pnn_target(int task, const Eigen::Vector3d& x);
int pnn_algebraic_degree(int task);

struct PnnStudyConfig {
    int width = 16;
    int train_points = 512;
    double input_range = 2.0;  ///< inputs uniform on [-input_range, input_range]^3
    int steps = 20000;
    double learning_rate = 1e-2;
    double init_gain = 0.5;
    double mse_threshold = 1e-4;
    int eval_paths = 512;
    int resolution = 15;
    int max_degree = 7;
    double damping = kDefaultDamping;
    std::uint64_t seed = 0;
};

inline constexpr std::array<const char*, 5> kPnnMetricNames = {
    "ed_chebyshev", "ed_norm_chebyshev", "ed_legendre", "ed_pca1", "ed_pca2"};

struct PnnTaskRow {
    int task = 0;
    int algebraic_degree = 0;
    double final_mse = 0.0;
    bool trained = false;
    std::array<double, 5> metrics{};  ///< ordered as kPnnMetricNames
};

struct PnnCheck {
    std::string name;
    bool passed = false;
};

struct PnnStudy {
    std::vector<PnnTaskRow> rows;
    std::vector<PnnCheck> checks;
    std::array<double, 3> ed_norm_gaps{};  ///< |Task k - Task k+3|, k = 1..3
    bool all_trained = false;
    bool all_checks_passed = false;
};

/// Trains one PNN per task and measures the five ED variants on it.
/// `tasks` selects a subset (default all six).
PnnStudy pnn_study(const PnnStudyConfig& cfg, const std::vector<int>& tasks = {1, 2, 3, 4, 5, 6});

/// ED variants of an arbitrary 3 -> 3 oracle on the study's evaluation paths.
std::array<double, 5> pnn_metrics(const FunctionOracle& f, const Dataset& eval_data, const PnnStudyConfig& cfg);

/// Ordering and scale checks over a complete six-row table.
std::vector<PnnCheck> pnn_checks(const std::vector<PnnTaskRow>& rows, double ed_norm_gap_limit = 0.15);

/// Uniform points on [-range, range]^3 with the task's targets.
Dataset pnn_dataset(int task, int n, std::uint64_t seed, double range = 2.0);

} // namespace edeg
