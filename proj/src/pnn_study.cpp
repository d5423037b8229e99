#include "edeg/pnn_study.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <cmath>

namespace edeg {

Eigen::Vector3d pnn_target(int task, const Eigen::Vector3d& v) {
    const double x1 = v[0];
    const double x2 = v[1];
    const double x3 = v[2];
    const double scale = task > 3 ? 2.0 : 1.0;
    switch (task > 3 ? task - 3 : task) {
    case 1: return scale * Eigen::Vector3d(x3 + 2.0, x2 + 3.0, x1 + 1.0);
    case 2: return scale * Eigen::Vector3d(x1 * x2, x2 * x3, x1 * x3);
    case 3:
        return scale * Eigen::Vector3d(x1 * x2 * x3, x1 * x1 * x2 * x3 * x3, x1 * x1 * x2 * x3 + x2 * x2 * x3);
    default: throw ConfigError("PNN study tasks are numbered 1..6");
    }
}

int pnn_algebraic_degree(int task) {
    switch (task > 3 ? task - 3 : task) {
    case 1: return 1;
    case 2: return 2;
    case 3: return 5;
    default: throw ConfigError("PNN study tasks are numbered 1..6");
    }
}

Dataset pnn_dataset(int task, int n, std::uint64_t seed, double range) {
    const CounterRng rng(seed, 0x706e6e64ULL);
    Dataset data;
    data.inputs.resize(n, 3);
    data.targets.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d x;
        for (int j = 0; j < 3; ++j) x[j] = range * (2.0 * rng.uniform(static_cast<std::uint64_t>(3 * i + j)) - 1.0);
        data.inputs.row(i) = x.transpose();
        data.targets.row(i) = pnn_target(task, x).transpose();
    }
    return data;
}

std::array<double, 5> pnn_metrics(const FunctionOracle& f, const Dataset& eval_data, const PnnStudyConfig& cfg) {
    EstimatorConfig est;
    est.n_paths = cfg.eval_paths;
    est.resolution = cfg.resolution;
    est.max_degree = cfg.max_degree;
    est.damping = cfg.damping;
    est.sampling = SamplingKind::chebyshev_fixed;
    est.seed = cfg.seed;

    std::array<double, 5> out{};
    const EDReport cheb = ed_estimate(f, eval_data, est);
    out[0] = cheb.mean_ed;
    out[1] = cheb.mean_ed_norm;
    est.basis = BasisKind::legendre;
    out[2] = ed_estimate(f, eval_data, est).mean_ed;
    est.basis = BasisKind::chebyshev;
    est.use_pca = true;
    est.pca_dim = 1;
    out[3] = ed_estimate(f, eval_data, est).mean_ed;
    est.pca_dim = 2;
    out[4] = ed_estimate(f, eval_data, est).mean_ed;
    return out;
}

PnnStudy pnn_study(const PnnStudyConfig& cfg, const std::vector<int>& tasks) {
    PnnStudy study;
    study.all_trained = true;
    for (int task : tasks) {
        const Dataset data = pnn_dataset(task, cfg.train_points, cfg.seed, cfg.input_range);
        FeedForwardNet net = FeedForwardNet::initialize({3, cfg.width, cfg.width, cfg.width, 3}, Activation::square,
                                                        cfg.seed + static_cast<std::uint64_t>(task), cfg.init_gain);
        TrainConfig tc;
        tc.task = TaskLoss::mse;
        tc.optimizer = Optimizer::adam;
        tc.cosine_decay = true;
        tc.learning_rate = cfg.learning_rate;
        tc.steps = cfg.steps;
        tc.batch_size = cfg.train_points;
        tc.lambda = 0.0;
        tc.n_paths = 1;
        tc.seed = cfg.seed;
        const TrainResult trained = train(std::move(net), data, tc);

        PnnTaskRow row;
        row.task = task;
        row.algebraic_degree = pnn_algebraic_degree(task);
        row.final_mse = task_loss(trained.net, full_batch(data, TaskLoss::mse, 3), TaskLoss::mse);
        row.trained = row.final_mse < cfg.mse_threshold;
        study.all_trained = study.all_trained && row.trained;
        row.metrics = pnn_metrics(trained.net.as_oracle(), data, cfg);
        study.rows.push_back(row);
    }
    if (study.rows.size() == 6) {
        study.checks = pnn_checks(study.rows);
        for (int k = 0; k < 3; ++k) {
            study.ed_norm_gaps[static_cast<std::size_t>(k)] =
                std::abs(study.rows[static_cast<std::size_t>(k)].metrics[1] - study.rows[static_cast<std::size_t>(k + 3)].metrics[1]);
        }
    }
    study.all_checks_passed = !study.checks.empty();
    for (const auto& c : study.checks) study.all_checks_passed = study.all_checks_passed && c.passed;
    return study;
}

std::vector<PnnCheck> pnn_checks(const std::vector<PnnTaskRow>& rows, double ed_norm_gap_limit) {
    if (rows.size() != 6) throw ConfigError("ordering checks need all six tasks");
    std::vector<PnnCheck> checks;
    const auto value = [&](int task, std::size_t metric) { return rows[static_cast<std::size_t>(task - 1)].metrics[metric]; };
    for (std::size_t metric : {std::size_t{0}, std::size_t{2}, std::size_t{3}, std::size_t{4}}) {
        for (int base : {1, 4}) {
            const std::string name = std::string(kPnnMetricNames[metric]) + ": task" + std::to_string(base) +
                                     " < task" + std::to_string(base + 1) + " < task" + std::to_string(base + 2);
            checks.push_back({name, value(base, metric) < value(base + 1, metric) &&
                                        value(base + 1, metric) < value(base + 2, metric)});
        }
    }
    for (int k = 1; k <= 3; ++k) {
        checks.push_back({"ed_norm_chebyshev: |task" + std::to_string(k) + " - task" + std::to_string(k + 3) + "| < " +
                              std::to_string(ed_norm_gap_limit).substr(0, 4),
                          std::abs(value(k, 1) - value(k + 3, 1)) < ed_norm_gap_limit});
        checks.push_back({"ed_chebyshev: task" + std::to_string(k) + " < task" + std::to_string(k + 3),
                          value(k, 0) < value(k + 3, 0)});
    }
    return checks;
}

} // namespace edeg
