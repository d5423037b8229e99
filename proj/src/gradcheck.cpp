#include "edeg/gradcheck.hpp"

#include "edeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace edeg::gradcheck {

double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

SurrogateSuiteReport surrogate_suite(const SurrogateSuiteConfig& cfg) {
    constexpr double kDampings[] = {1e-6, 1e-3};
    SurrogateSuiteReport report;
    std::map<std::tuple<int, int, double>, CellResult> cells;
    const CounterRng rng(cfg.seed, 0x67726164ULL);

    for (std::uint64_t attempt = 0; report.checked < cfg.instances; ++attempt) {
        const CounterRng inst = rng.split(attempt);
        const int r = 4 + static_cast<int>(inst.below(0, 12));
        const int k_max = std::min(14, r - 1);
        const int K = 3 + static_cast<int>(inst.below(1, static_cast<std::uint64_t>(k_max - 3 + 1)));
        const double eps = kDampings[inst.below(2, 2)];
        const BasisKind basis = inst.below(3, 4) == 0 ? BasisKind::legendre : BasisKind::chebyshev;
        const PathAbscissas alphas = randomized_cosine(r, inst.bits(4), false);
        Eigen::VectorXd y(r);
        for (int i = 0; i < r; ++i) y[i] = inst.normal(16 + static_cast<std::uint64_t>(i));

        const PathFitter fitter(basis, alphas.alphas, K, eps);
        const Eigen::VectorXd c = fitter.solve(y);
        if ((c.array().abs() <= 1e-8).any()) {
            ++report.skipped;
            continue;
        }
        const Eigen::VectorXd analytic =
            fitter.design().matrix() *
            Eigen::PartialPivLU<Eigen::MatrixXd>(fitter.design().matrix().transpose() * fitter.design().matrix() +
                                                 eps * Eigen::MatrixXd::Identity(K + 1, K + 1))
                .solve(detail::ed_coefficient_gradient(c, cfg.corrupt_sign ? -1.0 : 1.0));

        CellResult& cell = cells[{r, K, eps}];
        cell.resolution = r;
        cell.max_degree = K;
        cell.damping = eps;
        ++cell.instances;
        for (int i = 0; i < r; ++i) {
            Eigen::VectorXd yp = y;
            Eigen::VectorXd ym = y;
            yp[i] += cfg.fd_step;
            ym[i] -= cfg.fd_step;
            const double numeric =
                (effective_degree(fitter.solve(yp)).ed - effective_degree(fitter.solve(ym)).ed) / (2.0 * cfg.fd_step);
            const double err = relative_error(analytic[i], numeric);
            cell.max_rel_error = std::max(cell.max_rel_error, err);
            ++cell.coordinates;
        }
        report.max_rel_error = std::max(report.max_rel_error, cell.max_rel_error);
        ++report.checked;
    }
    for (auto& [key, cell] : cells) report.cells.push_back(cell);
    report.passed = report.max_rel_error < cfg.tolerance;
    return report;
}

double check_objective(const CompositeObjective& objective, const FeedForwardNet& net, double fd_step) {
    const auto base = objective.evaluate(net, true);
    const std::vector<double> analytic = base.grad.flatten();
    std::vector<double> params = net.parameters();
    FeedForwardNet probe = net;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + fd_step;
        probe.set_parameters(params);
        const double up = objective.evaluate(probe, false, &base.projections).total;
        params[k] = saved - fd_step;
        probe.set_parameters(params);
        const double down = objective.evaluate(probe, false, &base.projections).total;
        params[k] = saved;
        worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * fd_step)));
    }
    return worst;
}

CompositeSuiteReport composite_suite(const CompositeSuiteConfig& cfg) {
    CompositeSuiteReport report;
    const CounterRng rng(cfg.seed, 0x636f6d70ULL);
    for (std::size_t n = 0; n < cfg.instances; ++n) {
        const CounterRng inst = rng.split(n);
        std::uint64_t counter = 0;
        const int d = 2 + static_cast<int>(inst.below(counter++, 2));
        const int hidden = 3 + static_cast<int>(inst.below(counter++, 3));
        const int classes = 3;
        const Activation act = inst.below(counter++, 2) == 0 ? Activation::relu : Activation::square;

        TrainConfig tc;
        tc.lambda = 0.5 + inst.uniform(counter++);
        tc.n_paths = 3;
        tc.resolution = 4 + static_cast<int>(inst.below(counter++, 4));
        tc.max_degree = 3 + static_cast<int>(inst.below(counter++, static_cast<std::uint64_t>(tc.resolution - 3)));
        tc.damping = inst.below(counter++, 2) == 0 ? 1e-6 : 1e-3;
        tc.sampling = inst.below(counter++, 2) == 0 ? SamplingKind::randomized_cosine : SamplingKind::chebyshev_fixed;
        const auto mode = inst.below(counter++, 4);
        tc.anchored = mode == 1 || mode == 3;
        tc.use_pca = mode >= 2;
        tc.post_softmax = tc.anchored || inst.below(counter++, 2) == 0;
        tc.task = tc.anchored || inst.below(counter++, 2) == 0 ? TaskLoss::cross_entropy : TaskLoss::mse;
        if (tc.use_pca) tc.pca_dim = 1 + static_cast<int>(inst.below(counter++, 2));
        tc.batch_size = 6;
        tc.seed = inst.bits(counter++);

        FeedForwardNet net = FeedForwardNet::initialize({d, hidden, classes}, act, inst.bits(counter++), 1.0);
        for (auto& layer : net.layers()) {
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.1 * inst.normal(counter++);
        }
        Batch batch{Eigen::MatrixXd(d, tc.batch_size), Eigen::MatrixXd::Zero(classes, tc.batch_size)};
        for (int j = 0; j < tc.batch_size; ++j) {
            for (int i = 0; i < d; ++i) batch.inputs(i, j) = inst.normal(counter++);
            if (tc.task == TaskLoss::cross_entropy) {
                batch.targets(static_cast<Eigen::Index>(inst.below(counter++, classes)), j) = 1.0;
            } else {
                for (int i = 0; i < classes; ++i) batch.targets(i, j) = inst.normal(counter++);
            }
        }

        const CompositeObjective objective(batch, tc, 0);
        CompositeCase c;
        c.description = std::string(to_string(act)) + " r=" + std::to_string(tc.resolution) +
                        " K=" + std::to_string(tc.max_degree) + " eps=" + (tc.damping < 1e-4 ? "1e-06" : "1e-03") +
                        " " + std::string(to_string(tc.sampling)) + (tc.anchored ? " anchored" : "") +
                        (tc.use_pca ? " pca=" + std::to_string(*tc.pca_dim) : "") +
                        (tc.post_softmax ? " softmax" : "") + " " + std::string(to_string(tc.task));
        c.parameters = net.parameter_count();
        c.max_rel_error = check_objective(objective, net, cfg.fd_step);
        report.max_rel_error = std::max(report.max_rel_error, c.max_rel_error);
        report.cases.push_back(std::move(c));
    }
    report.passed = report.max_rel_error < cfg.tolerance;
    return report;
}

} // namespace edeg::gradcheck
