#include "edeg/estimator.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace edeg {

Eigen::VectorXd FunctionOracle::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim) throw ConfigError("oracle input dimension mismatch");
    Eigen::VectorXd y = evaluate(x);
    if (y.size() != output_dim) throw NumericalError("oracle returned wrong output dimension");
    return y;
}

int Dataset::num_classes() const {
    if (labels.empty()) return 0;
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

Eigen::VectorXd Dataset::one_hot(Eigen::Index i, int classes) const {
    const int label = labels.at(static_cast<std::size_t>(i));
    if (label < 0 || label >= classes) {
        throw ConfigError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    Eigen::VectorXd t = Eigen::VectorXd::Zero(classes);
    t[label] = 1.0;
    return t;
}

PathBatch build_path(const FunctionOracle& f, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                     const PathAbscissas& abscissas) {
    if (x1.size() != x2.size() || x1.size() != f.input_dim) {
        throw ConfigError("path endpoints must match the oracle input dimension");
    }
    PathBatch batch{x1, x2, abscissas, Eigen::MatrixXd(static_cast<Eigen::Index>(abscissas.size()), f.output_dim),
                    false, std::nullopt};
    for (std::size_t i = 0; i < abscissas.size(); ++i) {
        const double a = abscissas.alphas[i];
        const Eigen::VectorXd x = a * x1 + (1.0 - a) * x2;
        batch.raw_outputs.row(static_cast<Eigen::Index>(i)) = f(x).transpose();
    }
    return batch;
}

PathBatch label_anchor(PathBatch batch, const Eigen::VectorXd& t1, const Eigen::VectorXd& t2) {
    const auto& a = batch.abscissas.alphas;
    if (a.size() < 2 || a.front() != 0.0 || a.back() != 1.0) {
        throw ConfigError("label anchoring requires abscissas pinned at 0 and 1");
    }
    if (batch.projection) throw ConfigError("label anchoring must precede projection");
    const Eigen::Index dim = batch.raw_outputs.cols();
    if (t1.size() != dim || t2.size() != dim) throw ConfigError("label dimension does not match outputs");
    batch.raw_outputs.row(0) = t2.transpose();
    batch.raw_outputs.row(batch.raw_outputs.rows() - 1) = t1.transpose();
    batch.anchored = true;
    return batch;
}

PathBatch project_batch(PathBatch batch, int m) {
    batch.projection = pca_project(batch.raw_outputs, m);
    return batch;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const Eigen::ArrayXd e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
        out.row(i) = (e / e.sum()).matrix().transpose();
    }
    return out;
}

PathEvaluation evaluate_path(const Eigen::MatrixXd& outputs, const PathAbscissas& abscissas,
                             const PathFitConfig& cfg, bool want_gradient, const PathProjection* frozen) {
    PathEvaluation out;
    const PathFitter fitter(cfg.basis, abscissas.alphas, cfg.max_degree, cfg.damping);

    Eigen::MatrixXd fit_targets;
    if (frozen != nullptr) {
        out.projection = *frozen;
        fit_targets = frozen->project(outputs);
    } else if (cfg.pca_dim) {
        out.projection = pca_project(outputs, *cfg.pca_dim);
        fit_targets = out.projection->projected;
    } else {
        fit_targets = outputs;
    }

    const Eigen::Index n = fit_targets.cols();
    const Eigen::MatrixXd coeffs = fitter.solve(fit_targets);
    Eigen::MatrixXd grad;
    if (want_gradient) grad.resize(fit_targets.rows(), n);
    out.surrogates.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd c = coeffs.col(j);
        // An exactly constant restriction has no variation to fit; the damped
        // solve would otherwise leak O(eps) mass into higher degrees.
        if ((fit_targets.col(j).array() == fit_targets(0, j)).all()) {
            c.setZero();
            c[0] = fit_targets(0, j);
        }
        out.surrogates.push_back(fitter.surrogate(c));
        if (want_gradient) grad.col(j) = fitter.ed_gradient(out.surrogates.back().coefficients) / static_cast<double>(n);
    }
    out.value = ed_vector(out.surrogates);
    if (want_gradient) out.grad_outputs = out.projection ? out.projection->pullback(grad) : grad;
    return out;
}

PathFitConfig EstimatorConfig::path_fit(int output_dim) const {
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    if (max_degree < 0) throw ConfigError("max_degree must be nonnegative");
    if (resolution < max_degree + 1) throw ConfigError("resolution r must be at least K + 1");
    if (anchored && resolution < 2) throw ConfigError("anchored sampling requires r >= 2");
    if (!(damping >= 0.0)) throw ConfigError("damping must be nonnegative");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    PathFitConfig fit{max_degree, damping, basis, std::nullopt};
    if (use_pca || pca_dim) {
        const int m = pca_dim.value_or(std::min(resolution - 1, output_dim));
        if (m < 1 || m > resolution - 1 || m > output_dim) {
            throw ConfigError("PCA dimension must lie in [1, min(r - 1, output_dim)]");
        }
        fit.pca_dim = m;
    }
    return fit;
}

std::optional<std::pair<Eigen::Index, Eigen::Index>> sample_pair(const Eigen::MatrixXd& inputs,
                                                                 std::uint64_t seed, std::uint64_t index) {
    const auto n = static_cast<std::uint64_t>(inputs.rows());
    const CounterRng rng = CounterRng(seed, 0x7061697273ULL).split(index);
    std::uint64_t counter = 0;
    for (int attempt = 0; attempt < kPairResampleLimit; ++attempt) {
        const auto i = static_cast<Eigen::Index>(rng.below(counter++, n));
        const auto j = static_cast<Eigen::Index>(rng.below(counter++, n));
        if (i == j) continue;
        if ((inputs.row(i) - inputs.row(j)).norm() <= kDegeneratePairTolerance) continue;
        return std::pair{i, j};
    }
    return std::nullopt;
}

EDReport ed_estimate(const FunctionOracle& f, const Dataset& data, const EstimatorConfig& cfg) {
    if (data.size() < 2) throw ConfigError("dataset needs at least two points");
    if (data.input_dim() != f.input_dim) throw ConfigError("dataset dimension does not match the oracle");
    if (cfg.anchored && !data.labeled()) throw ConfigError("anchored estimation requires labels");
    const PathFitConfig fit = cfg.path_fit(f.output_dim);
    const SamplingScheme scheme = cfg.scheme();

    const auto n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<std::optional<PathRecord>> results(n);

    auto run_path = [&](std::size_t p) {
        const auto pair = sample_pair(data.inputs, cfg.seed, p);
        if (!pair) return;
        const auto [i, j] = *pair;
        const PathAbscissas abscissas = sample_abscissas(scheme, cfg.resolution, cfg.seed, p);
        PathBatch batch = build_path(f, data.inputs.row(i).transpose(), data.inputs.row(j).transpose(), abscissas);
        if (cfg.post_softmax) batch.raw_outputs = softmax_rows(batch.raw_outputs);
        if (cfg.anchored) batch = label_anchor(std::move(batch), data.one_hot(i, f.output_dim), data.one_hot(j, f.output_dim));
        const PathEvaluation eval = evaluate_path(batch.raw_outputs, abscissas, fit, false);
        results[p] = PathRecord{p, i, j, eval.value, eval.projection && eval.projection->tied_spectrum};
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n);
    if (workers <= 1) {
        for (std::size_t p = 0; p < n; ++p) run_path(p);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t p = w; p < n; p += workers) run_path(p);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EDReport report;
    report.n_paths = n;
    report.config = cfg;
    for (auto& r : results) {
        if (r) report.per_path.push_back(*r);
        else ++report.skipped;
    }
    if (report.per_path.empty()) throw ConfigError("every sampled pair was degenerate");
    const double count = static_cast<double>(report.per_path.size());
    for (const auto& r : report.per_path) {
        report.mean_ed += r.value.ed;
        report.mean_ed_norm += r.value.ed_norm;
    }
    report.mean_ed /= count;
    report.mean_ed_norm /= count;
    if (report.per_path.size() > 1) {
        double ss = 0.0;
        for (const auto& r : report.per_path) ss += (r.value.ed - report.mean_ed) * (r.value.ed - report.mean_ed);
        report.std_ed = std::sqrt(ss / (count - 1.0));
    }
    return report;
}

} // namespace edeg
