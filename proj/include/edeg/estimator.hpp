#pragma once

#include "edeg/basis.hpp"
#include "edeg/reduce.hpp"
#include "edeg/sampling.hpp"
#include "edeg/surrogate.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace edeg {

/// Black-box vector-valued function. `evaluate` must be deterministic and
/// safe to call concurrently.
struct FunctionOracle {
    int input_dim = 0;
    int output_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluate;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

/// Inputs as rows, with optional integer class labels or regression targets.
struct Dataset {
    Eigen::MatrixXd inputs;
    std::vector<int> labels;
    Eigen::MatrixXd targets;

    Eigen::Index size() const noexcept { return inputs.rows(); }
    int input_dim() const noexcept { return static_cast<int>(inputs.cols()); }
    bool labeled() const noexcept { return !labels.empty(); }
    int num_classes() const;
    Eigen::VectorXd one_hot(Eigen::Index i, int classes) const;
};

/// Samples of f along x(alpha) = alpha x1 + (1 - alpha) x2; rows of
/// `raw_outputs` follow the abscissas.
struct PathBatch {
    Eigen::VectorXd x1;
    Eigen::VectorXd x2;
    PathAbscissas abscissas;
    Eigen::MatrixXd raw_outputs;
    bool anchored = false;
    std::optional<PathProjection> projection;
};

PathBatch build_path(const FunctionOracle& f, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                     const PathAbscissas& abscissas);

/// Replaces the output at alpha = 0 by t2 and at alpha = 1 by t1.
PathBatch label_anchor(PathBatch batch, const Eigen::VectorXd& t1, const Eigen::VectorXd& t2);

/// Projects the batch outputs onto their top-m principal directions.
PathBatch project_batch(PathBatch batch, int m);

/// Row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Settings for fitting one path.
struct PathFitConfig {
    int max_degree = 3;
    double damping = kDefaultDamping;
    BasisKind basis = BasisKind::chebyshev;
    std::optional<int> pca_dim;
};

struct PathEvaluation {
    EDValue value;
    std::vector<PolynomialSurrogate> surrogates;
    /// dED/d(outputs) with shape r x output_dim; empty unless requested.
    Eigen::MatrixXd grad_outputs;
    std::optional<PathProjection> projection;
};

/// Fits one surrogate per (projected) output dimension and averages the ED.
/// When `frozen` is given it replaces the per-path PCA.
PathEvaluation evaluate_path(const Eigen::MatrixXd& outputs, const PathAbscissas& abscissas,
                             const PathFitConfig& cfg, bool want_gradient,
                             const PathProjection* frozen = nullptr);

struct EstimatorConfig {
    int n_paths = 256;
    int resolution = 4;
    int max_degree = 3;
    double damping = kDefaultDamping;
    BasisKind basis = BasisKind::chebyshev;
    SamplingKind sampling = SamplingKind::randomized_cosine;
    bool use_pca = false;
    std::optional<int> pca_dim;  ///< defaults to min(r - 1, output_dim)
    bool anchored = false;
    bool post_softmax = false;
    std::uint64_t seed = 0;
    int threads = 1;

    SamplingScheme scheme() const { return {sampling, anchored}; }
    /// Validates the config against an output dimension and returns the fit settings.
    PathFitConfig path_fit(int output_dim) const;
};

struct PathRecord {
    std::size_t index = 0;
    Eigen::Index first = 0;   ///< dataset row of x1
    Eigen::Index second = 0;  ///< dataset row of x2
    EDValue value;
    bool tied_spectrum = false;
};

struct EDReport {
    std::size_t n_paths = 0;
    std::vector<PathRecord> per_path;
    std::size_t skipped = 0;
    double mean_ed = 0.0;
    double mean_ed_norm = 0.0;
    double std_ed = 0.0;
    EstimatorConfig config;
};

/// Distance below which a sampled pair is treated as the same point.
inline constexpr double kDegeneratePairTolerance = 1e-12;
inline constexpr int kPairResampleLimit = 16;

/// Draws a pair of distinct, non-coincident dataset rows for path `index`,
/// or nothing after the resample limit.
std::optional<std::pair<Eigen::Index, Eigen::Index>> sample_pair(const Eigen::MatrixXd& inputs,
                                                                 std::uint64_t seed,
                                                                 std::uint64_t index);

/// Monte-Carlo ED estimate averaged over random interpolation paths.
EDReport ed_estimate(const FunctionOracle& f, const Dataset& data, const EstimatorConfig& cfg);

} // namespace edeg
