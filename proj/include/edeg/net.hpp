#pragma once

#include "edeg/estimator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace edeg {

enum class Activation { identity, relu, square };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct DenseLayer {
    Eigen::MatrixXd weight;  ///< out x in
    Eigen::VectorXd bias;
    Activation activation = Activation::identity;
};

class FeedForwardNet;

/// Parameter-shaped gradient storage.
struct NetGradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;

    static NetGradients zeros_like(const FeedForwardNet& net);
    void add_scaled(const NetGradients& other, double scale);
    std::vector<double> flatten() const;
};

/// Dense feed-forward network; examples are columns in batched calls.
class FeedForwardNet {
public:
    FeedForwardNet() = default;
    explicit FeedForwardNet(std::vector<DenseLayer> layers);

    /// Layer sizes {in, h1, ..., out}; hidden layers use `hidden`, the output
    /// layer is linear. Weights are N(0, gain^2 / fan_in), biases zero.
    static FeedForwardNet initialize(const std::vector<int>& sizes, Activation hidden, std::uint64_t seed,
                                     double gain = 1.0);

    int input_dim() const;
    int output_dim() const;
    std::size_t parameter_count() const;
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& xs) const;

    /// Cached layer inputs and pre-activations for backpropagation.
    struct Tape {
        std::vector<Eigen::MatrixXd> inputs;
        std::vector<Eigen::MatrixXd> pre;
    };
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& xs, Tape& tape) const;
    NetGradients backward(const Tape& tape, const Eigen::MatrixXd& grad_output) const;

    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);
    void apply_update(const NetGradients& step, double scale);

    FunctionOracle as_oracle() const;

    friend bool operator==(const FeedForwardNet& a, const FeedForwardNet& b);

private:
    std::vector<DenseLayer> layers_;
};

enum class TaskLoss { mse, cross_entropy };
std::string_view to_string(TaskLoss t);
TaskLoss task_loss_from_string(std::string_view name);

/// Examples as columns. Classification targets are one-hot (or soft) columns.
struct Batch {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
};

struct LossAndGrad {
    double loss = 0.0;
    NetGradients grad;
};

/// MSE is the mean over every output entry; cross-entropy is the mean over
/// examples of -sum t log softmax(z).
LossAndGrad task_loss_grad(const FeedForwardNet& net, const Batch& batch, TaskLoss task);
double task_loss(const FeedForwardNet& net, const Batch& batch, TaskLoss task);

enum class Optimizer { sgd, adam };
std::string_view to_string(Optimizer o);
Optimizer optimizer_from_string(std::string_view name);

struct TrainConfig {
    double lambda = 0.0;
    int n_paths = 8;
    int resolution = 4;
    int max_degree = 3;
    double damping = kDefaultDamping;
    BasisKind basis = BasisKind::chebyshev;
    SamplingKind sampling = SamplingKind::randomized_cosine;
    bool use_pca = false;
    std::optional<int> pca_dim;
    bool anchored = false;
    bool post_softmax = false;

    TaskLoss task = TaskLoss::cross_entropy;
    int batch_size = 64;
    double learning_rate = 0.05;
    int steps = 100;
    double ramp_fraction = 0.0;
    double momentum = 0.0;
    Optimizer optimizer = Optimizer::sgd;
    /// Anneal the step size to zero with a half cosine over `steps`.
    bool cosine_decay = false;
    std::uint64_t seed = 0;

    void validate(int output_dim) const;
    PathFitConfig path_fit(int output_dim) const;
    /// lambda * sin(pi/2 * min(1, step / ramp_steps)).
    double lambda_at(int step) const;
    double learning_rate_at(int step) const;
};

/// Total objective L_task + lambda_eff * mean path ED for one minibatch and
/// step. Pairs and abscissas are fixed at construction, so repeated
/// evaluations differ only through the network.
class CompositeObjective {
public:
    CompositeObjective(Batch batch, TrainConfig cfg, int step);

    struct Result {
        double total = 0.0;
        double task = 0.0;
        double ed_term = 0.0;
        double lambda_eff = 0.0;
        std::size_t skipped_paths = 0;
        NetGradients grad;
        std::vector<std::optional<PathProjection>> projections;
    };

    /// With `frozen`, per-path PCA bases are reused instead of recomputed.
    Result evaluate(const FeedForwardNet& net, bool want_gradient,
                    const std::vector<std::optional<PathProjection>>* frozen = nullptr) const;

    std::size_t path_count() const noexcept { return paths_.size(); }

private:
    struct PathPlan {
        Eigen::Index first;
        Eigen::Index second;
        PathAbscissas abscissas;
    };

    Batch batch_;
    TrainConfig cfg_;
    int step_;
    std::vector<std::optional<PathPlan>> paths_;
};

struct StepResult {
    double total_loss = 0.0;
    double task_loss = 0.0;
    double ed_term = 0.0;
    double lambda_eff = 0.0;
};

/// Stateful optimizer loop around CompositeObjective.
class Trainer {
public:
    Trainer(FeedForwardNet net, TrainConfig cfg);

    StepResult step(const Batch& batch);

    const FeedForwardNet& net() const noexcept { return net_; }
    const TrainConfig& config() const noexcept { return cfg_; }
    int steps_taken() const noexcept { return step_; }

private:
    FeedForwardNet net_;
    TrainConfig cfg_;
    int step_ = 0;
    NetGradients velocity_;
    NetGradients second_moment_;
};

/// One plain gradient-descent step (no optimizer state).
struct RegularizedStep {
    double total_loss = 0.0;
    double ed_term = 0.0;
    FeedForwardNet net;
};
RegularizedStep regularized_step(const FeedForwardNet& net, const Batch& batch, const TrainConfig& cfg, int step);

/// Assembles the minibatch for `step` from a dataset (labels are one-hot
/// encoded to `classes` for cross-entropy, targets used for MSE).
Batch make_batch(const Dataset& data, const TrainConfig& cfg, int step, int classes);
Batch full_batch(const Dataset& data, TaskLoss task, int classes);

double classification_accuracy(const FeedForwardNet& net, const Dataset& data);

struct TrainLogRow {
    int step = 0;
    double task_loss = 0.0;
    double ed_term = 0.0;
    double lambda_eff = 0.0;
    std::optional<double> train_accuracy;
};

struct TrainResult {
    FeedForwardNet net;
    std::vector<TrainLogRow> log;
};

/// Runs cfg.steps optimizer steps. Throws NonFiniteLossError on NaN/inf.
TrainResult train(FeedForwardNet net, const Dataset& data, const TrainConfig& cfg);

} // namespace edeg
