#include "edeg/net.hpp"

#include "edeg/error.hpp"
#include "edeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

namespace edeg {

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::square: return z.cwiseProduct(z);
    }
    return z;
}

// Elementwise derivative; the ReLU subgradient at 0 is 0.
Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
    case Activation::identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::square: return 2.0 * z;
    }
    return z;
}

Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& logits) { return softmax_rows(logits.transpose()).transpose(); }

} // namespace

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::square: return "square";
    }
    return "?";
}

Activation activation_from_string(std::string_view name) {
    if (name == "identity" || name == "linear") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "square") return Activation::square;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(TaskLoss t) { return t == TaskLoss::mse ? "mse" : "cross_entropy"; }

TaskLoss task_loss_from_string(std::string_view name) {
    if (name == "mse") return TaskLoss::mse;
    if (name == "cross_entropy") return TaskLoss::cross_entropy;
    throw ConfigError("unknown task loss '" + std::string(name) + "'");
}

std::string_view to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

Optimizer optimizer_from_string(std::string_view name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// NetGradients

NetGradients NetGradients::zeros_like(const FeedForwardNet& net) {
    NetGradients g;
    for (const auto& layer : net.layers()) {
        g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
        g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
    return g;
}

void NetGradients::add_scaled(const NetGradients& other, double scale) {
    for (std::size_t l = 0; l < weight.size(); ++l) {
        weight[l] += scale * other.weight[l];
        bias[l] += scale * other.bias[l];
    }
}

std::vector<double> NetGradients::flatten() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < weight.size(); ++l) {
        for (Eigen::Index i = 0; i < weight[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < weight[l].cols(); ++j) out.push_back(weight[l](i, j));
        }
        out.insert(out.end(), bias[l].data(), bias[l].data() + bias[l].size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// FeedForwardNet

FeedForwardNet::FeedForwardNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ConfigError("a network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.bias.size() != layer.weight.rows()) throw ConfigError("bias size does not match layer width");
        if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
            throw ConfigError("layer " + std::to_string(l) + " input size does not match previous layer");
        }
    }
}

FeedForwardNet FeedForwardNet::initialize(const std::vector<int>& sizes, Activation hidden, std::uint64_t seed,
                                          double gain) {
    if (sizes.size() < 2) throw ConfigError("need at least input and output sizes");
    const CounterRng rng(seed, 0x696e6974ULL);
    std::uint64_t counter = 0;
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l];
        const int out = sizes[l + 1];
        if (in < 1 || out < 1) throw ConfigError("layer sizes must be positive");
        DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out),
                         l + 2 == sizes.size() ? Activation::identity : hidden};
        const double scale = gain / std::sqrt(static_cast<double>(in));
        for (int i = 0; i < out; ++i) {
            for (int j = 0; j < in; ++j) layer.weight(i, j) = scale * rng.normal(counter++);
        }
        layers.push_back(std::move(layer));
    }
    return FeedForwardNet(std::move(layers));
}

int FeedForwardNet::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int FeedForwardNet::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

std::size_t FeedForwardNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

Eigen::VectorXd FeedForwardNet::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim()) throw ConfigError("input dimension mismatch");
    Eigen::VectorXd a = x;
    for (const auto& layer : layers_) a = activate(layer.activation, layer.weight * a + layer.bias);
    return a;
}

Eigen::MatrixXd FeedForwardNet::forward_batch(const Eigen::MatrixXd& xs) const {
    if (xs.rows() != input_dim()) throw ConfigError("input dimension mismatch");
    Eigen::MatrixXd a = xs;
    for (const auto& layer : layers_) {
        a = activate(layer.activation, (layer.weight * a).colwise() + layer.bias);
    }
    return a;
}

Eigen::MatrixXd FeedForwardNet::forward_batch(const Eigen::MatrixXd& xs, Tape& tape) const {
    if (xs.rows() != input_dim()) throw ConfigError("input dimension mismatch");
    tape.inputs.clear();
    tape.pre.clear();
    Eigen::MatrixXd a = xs;
    for (const auto& layer : layers_) {
        tape.inputs.push_back(a);
        tape.pre.push_back((layer.weight * a).colwise() + layer.bias);
        a = activate(layer.activation, tape.pre.back());
    }
    return a;
}

NetGradients FeedForwardNet::backward(const Tape& tape, const Eigen::MatrixXd& grad_output) const {
    NetGradients g = NetGradients::zeros_like(*this);
    Eigen::MatrixXd upstream = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const Eigen::MatrixXd dz = upstream.cwiseProduct(activation_slope(layer.activation, tape.pre[l]));
        g.weight[l] = dz * tape.inputs[l].transpose();
        g.bias[l] = dz.rowwise().sum();
        if (l > 0) upstream = layer.weight.transpose() * dz;
    }
    return g;
}

std::vector<double> FeedForwardNet::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) out.push_back(layer.weight(i, j));
        }
        out.insert(out.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
    }
    return out;
}

void FeedForwardNet::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) throw ConfigError("parameter vector length mismatch");
    std::size_t k = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = values[k++];
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = values[k++];
    }
}

void FeedForwardNet::apply_update(const NetGradients& step, double scale) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].weight += scale * step.weight[l];
        layers_[l].bias += scale * step.bias[l];
    }
}

FunctionOracle FeedForwardNet::as_oracle() const {
    auto snapshot = std::make_shared<const FeedForwardNet>(*this);
    return {input_dim(), output_dim(), [snapshot](const Eigen::VectorXd& x) { return snapshot->forward(x); }};
}

bool operator==(const FeedForwardNet& a, const FeedForwardNet& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
        const auto& x = a.layers_[l];
        const auto& y = b.layers_[l];
        if (x.activation != y.activation || x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() ||
            x.weight != y.weight || x.bias != y.bias) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

// Loss value and dL/d(outputs).
std::pair<double, Eigen::MatrixXd> loss_and_output_grad(const Eigen::MatrixXd& out, const Eigen::MatrixXd& targets,
                                                        TaskLoss task) {
    if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
        throw ConfigError("targets do not match network outputs");
    }
    const double n = static_cast<double>(out.cols());
    if (task == TaskLoss::mse) {
        const Eigen::MatrixXd diff = out - targets;
        const double count = static_cast<double>(diff.size());
        return {diff.squaredNorm() / count, 2.0 * diff / count};
    }
    const Eigen::MatrixXd probs = softmax_cols(out);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double m = out.col(j).maxCoeff();
        const double lse = m + std::log((out.col(j).array() - m).exp().sum());
        loss += (targets.col(j).array() * (lse - out.col(j).array())).sum();
    }
    Eigen::MatrixXd grad = probs.array().rowwise() * targets.colwise().sum().array();
    grad -= targets;
    return {loss / n, grad / n};
}

} // namespace

LossAndGrad task_loss_grad(const FeedForwardNet& net, const Batch& batch, TaskLoss task) {
    FeedForwardNet::Tape tape;
    const Eigen::MatrixXd out = net.forward_batch(batch.inputs, tape);
    auto [loss, grad_out] = loss_and_output_grad(out, batch.targets, task);
    return {loss, net.backward(tape, grad_out)};
}

double task_loss(const FeedForwardNet& net, const Batch& batch, TaskLoss task) {
    return loss_and_output_grad(net.forward_batch(batch.inputs), batch.targets, task).first;
}

// ---------------------------------------------------------------------------
// Training configuration

void TrainConfig::validate(int output_dim) const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    if (max_degree < 0) throw ConfigError("max_degree must be nonnegative");
    if (resolution < max_degree + 1) throw ConfigError("resolution r must be at least K + 1");
    if (anchored && task != TaskLoss::cross_entropy) throw ConfigError("label anchoring requires a classification task");
    if (batch_size < 2) throw ConfigError("batch size must be at least 2");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (steps < 0) throw ConfigError("step count must be nonnegative");
    if (!(ramp_fraction >= 0.0 && ramp_fraction <= 1.0)) throw ConfigError("ramp fraction must lie in [0, 1]");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    (void)path_fit(output_dim);
}

PathFitConfig TrainConfig::path_fit(int output_dim) const {
    EstimatorConfig est;
    est.n_paths = n_paths;
    est.resolution = resolution;
    est.max_degree = max_degree;
    est.damping = damping;
    est.basis = basis;
    est.sampling = sampling;
    est.use_pca = use_pca;
    est.pca_dim = pca_dim;
    est.anchored = anchored;
    return est.path_fit(output_dim);
}

double TrainConfig::lambda_at(int step) const {
    const double ramp_steps = ramp_fraction * steps;
    if (ramp_steps <= 0.0) return lambda;
    return lambda * std::sin(std::numbers::pi / 2.0 * std::min(1.0, step / ramp_steps));
}

double TrainConfig::learning_rate_at(int step) const {
    if (!cosine_decay || steps <= 0) return learning_rate;
    return learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, static_cast<double>(step) / steps)));
}

// ---------------------------------------------------------------------------
// Composite objective

namespace {

std::uint64_t step_seed(std::uint64_t seed, int step) {
    return CounterRng(seed, 0x73746570ULL).bits(static_cast<std::uint64_t>(step));
}

} // namespace

CompositeObjective::CompositeObjective(Batch batch, TrainConfig cfg, int step)
    : batch_(std::move(batch)), cfg_(std::move(cfg)), step_(step) {
    if (batch_.inputs.cols() < 2) throw ConfigError("ED regularization needs a batch of at least two examples");
    const std::uint64_t seed = step_seed(cfg_.seed, step_);
    const Eigen::MatrixXd rows = batch_.inputs.transpose();
    const SamplingScheme scheme{cfg_.sampling, cfg_.anchored};
    paths_.resize(static_cast<std::size_t>(cfg_.n_paths));
    for (std::size_t p = 0; p < paths_.size(); ++p) {
        const auto pair = sample_pair(rows, seed, p);
        if (!pair) continue;
        paths_[p] = PathPlan{pair->first, pair->second, sample_abscissas(scheme, cfg_.resolution, seed, p)};
    }
}

CompositeObjective::Result CompositeObjective::evaluate(const FeedForwardNet& net, bool want_gradient,
                                                        const std::vector<std::optional<PathProjection>>* frozen) const {
    const PathFitConfig fit = cfg_.path_fit(net.output_dim());
    Result res;
    res.lambda_eff = cfg_.lambda_at(step_);
    if (want_gradient) {
        auto task = task_loss_grad(net, batch_, cfg_.task);
        res.task = task.loss;
        res.grad = std::move(task.grad);
    } else {
        res.task = task_loss(net, batch_, cfg_.task);
    }
    if (!std::isfinite(res.task)) throw NonFiniteLossError("task loss is not finite");
    res.projections.resize(paths_.size());

    std::size_t used = 0;
    NetGradients ed_grad = want_gradient ? NetGradients::zeros_like(net) : NetGradients{};
    const bool ed_gradient_needed = want_gradient && res.lambda_eff != 0.0;
    for (std::size_t p = 0; p < paths_.size(); ++p) {
        if (!paths_[p]) {
            ++res.skipped_paths;
            continue;
        }
        const PathPlan& plan = *paths_[p];
        const auto r = static_cast<Eigen::Index>(plan.abscissas.size());
        const Eigen::VectorXd x1 = batch_.inputs.col(plan.first);
        const Eigen::VectorXd x2 = batch_.inputs.col(plan.second);
        Eigen::MatrixXd xs(x1.size(), r);
        for (Eigen::Index i = 0; i < r; ++i) {
            const double a = plan.abscissas.alphas[static_cast<std::size_t>(i)];
            xs.col(i) = a * x1 + (1.0 - a) * x2;
        }
        FeedForwardNet::Tape tape;
        const Eigen::MatrixXd logits = net.forward_batch(xs, tape).transpose();  // r x o
        if (!logits.allFinite()) throw NonFiniteLossError("network output along a path is not finite");
        Eigen::MatrixXd ys = cfg_.post_softmax ? softmax_rows(logits) : logits;
        const Eigen::MatrixXd probs = ys;
        if (cfg_.anchored) {
            ys.row(0) = batch_.targets.col(plan.second).transpose();
            ys.row(r - 1) = batch_.targets.col(plan.first).transpose();
        }
        const PathProjection* frozen_p =
            frozen != nullptr && (*frozen)[p] ? &*(*frozen)[p] : nullptr;
        PathEvaluation eval = evaluate_path(ys, plan.abscissas, fit, ed_gradient_needed, frozen_p);
        res.ed_term += eval.value.ed;
        res.projections[p] = std::move(eval.projection);
        ++used;
        if (!ed_gradient_needed) continue;

        Eigen::MatrixXd g = eval.grad_outputs;  // r x o
        if (cfg_.anchored) {
            // Anchored rows are labels, not model outputs.
            g.row(0).setZero();
            g.row(r - 1).setZero();
        }
        if (cfg_.post_softmax) {
            for (Eigen::Index i = 0; i < r; ++i) {
                const double dot = g.row(i).dot(probs.row(i));
                g.row(i) = (probs.row(i).array() * (g.row(i).array() - dot)).matrix();
            }
        }
        ed_grad.add_scaled(net.backward(tape, g.transpose()), 1.0);
    }
    if (used == 0) throw ConfigError("every sampled pair in the batch was degenerate");
    res.ed_term /= static_cast<double>(used);
    res.total = res.task + res.lambda_eff * res.ed_term;
    if (ed_gradient_needed) res.grad.add_scaled(ed_grad, res.lambda_eff / static_cast<double>(used));
    return res;
}

// ---------------------------------------------------------------------------
// Optimizers

Trainer::Trainer(FeedForwardNet net, TrainConfig cfg) : net_(std::move(net)), cfg_(std::move(cfg)) {
    cfg_.validate(net_.output_dim());
    velocity_ = NetGradients::zeros_like(net_);
    second_moment_ = NetGradients::zeros_like(net_);
}

StepResult Trainer::step(const Batch& batch) {
    const CompositeObjective objective(batch, cfg_, step_);
    CompositeObjective::Result res = objective.evaluate(net_, true);
    if (!std::isfinite(res.total)) {
        throw NonFiniteLossError("non-finite loss at step " + std::to_string(step_));
    }
    const double lr = cfg_.learning_rate_at(step_);
    ++step_;
    if (cfg_.optimizer == Optimizer::sgd) {
        if (cfg_.momentum > 0.0) {
            for (std::size_t l = 0; l < velocity_.weight.size(); ++l) {
                velocity_.weight[l] = cfg_.momentum * velocity_.weight[l] + res.grad.weight[l];
                velocity_.bias[l] = cfg_.momentum * velocity_.bias[l] + res.grad.bias[l];
            }
            net_.apply_update(velocity_, -lr);
        } else {
            net_.apply_update(res.grad, -lr);
        }
    } else {
        constexpr double beta1 = 0.9;
        constexpr double beta2 = 0.999;
        constexpr double tiny = 1e-8;
        const double c1 = 1.0 - std::pow(beta1, step_);
        const double c2 = 1.0 - std::pow(beta2, step_);
        NetGradients update = NetGradients::zeros_like(net_);
        for (std::size_t l = 0; l < velocity_.weight.size(); ++l) {
            velocity_.weight[l] = beta1 * velocity_.weight[l] + (1.0 - beta1) * res.grad.weight[l];
            velocity_.bias[l] = beta1 * velocity_.bias[l] + (1.0 - beta1) * res.grad.bias[l];
            second_moment_.weight[l] =
                beta2 * second_moment_.weight[l] + (1.0 - beta2) * res.grad.weight[l].cwiseAbs2();
            second_moment_.bias[l] = beta2 * second_moment_.bias[l] + (1.0 - beta2) * res.grad.bias[l].cwiseAbs2();
            update.weight[l] = (velocity_.weight[l] / c1).array() /
                               ((second_moment_.weight[l] / c2).array().sqrt() + tiny);
            update.bias[l] =
                (velocity_.bias[l] / c1).array() / ((second_moment_.bias[l] / c2).array().sqrt() + tiny);
        }
        net_.apply_update(update, -lr);
    }
    return {res.total, res.task, res.ed_term, res.lambda_eff};
}

RegularizedStep regularized_step(const FeedForwardNet& net, const Batch& batch, const TrainConfig& cfg, int step) {
    cfg.validate(net.output_dim());
    const CompositeObjective objective(batch, cfg, step);
    const CompositeObjective::Result res = objective.evaluate(net, true);
    RegularizedStep out{res.total, res.ed_term, net};
    out.net.apply_update(res.grad, -cfg.learning_rate);
    return out;
}

// ---------------------------------------------------------------------------
// Data plumbing

namespace {

Batch gather(const Dataset& data, const std::vector<Eigen::Index>& rows, TaskLoss task, int classes) {
    Batch b;
    b.inputs.resize(data.input_dim(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) b.inputs.col(static_cast<Eigen::Index>(k)) = data.inputs.row(rows[k]).transpose();
    if (task == TaskLoss::cross_entropy) {
        if (!data.labeled()) throw ConfigError("cross-entropy training requires labels");
        b.targets.resize(classes, static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) b.targets.col(static_cast<Eigen::Index>(k)) = data.one_hot(rows[k], classes);
    } else {
        if (data.targets.rows() != data.size()) throw ConfigError("regression training requires target columns");
        b.targets.resize(data.targets.cols(), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) b.targets.col(static_cast<Eigen::Index>(k)) = data.targets.row(rows[k]).transpose();
    }
    return b;
}

} // namespace

Batch full_batch(const Dataset& data, TaskLoss task, int classes) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.size()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    return gather(data, rows, task, classes);
}

Batch make_batch(const Dataset& data, const TrainConfig& cfg, int step, int classes) {
    const auto n = static_cast<std::size_t>(data.size());
    std::vector<Eigen::Index> rows(n);
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    const auto b = static_cast<std::size_t>(cfg.batch_size);
    if (b < n) {
        const CounterRng rng = CounterRng(cfg.seed, 0x62617463ULL).split(static_cast<std::uint64_t>(step));
        for (std::size_t k = 0; k < b; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.below(k, n - k));
            std::swap(rows[k], rows[pick]);
        }
        rows.resize(b);
    }
    return gather(data, rows, cfg.task, classes);
}

double classification_accuracy(const FeedForwardNet& net, const Dataset& data) {
    if (!data.labeled()) throw ConfigError("accuracy requires labels");
    const Eigen::MatrixXd out = net.forward_batch(data.inputs.transpose());
    std::size_t correct = 0;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        Eigen::Index arg = 0;
        out.col(j).maxCoeff(&arg);
        if (arg == data.labels[static_cast<std::size_t>(j)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(out.cols());
}

TrainResult train(FeedForwardNet net, const Dataset& data, const TrainConfig& cfg) {
    const int classes = net.output_dim();
    Trainer trainer(std::move(net), cfg);
    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(cfg.steps));
    for (int s = 0; s < cfg.steps; ++s) {
        const Batch batch = make_batch(data, cfg, s, classes);
        const StepResult step = trainer.step(batch);
        TrainLogRow row{s, step.task_loss, step.ed_term, step.lambda_eff, std::nullopt};
        if (cfg.task == TaskLoss::cross_entropy) row.train_accuracy = classification_accuracy(trainer.net(), data);
        result.log.push_back(row);
    }
    result.net = trainer.net();
    return result;
}

} // namespace edeg
