#include "cli.hpp"

#include "edeg/datasets.hpp"
#include "edeg/error.hpp"
#include "edeg/estimator.hpp"
#include "edeg/gradcheck.hpp"
#include "edeg/io.hpp"
#include "edeg/net.hpp"
#include "edeg/pnn_study.hpp"
#include "edeg/polylab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace edeg::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string canonical_hash(const json& artifact) {
    json copy = artifact;
    if (copy.is_object()) {
        copy.erase("created_at");
        copy.erase("canonical_hash");
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : copy.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "json";
    std::vector<std::string> sets;
};

fs::path output_dir(const CommonOptions& opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char* env = std::getenv("EDEG_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "edeg-out";
}

json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + " is not valid JSON: " + e.what());
    }
}

/// defaults <- config file <- --set overrides <- --seed.
json resolve_config(const json& defaults, const CommonOptions& opt) {
    json cfg = defaults;
    auto assign = [&](const std::string& key, const json& value) {
        if (!cfg.contains(key)) throw ConfigError("unknown config key '" + key + "'");
        // Keep the echoed config canonical: 0 and 0.0 must hash the same.
        if (cfg[key].is_number_float() && value.is_number()) {
            cfg[key] = value.get<double>();
        } else {
            cfg[key] = value;
        }
    };
    if (!opt.config_path.empty()) {
        const json file = parse_json_text(io::read_file(opt.config_path), "config " + opt.config_path);
        if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [key, value] : file.items()) assign(key, value);
    }
    for (const auto& s : opt.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        const std::string key = s.substr(0, eq);
        const std::string raw = s.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        assign(key, value);
    }
    if (opt.seed) cfg["seed"] = *opt.seed;
    return cfg;
}

template <class T>
T get(const json& cfg, const char* key) {
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

std::optional<int> get_optional_int(const json& cfg, const char* key) {
    if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
    return get<int>(cfg, key);
}

std::string now_iso() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json envelope(const std::string& command, const json& config, const json& body) {
    json a = body;
    a["command"] = command;
    a["version"] = EDEG_VERSION;
    a["config"] = config;
    a["created_at"] = now_iso();
    a["canonical_hash"] = canonical_hash(a);
    return a;
}

void write_json(const fs::path& path, const json& doc) { io::write_file_atomic(path, doc.dump(2) + "\n"); }

/// CSV text with a header row; each file also carries the resolved config
/// hash so it can be tied back to its JSON sibling.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row(header); }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << io::csv_field(fields[i]);
        out_ << "\r\n";
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

std::string num(double v) { return io::format_double(v); }

void emit(const CommonOptions& opt, const json& summary, const std::string& csv) {
    if (opt.format == "csv") std::cout << csv;
    else std::cout << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Oracles

FunctionOracle make_oracle(const json& spec, int input_dim) {
    const std::string kind = get<std::string>(spec, "kind");
    if (kind == "constant") {
        Eigen::VectorXd value;
        if (spec.at("value").is_array()) {
            const auto v = get<std::vector<double>>(spec, "value");
            value = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        } else {
            const int dim = spec.contains("output_dim") ? get<int>(spec, "output_dim") : 1;
            value = Eigen::VectorXd::Constant(dim, get<double>(spec, "value"));
        }
        return {input_dim, static_cast<int>(value.size()), [value](const Eigen::VectorXd&) { return value; }};
    }
    if (kind == "affine") {
        const auto rows = get<std::vector<std::vector<double>>>(spec, "matrix");
        if (rows.empty()) throw ConfigError("affine oracle needs a nonempty matrix");
        Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), input_dim);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(rows[i].size()) != input_dim) throw ConfigError("affine matrix width must equal input dimension");
            for (int j = 0; j < input_dim; ++j) a(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
        Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
        if (spec.contains("offset")) {
            const auto v = get<std::vector<double>>(spec, "offset");
            if (static_cast<Eigen::Index>(v.size()) != a.rows()) throw ConfigError("affine offset length mismatch");
            b = Eigen::Map<const Eigen::VectorXd>(v.data(), a.rows());
        }
        return {input_dim, static_cast<int>(a.rows()), [a, b](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x + b; }};
    }
    if (kind == "polynomial") {
        auto polys = std::make_shared<std::vector<polylab::MultiPoly>>();
        for (const auto& text : get<std::vector<std::string>>(spec, "polynomials")) {
            polys->push_back(polylab::parse_polynomial(text, static_cast<std::size_t>(input_dim)));
        }
        if (polys->empty()) throw ConfigError("polynomial oracle needs at least one polynomial");
        return {input_dim, static_cast<int>(polys->size()), [polys](const Eigen::VectorXd& x) {
                    Eigen::VectorXd y(static_cast<Eigen::Index>(polys->size()));
                    for (std::size_t i = 0; i < polys->size(); ++i) {
                        y[static_cast<Eigen::Index>(i)] = (*polys)[i].evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
                    }
                    return y;
                }};
    }
    if (kind == "checkpoint") {
        const io::Checkpoint ck = io::load_checkpoint(get<std::string>(spec, "path"));
        if (ck.net.input_dim() != input_dim) throw ConfigError("checkpoint input dimension does not match dataset");
        return ck.net.as_oracle();
    }
    throw ConfigError("unknown oracle kind '" + kind + "'");
}

Dataset load_dataset(const json& cfg) {
    const std::string path = get<std::string>(cfg, "dataset");
    if (path.empty()) throw ConfigError("config field 'dataset' is required");
    return io::read_dataset_csv(path);
}

// ---------------------------------------------------------------------------
// estimate

json estimate_defaults() {
    return {{"dataset", ""},
            {"oracle", {{"kind", "constant"}, {"value", 0.0}, {"output_dim", 1}}},
            {"n_paths", 256},
            {"resolution", 4},
            {"max_degree", 3},
            {"damping", kDefaultDamping},
            {"basis", "chebyshev"},
            {"sampling", "randomized_cosine"},
            {"pca", false},
            {"pca_dim", nullptr},
            {"anchored", false},
            {"post_softmax", false},
            {"threads", 1},
            {"seed", 0}};
}

EstimatorConfig estimator_config(const json& cfg) {
    EstimatorConfig e;
    e.n_paths = get<int>(cfg, "n_paths");
    e.resolution = get<int>(cfg, "resolution");
    e.max_degree = get<int>(cfg, "max_degree");
    e.damping = get<double>(cfg, "damping");
    e.basis = basis_from_string(get<std::string>(cfg, "basis"));
    e.sampling = sampling_from_string(get<std::string>(cfg, "sampling"));
    e.use_pca = get<bool>(cfg, "pca");
    e.pca_dim = get_optional_int(cfg, "pca_dim");
    e.anchored = get<bool>(cfg, "anchored");
    e.post_softmax = get<bool>(cfg, "post_softmax");
    e.seed = get<std::uint64_t>(cfg, "seed");
    if (cfg.contains("threads")) e.threads = get<int>(cfg, "threads");
    return e;
}

int cmd_estimate(const CommonOptions& opt) {
    const json cfg = resolve_config(estimate_defaults(), opt);
    const Dataset data = load_dataset(cfg);
    const FunctionOracle f = make_oracle(cfg.at("oracle"), data.input_dim());
    const EDReport report = ed_estimate(f, data, estimator_config(cfg));

    CsvWriter csv({"path", "first", "second", "ed", "ed_norm", "tied_spectrum"});
    json per_path = json::array();
    for (const auto& p : report.per_path) {
        csv.row({std::to_string(p.index), std::to_string(p.first), std::to_string(p.second), num(p.value.ed),
                 num(p.value.ed_norm), p.tied_spectrum ? "1" : "0"});
        per_path.push_back({{"path", p.index}, {"first", p.first}, {"second", p.second}, {"ed", p.value.ed},
                            {"ed_norm", p.value.ed_norm}, {"tied_spectrum", p.tied_spectrum}});
    }
    const json summary = {{"n_paths", report.n_paths}, {"skipped", report.skipped}, {"mean_ed", report.mean_ed},
                          {"mean_ed_norm", report.mean_ed_norm}, {"std_ed", report.std_ed}};
    json body = summary;
    body["per_path"] = std::move(per_path);
    const fs::path dir = output_dir(opt);
    write_json(dir / "report.json", envelope("estimate", cfg, body));
    io::write_file_atomic(dir / "per_path.csv", csv.str());
    emit(opt, summary, csv.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// train

json train_defaults() {
    return {{"dataset", ""},
            {"hidden", {16, 16}},
            {"activation", "relu"},
            {"task", "cross_entropy"},
            {"classes", nullptr},
            {"lambda", 0.0},
            {"n_paths", 8},
            {"resolution", 4},
            {"max_degree", 3},
            {"damping", kDefaultDamping},
            {"basis", "chebyshev"},
            {"sampling", "randomized_cosine"},
            {"pca", false},
            {"pca_dim", nullptr},
            {"anchored", false},
            {"post_softmax", false},
            {"batch_size", 64},
            {"learning_rate", 0.05},
            {"steps", 100},
            {"ramp_fraction", 0.0},
            {"momentum", 0.0},
            {"optimizer", "sgd"},
            {"cosine_decay", false},
            {"init_gain", 1.0},
            {"measure_paths", 512},
            {"seed", 0}};
}

TrainConfig train_config(const json& cfg) {
    TrainConfig t;
    t.lambda = get<double>(cfg, "lambda");
    t.n_paths = get<int>(cfg, "n_paths");
    t.resolution = get<int>(cfg, "resolution");
    t.max_degree = get<int>(cfg, "max_degree");
    t.damping = get<double>(cfg, "damping");
    t.basis = basis_from_string(get<std::string>(cfg, "basis"));
    t.sampling = sampling_from_string(get<std::string>(cfg, "sampling"));
    t.use_pca = get<bool>(cfg, "pca");
    t.pca_dim = get_optional_int(cfg, "pca_dim");
    t.anchored = get<bool>(cfg, "anchored");
    t.post_softmax = get<bool>(cfg, "post_softmax");
    t.task = task_loss_from_string(get<std::string>(cfg, "task"));
    t.batch_size = get<int>(cfg, "batch_size");
    t.learning_rate = get<double>(cfg, "learning_rate");
    t.steps = get<int>(cfg, "steps");
    t.ramp_fraction = get<double>(cfg, "ramp_fraction");
    t.momentum = get<double>(cfg, "momentum");
    t.optimizer = optimizer_from_string(get<std::string>(cfg, "optimizer"));
    t.cosine_decay = get<bool>(cfg, "cosine_decay");
    t.seed = get<std::uint64_t>(cfg, "seed");
    return t;
}

int cmd_train(const CommonOptions& opt) {
    const json cfg = resolve_config(train_defaults(), opt);
    const Dataset data = load_dataset(cfg);
    const TrainConfig tc = train_config(cfg);

    int out_dim = 0;
    if (tc.task == TaskLoss::cross_entropy) {
        if (!data.labeled()) throw ConfigError("cross-entropy training needs a label column");
        out_dim = get_optional_int(cfg, "classes").value_or(std::max(2, data.num_classes()));
    } else {
        if (data.targets.cols() == 0) throw ConfigError("mse training needs y0.. target columns");
        out_dim = static_cast<int>(data.targets.cols());
    }
    std::vector<int> sizes{data.input_dim()};
    for (int h : get<std::vector<int>>(cfg, "hidden")) sizes.push_back(h);
    sizes.push_back(out_dim);
    FeedForwardNet net = FeedForwardNet::initialize(sizes, activation_from_string(get<std::string>(cfg, "activation")),
                                                    tc.seed, get<double>(cfg, "init_gain"));
    const TrainResult result = train(std::move(net), data, tc);

    CsvWriter log({"step", "task_loss", "ed_term", "lambda_eff", "train_accuracy"});
    for (const auto& row : result.log) {
        log.row({std::to_string(row.step), num(row.task_loss), num(row.ed_term), num(row.lambda_eff),
                 row.train_accuracy ? num(*row.train_accuracy) : ""});
    }

    EstimatorConfig measure;
    measure.n_paths = get<int>(cfg, "measure_paths");
    measure.resolution = tc.resolution;
    measure.max_degree = tc.max_degree;
    measure.damping = tc.damping;
    measure.basis = tc.basis;
    measure.sampling = tc.sampling;
    measure.use_pca = tc.use_pca;
    measure.pca_dim = tc.pca_dim;
    measure.anchored = tc.anchored;
    measure.post_softmax = tc.post_softmax;
    measure.seed = tc.seed;
    const EDReport measured = ed_estimate(result.net.as_oracle(), data, measure);

    json summary = {{"steps", result.log.size()},
                    {"final_task_loss", result.log.empty() ? 0.0 : result.log.back().task_loss},
                    {"measured_mean_ed", measured.mean_ed},
                    {"measured_mean_ed_norm", measured.mean_ed_norm},
                    {"parameters", result.net.parameter_count()}};
    if (tc.task == TaskLoss::cross_entropy) summary["final_accuracy"] = classification_accuracy(result.net, data);

    const fs::path dir = output_dir(opt);
    io::save_checkpoint(dir / "checkpoint.json", result.net, cfg);
    io::write_file_atomic(dir / "train_log.csv", log.str());
    write_json(dir / "train_summary.json", envelope("train", cfg, summary));
    emit(opt, summary, log.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// verify-degree

json verify_defaults() {
    return {{"p1", ""}, {"p2", ""}, {"p1_file", ""}, {"p2_file", ""}, {"dimension", 0},
            {"n", 1000}, {"sampler", "gaussian"}, {"include_pairs", true}, {"seed", 0}};
}

polylab::MultiPoly load_polynomial(const json& cfg, const std::string& name, std::size_t dim) {
    std::string text = get<std::string>(cfg, name.c_str());
    const std::string file = get<std::string>(cfg, (name + "_file").c_str());
    if (!file.empty()) text = io::read_file(file);
    if (text.empty()) throw ConfigError("polynomial " + name + " is required (inline or via " + name + "_file)");
    try {
        return polylab::parse_polynomial(text, dim);
    } catch (const ParseError& e) {
        throw ParseError(name + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), e.line(), e.column());
    }
}

int cmd_verify_degree(const CommonOptions& opt) {
    const json cfg = resolve_config(verify_defaults(), opt);
    std::size_t dim = get<std::size_t>(cfg, "dimension");
    polylab::MultiPoly p1 = load_polynomial(cfg, "p1", dim);
    polylab::MultiPoly p2 = load_polynomial(cfg, "p2", dim);
    if (dim == 0) {
        dim = std::max(p1.dimension(), p2.dimension());
        p1 = load_polynomial(cfg, "p1", dim);
        p2 = load_polynomial(cfg, "p2", dim);
    }
    const int n = get<int>(cfg, "n");
    if (n < 1) throw ConfigError("n must be at least 1");
    const auto rec = polylab::verify_order_preservation(
        p1, p2, static_cast<std::size_t>(n), polylab::endpoint_sampler_from_string(get<std::string>(cfg, "sampler")),
        get<std::uint64_t>(cfg, "seed"));

    json summary = {{"p1", p1.to_string()},
                    {"p2", p2.to_string()},
                    {"dimension", dim},
                    {"n", n},
                    {"degree1", rec.degree1},
                    {"degree2", rec.degree2},
                    {"average1", rec.average1.get_str()},
                    {"average2", rec.average2.get_str()},
                    {"average1_value", rec.average1.get_d()},
                    {"average2_value", rec.average2.get_d()},
                    {"drops1", rec.drops1},
                    {"drops2", rec.drops2},
                    {"drop_rate1", static_cast<double>(rec.drops1) / n},
                    {"drop_rate2", static_cast<double>(rec.drops2) / n},
                    {"verdict", rec.verdict}};
    json body = summary;
    if (get<bool>(cfg, "include_pairs")) {
        body["pair_degrees1"] = rec.pair_degrees1;
        body["pair_degrees2"] = rec.pair_degrees2;
    }
    CsvWriter csv({"pair", "degree1", "degree2"});
    for (std::size_t k = 0; k < rec.pair_degrees1.size(); ++k) {
        csv.row({std::to_string(k), std::to_string(rec.pair_degrees1[k]), std::to_string(rec.pair_degrees2[k])});
    }
    const fs::path dir = output_dir(opt);
    write_json(dir / "verify.json", envelope("verify-degree", cfg, body));
    io::write_file_atomic(dir / "verify_pairs.csv", csv.str());
    emit(opt, summary, csv.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// pnn-study

json pnn_defaults() {
    const PnnStudyConfig d;
    return {{"width", d.width},
            {"train_points", d.train_points},
            {"input_range", d.input_range},
            {"steps", d.steps},
            {"learning_rate", d.learning_rate},
            {"init_gain", d.init_gain},
            {"mse_threshold", d.mse_threshold},
            {"eval_paths", d.eval_paths},
            {"resolution", d.resolution},
            {"max_degree", d.max_degree},
            {"damping", d.damping},
            {"ed_norm_gap_limit", 0.15},
            {"tasks", {1, 2, 3, 4, 5, 6}},
            {"seed", 0}};
}

int cmd_pnn_study(const CommonOptions& opt) {
    const json cfg = resolve_config(pnn_defaults(), opt);
    PnnStudyConfig pc;
    pc.width = get<int>(cfg, "width");
    pc.train_points = get<int>(cfg, "train_points");
    pc.input_range = get<double>(cfg, "input_range");
    pc.steps = get<int>(cfg, "steps");
    pc.learning_rate = get<double>(cfg, "learning_rate");
    pc.init_gain = get<double>(cfg, "init_gain");
    pc.mse_threshold = get<double>(cfg, "mse_threshold");
    pc.eval_paths = get<int>(cfg, "eval_paths");
    pc.resolution = get<int>(cfg, "resolution");
    pc.max_degree = get<int>(cfg, "max_degree");
    pc.damping = get<double>(cfg, "damping");
    pc.seed = get<std::uint64_t>(cfg, "seed");
    const auto tasks = get<std::vector<int>>(cfg, "tasks");
    PnnStudy study = pnn_study(pc, tasks);
    if (study.rows.size() == 6) {
        study.checks = pnn_checks(study.rows, get<double>(cfg, "ed_norm_gap_limit"));
        study.all_checks_passed = true;
        for (const auto& c : study.checks) study.all_checks_passed = study.all_checks_passed && c.passed;
    }

    std::vector<std::string> header{"task", "algebraic_degree", "final_mse", "trained"};
    for (const char* name : kPnnMetricNames) header.emplace_back(name);
    CsvWriter csv(header);
    json rows = json::array();
    for (const auto& r : study.rows) {
        std::vector<std::string> fields{std::to_string(r.task), std::to_string(r.algebraic_degree), num(r.final_mse),
                                        r.trained ? "1" : "0"};
        json row = {{"task", r.task}, {"algebraic_degree", r.algebraic_degree}, {"final_mse", r.final_mse},
                    {"trained", r.trained}};
        for (std::size_t m = 0; m < r.metrics.size(); ++m) {
            fields.push_back(num(r.metrics[m]));
            row[kPnnMetricNames[m]] = r.metrics[m];
        }
        csv.row(fields);
        rows.push_back(std::move(row));
    }
    json checks = json::array();
    for (const auto& c : study.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}});
    const json verdict = {{"all_trained", study.all_trained},
                          {"orderings_checked", !study.checks.empty()},
                          {"all_checks_passed", study.all_checks_passed},
                          {"ed_norm_gaps", study.ed_norm_gaps},
                          {"checks", checks}};
    const json body = {{"rows", rows}, {"verdict", verdict}};
    const fs::path dir = output_dir(opt);
    write_json(dir / "pnn_study.json", envelope("pnn-study", cfg, body));
    io::write_file_atomic(dir / "pnn_study.csv", csv.str());
    emit(opt, body, csv.str());
    if (!study.all_trained) return kTrainingFailed;
    if (!study.checks.empty() && !study.all_checks_passed) return kCheckFailed;
    return kOk;
}

// ---------------------------------------------------------------------------
// gradcheck

json gradcheck_defaults() {
    return {{"instances", 120}, {"composite_instances", 24}, {"fd_step", 1e-6},
            {"tolerance", 1e-4}, {"composite_tolerance", 1e-3}, {"seed", 0}};
}

int cmd_gradcheck(const CommonOptions& opt, bool corrupt_sign) {
    const json cfg = resolve_config(gradcheck_defaults(), opt);
    gradcheck::SurrogateSuiteConfig sc;
    sc.instances = get<std::size_t>(cfg, "instances");
    sc.seed = get<std::uint64_t>(cfg, "seed");
    sc.fd_step = get<double>(cfg, "fd_step");
    sc.tolerance = get<double>(cfg, "tolerance");
    sc.corrupt_sign = corrupt_sign;
    const auto surrogate = gradcheck::surrogate_suite(sc);

    gradcheck::CompositeSuiteConfig cc;
    cc.instances = get<std::size_t>(cfg, "composite_instances");
    cc.seed = sc.seed;
    cc.fd_step = sc.fd_step;
    cc.tolerance = get<double>(cfg, "composite_tolerance");
    const auto composite = gradcheck::composite_suite(cc);

    CsvWriter csv({"suite", "cell", "instances", "coordinates", "max_rel_error"});
    json cells = json::array();
    for (const auto& c : surrogate.cells) {
        const std::string eps = c.damping < 1e-4 ? "1e-06" : "1e-03";
        cells.push_back({{"r", c.resolution}, {"K", c.max_degree}, {"eps", c.damping}, {"instances", c.instances},
                         {"coordinates", c.coordinates}, {"max_rel_error", c.max_rel_error}});
        csv.row({"surrogate", "r=" + std::to_string(c.resolution) + " K=" + std::to_string(c.max_degree) + " eps=" + eps,
                 std::to_string(c.instances), std::to_string(c.coordinates), num(c.max_rel_error)});
    }
    json cases = json::array();
    for (const auto& c : composite.cases) {
        cases.push_back({{"case", c.description}, {"parameters", c.parameters}, {"max_rel_error", c.max_rel_error}});
        csv.row({"composite", c.description, "1", std::to_string(c.parameters), num(c.max_rel_error)});
    }
    const bool passed = surrogate.passed && composite.passed;
    const json summary = {{"passed", passed},
                          {"surrogate", {{"checked", surrogate.checked}, {"skipped", surrogate.skipped},
                                         {"max_rel_error", surrogate.max_rel_error}, {"passed", surrogate.passed}}},
                          {"composite", {{"checked", composite.cases.size()},
                                         {"max_rel_error", composite.max_rel_error}, {"passed", composite.passed}}}};
    json body = summary;
    body["surrogate"]["cells"] = cells;
    body["composite"]["cases"] = cases;
    const fs::path dir = output_dir(opt);
    write_json(dir / "gradcheck.json", envelope("gradcheck", cfg, body));
    io::write_file_atomic(dir / "gradcheck.csv", csv.str());
    emit(opt, summary, csv.str());
    return passed ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// make-dataset

json dataset_defaults() {
    return {{"kind", "two_moons"}, {"n", 512}, {"noise", 0.1}, {"dim", 2}, {"classes", 0},
            {"file", "dataset.csv"}, {"seed", 0}};
}

int cmd_make_dataset(const CommonOptions& opt) {
    const json cfg = resolve_config(dataset_defaults(), opt);
    const std::string kind = get<std::string>(cfg, "kind");
    Dataset data;
    if (kind == "two_moons") {
        data = two_moons(get<int>(cfg, "n"), get<double>(cfg, "noise"), get<std::uint64_t>(cfg, "seed"));
    } else if (kind == "gaussian") {
        data = gaussian_blob(get<int>(cfg, "n"), get<int>(cfg, "dim"), get<int>(cfg, "classes"), get<std::uint64_t>(cfg, "seed"));
    } else {
        throw ConfigError("unknown dataset kind '" + kind + "'");
    }
    const fs::path path = output_dir(opt) / get<std::string>(cfg, "file");
    io::write_file_atomic(path, io::dataset_to_csv(data));
    const json summary = {{"file", path.string()}, {"rows", data.size()}, {"dim", data.input_dim()}};
    emit(opt, summary, "file,rows,dim\r\n" + io::csv_field(path.string()) + "," + std::to_string(data.size()) + "," +
                           std::to_string(data.input_dim()) + "\r\n");
    return kOk;
}

void add_common(CLI::App* sub, CommonOptions& opt) {
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--seed", opt.seed, "Global seed (overrides the config)");
    sub->add_option("--out", opt.out_dir, "Output directory (default: $EDEG_OUT_DIR or ./edeg-out)");
    sub->add_option("--format", opt.format, "Summary format on stdout")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--set", opt.sets, "Override a config field, key=value (value parsed as JSON when possible)");
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Effective-degree estimation, training and verification tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("edeg ") + EDEG_VERSION);
    CommonOptions opt;
    bool corrupt_sign = false;
    std::string p1;
    std::string p2;

    auto* estimate = app.add_subcommand("estimate", "Estimate mean effective degree over random interpolation paths");
    auto* train_cmd = app.add_subcommand("train", "Train a dense network with optional ED regularization");
    auto* verify = app.add_subcommand("verify-degree", "Check order preservation of polynomial degree along paths");
    auto* pnn = app.add_subcommand("pnn-study", "Polynomial-network controlled study");
    auto* grad = app.add_subcommand("gradcheck", "Randomized analytic-vs-finite-difference gradient checks");
    auto* make = app.add_subcommand("make-dataset", "Write a synthetic dataset CSV");
    for (auto* sub : {estimate, train_cmd, verify, pnn, grad, make}) add_common(sub, opt);
    verify->add_option("--p1", p1, "First polynomial (inline)");
    verify->add_option("--p2", p2, "Second polynomial (inline)");
    grad->add_flag("--corrupt-sign", corrupt_sign)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*estimate) return cmd_estimate(opt);
        if (*train_cmd) return cmd_train(opt);
        if (*verify) {
            if (!p1.empty()) opt.sets.push_back("p1=" + json(p1).dump());
            if (!p2.empty()) opt.sets.push_back("p2=" + json(p2).dump());
            return cmd_verify_degree(opt);
        }
        if (*pnn) return cmd_pnn_study(opt);
        if (*grad) return cmd_gradcheck(opt, corrupt_sign);
        if (*make) return cmd_make_dataset(opt);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const NonFiniteLossError& e) {
        std::cerr << "non-finite loss: " << e.what() << "\n";
        return kNonFiniteLoss;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kConfigError;
}

} // namespace edeg::cli
