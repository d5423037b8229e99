// Acceptance suite: one PASS/FAIL line per criterion, runtime budget included.
#include "../../tools/cli.hpp"

#include "edeg/basis.hpp"
#include "edeg/estimator.hpp"
#include "edeg/gradcheck.hpp"
#include "edeg/io.hpp"
#include "edeg/net.hpp"
#include "edeg/pnn_study.hpp"
#include "edeg/polylab.hpp"
#include "edeg/random.hpp"
#include "edeg/sampling.hpp"
#include "edeg/surrogate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace edeg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = EDEG_DATA_DIR;

struct Verdict {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. Basis elements recovered from r = K + 1 Chebyshev nodes with eps = 0.
Verdict exact_recovery() {
    double worst = 0.0;
    for (int K = 0; K <= 14; ++K) {
        const auto nodes = chebyshev_nodes(K + 1);
        for (int j = 0; j <= K; ++j) {
            std::vector<double> ys;
            for (double a : nodes.alphas) ys.push_back(basis_eval(BasisKind::chebyshev, j, 2 * a - 1));
            const auto c = fit(nodes, ys, K, 0.0).coefficients;
            for (int k = 0; k <= K; ++k) worst = std::max(worst, std::abs(c[k] - (k == j ? 1.0 : 0.0)));
        }
    }
    return {worst < 1e-9, "max coefficient error " + fmt("%.3g", worst) + " (tol 1e-9)"};
}

// 2. Analytic dED/dy against central differences.
Verdict gradient_fidelity() {
    gradcheck::SurrogateSuiteConfig cfg;
    cfg.instances = 160;
    cfg.tolerance = 1e-4;
    const auto report = gradcheck::surrogate_suite(cfg);
    std::set<double> eps;
    int r_min = 99, r_max = 0, k_min = 99, k_max = 0;
    for (const auto& c : report.cells) {
        eps.insert(c.damping);
        r_min = std::min(r_min, c.resolution);
        r_max = std::max(r_max, c.resolution);
        k_min = std::min(k_min, c.max_degree);
        k_max = std::max(k_max, c.max_degree);
    }
    const bool passed = report.passed && report.checked >= 100 && eps.size() == 2;
    std::ostringstream s;
    s << report.checked << " configs checked (" << report.skipped << " skipped), r in [" << r_min << "," << r_max
      << "], K in [" << k_min << "," << k_max << "], max rel err " << fmt("%.3g", report.max_rel_error)
      << " (tol 1e-4)";
    return {passed, s.str()};
}

// 3. Full composite objective gradient.
Verdict composite_gradient() {
    gradcheck::CompositeSuiteConfig cfg;
    cfg.instances = 24;
    cfg.tolerance = 1e-3;
    const auto report = gradcheck::composite_suite(cfg);
    std::size_t anchored = 0, pca = 0;
    for (const auto& c : report.cases) {
        anchored += c.description.find("anchored") != std::string::npos;
        pca += c.description.find("pca") != std::string::npos;
    }
    std::ostringstream s;
    s << report.cases.size() << " tiny-net configs (" << anchored << " anchored, " << pca << " with PCA), max rel err "
      << fmt("%.3g", report.max_rel_error) << " (tol 1e-3)";
    return {report.passed && report.cases.size() >= 20, s.str()};
}

// 4. Degree order preservation on random polynomial pairs, plus the
// hyperplane fixture where the density assumption fails.
Verdict order_preservation() {
    using namespace polylab;
    bool ok = true;
    std::size_t total_drops = 0;
    const CounterRng rng(2024);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const std::size_t d = 3 + rng.below(3 * t, 4);
        const int d1 = 2 + static_cast<int>(rng.below(3 * t + 1, 5));        // 2..6
        const int d2 = 1 + static_cast<int>(rng.below(3 * t + 2, static_cast<std::uint64_t>(d1 - 1)));  // 1..d1-1
        const auto p1 = random_polynomial(d, d1, 1000 + t);
        const auto p2 = random_polynomial(d, d2, 2000 + t);
        const auto rec = verify_order_preservation(p1, p2, 1000, EndpointSampler::gaussian, t);
        total_drops += rec.drops1 + rec.drops2;
        ok = ok && rec.drops1 == 0 && rec.drops2 == 0 && rec.average1 == d1 && rec.average2 == d2 &&
             rec.average1 > rec.average2 && rec.verdict == "ordered";
    }
    const auto sq = parse_polynomial(io::read_file(kData + "/polynomials/hyperplane.txt"), 2);
    const auto lin = parse_polynomial("x1 + x2", 2);
    const auto hyper = verify_order_preservation(sq, lin, 1000, EndpointSampler::hyperplane, 0);
    const double drop_rate = static_cast<double>(hyper.drops1) / 1000.0;
    std::ostringstream s;
    s << "20 pairs x 1000 paths: " << total_drops << " drops, all averages exact; hyperplane drop rate "
      << fmt("%.3f", drop_rate);
    return {ok && drop_rate == 1.0, s.str()};
}

// 5. Polynomial-network controlled study with default settings.
Verdict pnn() {
    const PnnStudy study = pnn_study(PnnStudyConfig{});
    std::ostringstream s;
    s << "mse";
    for (const auto& r : study.rows) s << " " << fmt("%.1e", r.final_mse);
    s << "; ED cheb";
    for (const auto& r : study.rows) s << " " << fmt("%.2f", r.metrics[0]);
    s << "; ED_norm gaps " << fmt("%.3f", study.ed_norm_gaps[0]) << "," << fmt("%.3f", study.ed_norm_gaps[1]) << ","
      << fmt("%.3f", study.ed_norm_gaps[2]);
    std::size_t failed = 0;
    for (const auto& c : study.checks)
        if (!c.passed) {
            ++failed;
            s << "; FAILED " << c.name;
        }
    s << "; " << study.checks.size() - failed << "/" << study.checks.size() << " checks";
    return {study.all_trained && study.all_checks_passed, s.str()};
}

// 6. Conditioning of the design matrix, Chebyshev vs uniform nodes.
Verdict conditioning() {
    const double cheb = condition_number(design_matrix(BasisKind::chebyshev, chebyshev_nodes(15).alphas, 14).matrix());
    const double unif = condition_number(design_matrix(BasisKind::chebyshev, uniform_nodes(15).alphas, 14).matrix());
    return {cheb < unif && unif / cheb > 10.0,
            "cond chebyshev " + fmt("%.3g", cheb) + ", uniform " + fmt("%.3g", unif) + ", ratio " + fmt("%.3g", unif / cheb)};
}

// 7. ED regularization on the two-moons fixture: paired runs sharing seeds.
Verdict regularization_effect() {
    const Dataset data = io::read_dataset_csv(kData + "/two_moons.csv");
    TrainConfig cfg;
    cfg.n_paths = 8;
    cfg.resolution = 4;
    cfg.max_degree = 3;
    cfg.damping = 1e-6;
    cfg.anchored = true;
    cfg.post_softmax = true;
    cfg.task = TaskLoss::cross_entropy;
    cfg.optimizer = Optimizer::adam;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 64;
    cfg.steps = 1500;
    cfg.seed = 0;
    const auto init = FeedForwardNet::initialize({2, 16, 16, 2}, Activation::relu, cfg.seed);

    EstimatorConfig measure;
    measure.n_paths = 1024;
    measure.resolution = cfg.resolution;
    measure.max_degree = cfg.max_degree;
    measure.damping = cfg.damping;
    measure.anchored = true;
    measure.post_softmax = true;
    measure.seed = 99;

    cfg.lambda = 0.0;
    const auto baseline = train(init, data, cfg);
    cfg.lambda = 0.5;
    const auto regularized = train(init, data, cfg);
    const double ed0 = ed_estimate(baseline.net.as_oracle(), data, measure).mean_ed;
    const double ed1 = ed_estimate(regularized.net.as_oracle(), data, measure).mean_ed;
    const double acc0 = classification_accuracy(baseline.net, data);
    const double acc1 = classification_accuracy(regularized.net, data);
    const double reduction = 1.0 - ed1 / ed0;
    std::ostringstream s;
    s << "measured ED " << fmt("%.3f", ed0) << " (lambda=0) -> " << fmt("%.3f", ed1) << " (lambda=0.5), reduction "
      << fmt("%.1f", 100 * reduction) << "% (need >= 20%); train acc " << fmt("%.3f", acc0) << " / "
      << fmt("%.3f", acc1) << " (need >= 0.95)";
    return {reduction >= 0.20 && acc1 >= 0.95, s.str()};
}

// 8. Every CLI command, run twice with identical config and seed.
int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"edeg"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    const int code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    return code;
}

bool same_artifacts(const fs::path& a, const fs::path& b, std::string& why) {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto other = b / entry.path().filename();
        if (!fs::exists(other)) {
            why = "missing " + other.string();
            return false;
        }
        const std::string x = io::read_file(entry.path());
        const std::string y = io::read_file(other);
        if (entry.path().extension() == ".json") {
            json jx = json::parse(x);
            json jy = json::parse(y);
            if (jx.contains("canonical_hash") && jx["canonical_hash"] != cli::canonical_hash(jx)) {
                why = "stale hash in " + entry.path().string();
                return false;
            }
            jx.erase("created_at");
            jy.erase("created_at");
            if (jx != jy) {
                why = "differs: " + entry.path().filename().string();
                return false;
            }
        } else if (x != y) {
            why = "differs: " + entry.path().filename().string();
            return false;
        }
        ++count;
    }
    return count > 0;
}

Verdict determinism(const fs::path& workdir) {
    const std::string moons = "dataset=" + json(kData + "/two_moons.csv").dump();
    const std::string gauss = "dataset=" + json(kData + "/gaussian3d.csv").dump();
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
        {"estimate", {"estimate", "--config", kData + "/configs/estimate_product.json", "--set", gauss, "--seed", "5"}},
        {"train", {"train", "--set", moons, "--set", "steps=40", "--set", "lambda=0.5", "--set", "anchored=true",
                   "--set", "post_softmax=true", "--set", "measure_paths=64", "--seed", "5"}},
        {"verify-degree", {"verify-degree", "--p1", "x1^3*x2 - x3^2", "--p2", "x1*x3 + 4", "--set", "n=200", "--seed", "5"}},
        {"pnn-study", {"pnn-study", "--set", "tasks=[1,2]", "--set", "steps=300", "--set", "eval_paths=32",
                       "--set", "mse_threshold=1e9", "--seed", "5"}},
        {"gradcheck", {"gradcheck", "--set", "instances=10", "--set", "composite_instances=2", "--seed", "5"}},
    };
    std::ostringstream s;
    bool ok = true;
    for (const auto& [name, args] : commands) {
        const fs::path a = workdir / "determinism" / name / "a";
        const fs::path b = workdir / "determinism" / name / "b";
        fs::remove_all(a);
        fs::remove_all(b);
        auto with_out = [&](const fs::path& dir) {
            auto full = args;
            full.insert(full.end(), {"--out", dir.string()});
            return run_cli(full);
        };
        const int ca = with_out(a);
        const int cb = with_out(b);
        std::string why;
        const bool same = ca == 0 && cb == 0 && same_artifacts(a, b, why);
        if (!same) s << name << " (exit " << ca << "/" << cb << " " << why << ") ";
        ok = ok && same;
    }
    return {ok, ok ? "5/5 commands produced canonically identical artifacts" : "mismatch: " + s.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::string workdir = (fs::temp_directory_path() / "edeg-acceptance").string();
    std::vector<int> only;
    app.add_option("--workdir", workdir, "Scratch directory for CLI artifacts");
    app.add_option("--only", only, "Run only these criterion numbers");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "exact surrogate recovery", 1.0, exact_recovery},
        {2, "ED gradient fidelity", 30.0, gradient_fidelity},
        {3, "composite objective gradient", 120.0, composite_gradient},
        {4, "degree order preservation", 300.0, order_preservation},
        {5, "polynomial network study", 600.0, pnn},
        {6, "design matrix conditioning", 1.0, conditioning},
        {7, "regularization effect", 300.0, regularization_effect},
        {8, "CLI determinism", 120.0, [&] { return determinism(workdir); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = seconds < c.budget_seconds;
        const bool passed = v.passed && in_budget;
        failures += passed ? 0 : 1;
        std::cout << (passed ? "PASS" : "FAIL") << " criterion " << c.id << " [" << c.name << "] " << v.detail << "; "
                  << fmt("%.2f", seconds) << " s (budget " << fmt("%.0f", c.budget_seconds) << " s"
                  << (in_budget ? "" : ", EXCEEDED") << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
