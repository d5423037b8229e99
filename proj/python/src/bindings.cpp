#include "edeg/basis.hpp"
#include "edeg/datasets.hpp"
#include "edeg/error.hpp"
#include "edeg/estimator.hpp"
#include "edeg/gradcheck.hpp"
#include "edeg/io.hpp"
#include "edeg/net.hpp"
#include "edeg/pnn_study.hpp"
#include "edeg/polylab.hpp"
#include "edeg/reduce.hpp"
#include "edeg/sampling.hpp"
#include "edeg/surrogate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace edeg;

namespace {

py::object fraction(const polylab::Rational& q) {
    static py::object cls = py::module_::import("fractions").attr("Fraction");
    static py::object to_int = py::module_::import("builtins").attr("int");
    return cls(to_int(q.get_num().get_str()), to_int(q.get_den().get_str()));
}

polylab::RationalVector rationals(const py::sequence& values) {
    polylab::RationalVector out;
    for (const auto& v : values) {
        // str(Fraction) is "p/q" or "p", which GMP reads directly; floats go
        // through their exact hex value.
        if (py::isinstance<py::float_>(v)) {
            out.emplace_back(v.cast<double>());
        } else {
            polylab::Rational q(py::str(v).cast<std::string>());
            q.canonicalize();
            out.push_back(q);
        }
    }
    return out;
}

PathAbscissas abscissas_from(const std::vector<double>& alphas) {
    PathAbscissas a;
    a.alphas = alphas;
    return a;
}

Dataset make_dataset(const Eigen::MatrixXd& inputs, const std::optional<std::vector<int>>& labels,
                     const std::optional<Eigen::MatrixXd>& targets) {
    Dataset d;
    d.inputs = inputs;
    if (labels) {
        if (static_cast<Eigen::Index>(labels->size()) != inputs.rows()) throw ConfigError("labels length must match inputs");
        d.labels = *labels;
    }
    if (targets) {
        if (targets->rows() != inputs.rows()) throw ConfigError("targets rows must match inputs");
        d.targets = *targets;
    }
    return d;
}

/// Wraps a Python callable so it can be evaluated from estimator worker threads.
FunctionOracle python_oracle(py::function f, int input_dim, int output_dim) {
    auto holder = std::shared_ptr<py::function>(new py::function(std::move(f)), [](py::function* p) {
        py::gil_scoped_acquire gil;
        delete p;
    });
    return {input_dim, output_dim, [holder](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                py::gil_scoped_acquire gil;
                py::object y = (*holder)(x);
                return y.cast<Eigen::VectorXd>();
            }};
}

EstimatorConfig estimator_config(int n_paths, int resolution, int max_degree, double damping, const std::string& basis,
                                 const std::string& sampling, bool pca, std::optional<int> pca_dim, bool anchored,
                                 bool post_softmax, std::uint64_t seed, int threads) {
    EstimatorConfig c;
    c.n_paths = n_paths;
    c.resolution = resolution;
    c.max_degree = max_degree;
    c.damping = damping;
    c.basis = basis_from_string(basis);
    c.sampling = sampling_from_string(sampling);
    c.use_pca = pca;
    c.pca_dim = pca_dim;
    c.anchored = anchored;
    c.post_softmax = post_softmax;
    c.seed = seed;
    c.threads = threads;
    return c;
}

py::dict report_dict(const EDReport& r) {
    py::dict d;
    d["n_paths"] = r.n_paths;
    d["skipped"] = r.skipped;
    d["mean_ed"] = r.mean_ed;
    d["mean_ed_norm"] = r.mean_ed_norm;
    d["std_ed"] = r.std_ed;
    std::vector<double> ed;
    std::vector<double> ed_norm;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (const auto& p : r.per_path) {
        ed.push_back(p.value.ed);
        ed_norm.push_back(p.value.ed_norm);
        pairs.emplace_back(p.first, p.second);
    }
    d["per_path_ed"] = ed;
    d["per_path_ed_norm"] = ed_norm;
    d["pairs"] = pairs;
    return d;
}

}  // namespace

PYBIND11_MODULE(_edeg, m) {
    m.doc() = "Effective degree of functions along interpolation paths";
    m.attr("__version__") = EDEG_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<SingularSystemError>(m, "SingularSystemError", numerical.ptr());
    py::register_exception<NonFiniteLossError>(m, "NonFiniteLossError", numerical.ptr());

    // basis / sampling
    m.def("basis_eval", [](const std::string& kind, int k, double x) { return basis_eval(basis_from_string(kind), k, x); },
          py::arg("kind"), py::arg("k"), py::arg("x"));
    m.def("design_matrix",
          [](const std::string& kind, const std::vector<double>& alphas, int max_degree) {
              return design_matrix(basis_from_string(kind), alphas, max_degree).matrix();
          },
          py::arg("kind"), py::arg("alphas"), py::arg("max_degree"));
    m.def("condition_number", &condition_number, py::arg("matrix"));
    m.def("chebyshev_nodes", [](int r) { return chebyshev_nodes(r).alphas; }, py::arg("r"));
    m.def("uniform_nodes", [](int r) { return uniform_nodes(r).alphas; }, py::arg("r"));
    m.def("randomized_cosine",
          [](int r, std::uint64_t seed, bool anchored, std::uint64_t path_index) {
              return randomized_cosine(r, seed, anchored, path_index).alphas;
          },
          py::arg("r"), py::arg("seed"), py::arg("anchored") = false, py::arg("path_index") = 0);

    // surrogate
    m.def("fit",
          [](const std::vector<double>& alphas, const std::vector<double>& ys, int max_degree, double damping,
             const std::string& basis) {
              return fit(abscissas_from(alphas), ys, max_degree, damping, basis_from_string(basis)).coefficients;
          },
          py::arg("alphas"), py::arg("ys"), py::arg("max_degree"), py::arg("damping") = kDefaultDamping,
          py::arg("basis") = "chebyshev", "Coefficients c_0..c_K of the damped least-squares fit.");
    m.def("effective_degree",
          [](const Eigen::VectorXd& c) {
              const auto v = effective_degree(c);
              return std::make_pair(v.ed, v.ed_norm);
          },
          py::arg("coefficients"), "(ed, ed_norm) of a coefficient vector.");
    m.def("ed_gradient",
          [](const std::vector<double>& alphas, const std::vector<double>& ys, int max_degree, double damping,
             const std::string& basis) {
              return ed_gradient(abscissas_from(alphas), ys, max_degree, damping, basis_from_string(basis));
          },
          py::arg("alphas"), py::arg("ys"), py::arg("max_degree"), py::arg("damping") = kDefaultDamping,
          py::arg("basis") = "chebyshev");

    // reduce
    py::class_<PathProjection>(m, "PathProjection")
        .def_readonly("mean", &PathProjection::mean)
        .def_readonly("components", &PathProjection::components)
        .def_readonly("projected", &PathProjection::projected)
        .def_readonly("explained_variance", &PathProjection::explained_variance)
        .def_readonly("tied_spectrum", &PathProjection::tied_spectrum);
    m.def("pca_project", &pca_project, py::arg("ys"), py::arg("m"));

    // estimator
    m.def("ed_estimate",
          [](py::object f, const Eigen::MatrixXd& inputs, std::optional<std::vector<int>> labels,
             std::optional<int> output_dim, int n_paths, int resolution, int max_degree, double damping,
             const std::string& basis, const std::string& sampling, bool pca, std::optional<int> pca_dim,
             bool anchored, bool post_softmax, std::uint64_t seed, int threads) {
              const Dataset data = make_dataset(inputs, labels, std::nullopt);
              FunctionOracle oracle;
              if (py::isinstance<FeedForwardNet>(f)) {
                  oracle = f.cast<const FeedForwardNet&>().as_oracle();
              } else {
                  int out = output_dim.value_or(0);
                  if (out == 0) {
                      const Eigen::VectorXd x0 = inputs.row(0).transpose();
                      out = static_cast<int>(f(x0).cast<Eigen::VectorXd>().size());
                  }
                  oracle = python_oracle(f.cast<py::function>(), static_cast<int>(inputs.cols()), out);
              }
              const auto cfg = estimator_config(n_paths, resolution, max_degree, damping, basis, sampling, pca,
                                                pca_dim, anchored, post_softmax, seed, threads);
              EDReport report;
              {
                  py::gil_scoped_release release;
                  report = ed_estimate(oracle, data, cfg);
              }
              return report_dict(report);
          },
          py::arg("f"), py::arg("inputs"), py::arg("labels") = py::none(), py::arg("output_dim") = py::none(),
          py::arg("n_paths") = 256, py::arg("resolution") = 4, py::arg("max_degree") = 3,
          py::arg("damping") = kDefaultDamping, py::arg("basis") = "chebyshev",
          py::arg("sampling") = "randomized_cosine", py::arg("pca") = false, py::arg("pca_dim") = py::none(),
          py::arg("anchored") = false, py::arg("post_softmax") = false, py::arg("seed") = 0, py::arg("threads") = 1,
          "Mean effective degree of f over random interpolation paths between rows of `inputs`.");

    // polylab
    py::class_<polylab::MultiPoly>(m, "MultiPoly")
        .def_property_readonly("dimension", &polylab::MultiPoly::dimension)
        .def_property_readonly("degree", &polylab::MultiPoly::degree)
        .def("__str__", &polylab::MultiPoly::to_string)
        .def("__repr__", [](const polylab::MultiPoly& p) { return "MultiPoly('" + p.to_string() + "')"; })
        .def("__eq__", [](const polylab::MultiPoly& a, const polylab::MultiPoly& b) { return a == b; })
        .def("__call__", [](const polylab::MultiPoly& p, const py::sequence& x) { return fraction(p(rationals(x))); });
    m.def("parse_polynomial", [](const std::string& text, std::size_t dimension) { return polylab::parse_polynomial(text, dimension); },
          py::arg("text"), py::arg("dimension") = 0);
    m.def("leading_part", &polylab::leading_part, py::arg("p"));
    m.def("restrict",
          [](const polylab::MultiPoly& p, const py::sequence& x1, const py::sequence& x2) {
              const auto q = polylab::restrict(p, rationals(x1), rationals(x2));
              py::list coeffs;
              for (const auto& c : q.coefficients()) coeffs.append(fraction(c));
              return coeffs;
          },
          py::arg("p"), py::arg("x1"), py::arg("x2"), "Monomial coefficients in alpha of P(alpha x1 + (1 - alpha) x2).");
    m.def("degree_drop_predicate",
          [](const polylab::MultiPoly& p, const py::sequence& x1, const py::sequence& x2) {
              return polylab::degree_drop_predicate(p, rationals(x1), rationals(x2));
          },
          py::arg("p"), py::arg("x1"), py::arg("x2"));
    m.def("verify_order_preservation",
          [](const polylab::MultiPoly& p1, const polylab::MultiPoly& p2, std::size_t n, const std::string& sampler,
             std::uint64_t seed) {
              polylab::VerificationRecord rec;
              {
                  py::gil_scoped_release release;
                  rec = polylab::verify_order_preservation(p1, p2, n, polylab::endpoint_sampler_from_string(sampler), seed);
              }
              py::dict d;
              d["degree1"] = rec.degree1;
              d["degree2"] = rec.degree2;
              d["average1"] = fraction(rec.average1);
              d["average2"] = fraction(rec.average2);
              d["drops1"] = rec.drops1;
              d["drops2"] = rec.drops2;
              d["pair_degrees1"] = rec.pair_degrees1;
              d["pair_degrees2"] = rec.pair_degrees2;
              d["verdict"] = rec.verdict;
              return d;
          },
          py::arg("p1"), py::arg("p2"), py::arg("n") = 1000, py::arg("sampler") = "gaussian", py::arg("seed") = 0);

    // net
    py::class_<FeedForwardNet>(m, "FeedForwardNet")
        .def_static("initialize",
                    [](const std::vector<int>& sizes, const std::string& activation, std::uint64_t seed, double gain) {
                        return FeedForwardNet::initialize(sizes, activation_from_string(activation), seed, gain);
                    },
                    py::arg("sizes"), py::arg("activation") = "relu", py::arg("seed") = 0, py::arg("gain") = 1.0)
        .def_property_readonly("input_dim", &FeedForwardNet::input_dim)
        .def_property_readonly("output_dim", &FeedForwardNet::output_dim)
        .def_property_readonly("parameter_count", &FeedForwardNet::parameter_count)
        .def("forward", [](const FeedForwardNet& n, const Eigen::VectorXd& x) { return n.forward(x); }, py::arg("x"))
        .def("__call__", [](const FeedForwardNet& n, const Eigen::MatrixXd& xs) {
            return Eigen::MatrixXd(n.forward_batch(xs.transpose()).transpose());
        }, py::arg("xs"), "Batched forward pass, one example per row.")
        .def("parameters", &FeedForwardNet::parameters)
        .def("set_parameters", [](FeedForwardNet& n, const std::vector<double>& p) { n.set_parameters(p); })
        .def("save", [](const FeedForwardNet& n, const std::filesystem::path& path) {
            io::save_checkpoint(path, n, nlohmann::json::object());
        }, py::arg("path"))
        .def_static("load", [](const std::filesystem::path& path) { return io::load_checkpoint(path).net; }, py::arg("path"))
        .def("__eq__", [](const FeedForwardNet& a, const FeedForwardNet& b) { return a == b; });

    m.def("train",
          [](const FeedForwardNet& net, const Eigen::MatrixXd& inputs, std::optional<std::vector<int>> labels,
             std::optional<Eigen::MatrixXd> targets, const std::string& task, double lambda_, int n_paths,
             int resolution, int max_degree, double damping, const std::string& sampling, bool anchored,
             bool post_softmax, bool pca, std::optional<int> pca_dim, int batch_size, double learning_rate, int steps,
             double ramp_fraction, double momentum, const std::string& optimizer, bool cosine_decay,
             std::uint64_t seed) {
              const Dataset data = make_dataset(inputs, labels, targets);
              TrainConfig cfg;
              cfg.task = task_loss_from_string(task);
              cfg.lambda = lambda_;
              cfg.n_paths = n_paths;
              cfg.resolution = resolution;
              cfg.max_degree = max_degree;
              cfg.damping = damping;
              cfg.sampling = sampling_from_string(sampling);
              cfg.anchored = anchored;
              cfg.post_softmax = post_softmax;
              cfg.use_pca = pca;
              cfg.pca_dim = pca_dim;
              cfg.batch_size = batch_size;
              cfg.learning_rate = learning_rate;
              cfg.steps = steps;
              cfg.ramp_fraction = ramp_fraction;
              cfg.momentum = momentum;
              cfg.optimizer = optimizer_from_string(optimizer);
              cfg.cosine_decay = cosine_decay;
              cfg.seed = seed;
              TrainResult result;
              {
                  py::gil_scoped_release release;
                  result = train(net, data, cfg);
              }
              py::list log;
              for (const auto& row : result.log) {
                  py::dict d;
                  d["step"] = row.step;
                  d["task_loss"] = row.task_loss;
                  d["ed_term"] = row.ed_term;
                  d["lambda_eff"] = row.lambda_eff;
                  d["train_accuracy"] = row.train_accuracy ? py::cast(*row.train_accuracy) : py::none();
                  log.append(d);
              }
              return py::make_tuple(result.net, log);
          },
          py::arg("net"), py::arg("inputs"), py::arg("labels") = py::none(), py::arg("targets") = py::none(),
          py::arg("task") = "cross_entropy", py::arg("lam") = 0.0, py::arg("n_paths") = 8, py::arg("resolution") = 4,
          py::arg("max_degree") = 3, py::arg("damping") = kDefaultDamping, py::arg("sampling") = "randomized_cosine",
          py::arg("anchored") = false, py::arg("post_softmax") = false, py::arg("pca") = false,
          py::arg("pca_dim") = py::none(), py::arg("batch_size") = 64, py::arg("learning_rate") = 0.05,
          py::arg("steps") = 100, py::arg("ramp_fraction") = 0.0, py::arg("momentum") = 0.0,
          py::arg("optimizer") = "sgd", py::arg("cosine_decay") = false, py::arg("seed") = 0,
          "Trains with loss = task + lam * ED; returns (trained_net, log).");
    m.def("classification_accuracy",
          [](const FeedForwardNet& net, const Eigen::MatrixXd& inputs, const std::vector<int>& labels) {
              return classification_accuracy(net, make_dataset(inputs, labels, std::nullopt));
          },
          py::arg("net"), py::arg("inputs"), py::arg("labels"));

    // datasets
    m.def("two_moons",
          [](int n, double noise, std::uint64_t seed) {
              const Dataset d = two_moons(n, noise, seed);
              return py::make_tuple(d.inputs, d.labels);
          },
          py::arg("n") = 512, py::arg("noise") = 0.1, py::arg("seed") = 0);

    // gradient checks
    m.def("gradcheck",
          [](std::size_t instances, std::size_t composite_instances, std::uint64_t seed) {
              gradcheck::SurrogateSuiteConfig sc;
              sc.instances = instances;
              sc.seed = seed;
              gradcheck::CompositeSuiteConfig cc;
              cc.instances = composite_instances;
              cc.seed = seed;
              gradcheck::SurrogateSuiteReport s;
              gradcheck::CompositeSuiteReport c;
              {
                  py::gil_scoped_release release;
                  s = gradcheck::surrogate_suite(sc);
                  c = gradcheck::composite_suite(cc);
              }
              py::dict d;
              d["surrogate_max_rel_error"] = s.max_rel_error;
              d["surrogate_checked"] = s.checked;
              d["composite_max_rel_error"] = c.max_rel_error;
              d["composite_checked"] = c.cases.size();
              d["passed"] = s.passed && c.passed;
              return d;
          },
          py::arg("instances") = 120, py::arg("composite_instances") = 24, py::arg("seed") = 0);

    m.def("pnn_target", [](int task, const Eigen::Vector3d& x) { return Eigen::Vector3d(pnn_target(task, x)); },
          py::arg("task"), py::arg("x"));
}
