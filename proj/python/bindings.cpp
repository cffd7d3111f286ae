#include "mvocc/cli.hpp"
#include "mvocc/config.hpp"
#include "mvocc/error.hpp"
#include "mvocc/evaluation.hpp"
#include "mvocc/kernels.hpp"
#include "mvocc/report.hpp"
#include "mvocc/serialization.hpp"
#include "mvocc/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mvocc;

namespace {

KernelSpec kernel_spec(const std::string& kernel, double sigma) {
  return kernel_kind_from_string(kernel) == KernelKind::rbf ? KernelSpec::rbf(sigma) : KernelSpec::linear();
}

MultiViewDataset make_dataset(const std::vector<MatrixXd>& views, const std::vector<std::string>& labels,
                              const std::string& target, std::vector<std::string> ids) {
  if (ids.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) ids.push_back("s" + std::to_string(i + 1));
  }
  std::vector<ModalityView> mv;
  for (std::size_t v = 0; v < views.size(); ++v) mv.push_back({static_cast<int>(v + 1), views[v]});
  return {std::move(mv), labels, std::move(ids), target};
}

GridSpec grid_from_dict(const py::dict& d) {
  GridSpec g;
  for (const auto& [key, value] : d) {
    const auto k = key.cast<std::string>();
    if (k == "eta") g.eta = value.cast<std::vector<double>>();
    else if (k == "beta") g.beta = value.cast<std::vector<double>>();
    else if (k == "c") g.c = value.cast<std::vector<double>>();
    else if (k == "sigma") g.sigma = value.cast<std::vector<double>>();
    else if (k == "d") g.d = value.cast<std::vector<int>>();
    else if (k == "reg") g.reg = value.cast<std::vector<int>>();
    else if (k == "ds") g.ds = value.cast<std::vector<int>>();
    else throw ConfigError("unknown grid axis '" + k + "'");
  }
  return g;
}

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-view one-class classification toolkit";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<DegenerateKernelError>(m, "DegenerateKernelError", base.ptr());
  py::register_exception<OracleScaleError>(m, "OracleScaleError", base.ptr());

  m.def("gram_matrix", [](const MatrixXd& a, const MatrixXd& b, const std::string& kernel, double sigma) {
        return gram_matrix(a, b, kernel_spec(kernel, sigma));
      },
      py::arg("a"), py::arg("b"), py::arg("kernel") = "linear", py::arg("sigma") = 1.0,
      "Kernel matrix between the columns of a and b.");

  m.def("npt_embed", [](const MatrixXd& x, const std::string& kernel, double sigma) {
        return npt_fit(x, kernel_spec(kernel, sigma)).training_embedding();
      },
      py::arg("x"), py::arg("kernel") = "rbf", py::arg("sigma") = 1.0,
      "Explicit kernel-space coordinates (rank x N) of the columns of x.");

  py::class_<SvddModel>(m, "SvddModel")
      .def_readonly("alphas", &SvddModel::alphas)
      .def_readonly("radius_sq", &SvddModel::radius_sq)
      .def_readonly("objective", &SvddModel::objective)
      .def_readonly("kkt_violation", &SvddModel::kkt_violation)
      .def("decisions", &SvddModel::decisions, py::arg("z"));

  m.def("fit_svdd", [](const MatrixXd& x, double c, const std::string& kernel, double sigma) {
        return fit_svdd(x, c, kernel_spec(kernel, sigma));
      },
      py::arg("x"), py::arg("c"), py::arg("kernel") = "linear", py::arg("sigma") = 1.0,
      "Trains an SVDD boundary on the columns of x.");

  m.def("svdd_bruteforce", [](const MatrixXd& gram, double c, double step) {
        const BruteforceResult r = svdd_bruteforce(gram, c, step > 0 ? step : default_oracle_step(gram.rows()));
        return py::make_tuple(r.alphas, r.objective);
      },
      py::arg("gram"), py::arg("c"), py::arg("step") = 0.0, "Exhaustive dual search for N <= 6.");

  m.def("compute_metrics", [](long tp, long fn, long fp, long tn) {
        return to_python(to_json(compute_metrics({tp, fn, fp, tn, ""})));
      },
      py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"), "Sen, Spe, Pre, F1, Acc and GM in percent.");

  m.def("stratified_folds", [](const std::vector<std::string>& labels, int k, std::uint64_t seed) {
        const MultiViewDataset ds = make_dataset({MatrixXd::Zero(1, static_cast<Index>(labels.size()))}, labels,
                                                 labels.empty() ? "" : labels.front(), {});
        return stratified_folds(ds, k, seed).assignments;
      },
      py::arg("labels"), py::arg("k"), py::arg("seed") = 0, "Fold index of every sample.");

  m.def("gen_two_view", [](long n_target, long n_outlier, std::vector<Index> dims, double separation, std::uint64_t seed) {
        const MultiViewDataset ds = gen_two_view({n_target, n_outlier, std::move(dims), separation, seed});
        std::vector<MatrixXd> views;
        for (const auto& v : ds.views()) views.push_back(v.features);
        return py::make_tuple(views, ds.labels());
      },
      py::arg("n_target") = 60, py::arg("n_outlier") = 20, py::arg("dims") = std::vector<Index>{6, 6},
      py::arg("separation") = 6.0, py::arg("seed") = 7,
      "Synthetic views (D_v x N each) and labels ('target' / 'outlier').");

  m.def("cross_validate",
        [](const std::vector<MatrixXd>& views, const std::vector<std::string>& labels, const std::string& target,
           const std::string& method, const std::string& kernel, const py::dict& grid, int outer_folds, int inner_folds,
           std::uint64_t seed, int max_iters, int jobs) {
          const Method meth = method_from_string(method);
          const KernelKind kind = kernel_kind_from_string(kernel);
          MultiViewDataset ds = make_dataset(views, labels, target, {});
          if (!is_multimodal(meth)) ds = concatenate_views(ds);
          const GridSpec g = grid.empty() ? default_grid(meth, kind) : grid_from_dict(grid);
          CvOptions opts;
          opts.k_outer = outer_folds;
          opts.k_inner = inner_folds;
          opts.seed = seed;
          opts.jobs = jobs;
          CvResult r;
          {
            py::gil_scoped_release release;
            r = cross_validate(ds, meth, grid_expand(meth, kind, g, max_iters), opts);
          }
          return to_python(results_document(r, Json::object()));
        },
        py::arg("views"), py::arg("labels"), py::arg("target"), py::arg("method") = "svdd", py::arg("kernel") = "linear",
        py::arg("grid") = py::dict(), py::arg("outer_folds") = 5, py::arg("inner_folds") = 10, py::arg("seed") = 0,
        py::arg("max_iters") = 100, py::arg("jobs") = 1,
        "Nested cross-validation; returns the results document as a dict.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"mvocc"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
