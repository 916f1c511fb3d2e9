#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "pcombine/metapipe.hpp"
#include "pcombine/nulldist.hpp"
#include "pcombine/special.hpp"

#ifndef PCOMBINE_VERSION
#define PCOMBINE_VERSION "0.0.0"
#endif

namespace py = pybind11;
using namespace pcombine;

namespace {

MethodSpec build_spec(const std::string& method, std::optional<double> tau,
                      std::optional<std::vector<double>> tau_set,
                      std::optional<double> delta,
                      std::optional<double> gamma) {
  MethodSpec s = make_spec(method_from_name(method));
  if (tau) s.tau = *tau;
  if (tau_set) s.tau_set = std::move(*tau_set);
  if (delta) s.delta = *delta;
  if (gamma) s.gamma = *gamma;
  validate_spec(s);
  return s;
}

py::dict to_dict(const CombineResult& r) {
  py::dict d;
  d["statistic"] = r.statistic;
  d["pvalue"] = r.pvalue;
  d["calibration"] = calibration_name(r.calibration);
  d["j_star"] = r.j_star ? py::cast(*r.j_star) : py::none();
  d["selected"] = r.selected ? py::cast(*r.selected) : py::none();
  return d;
}

// A table cache bound to one (B, seed, table_dir) calibration setup.
class Session {
 public:
  Session(std::int64_t B, std::uint64_t seed, std::string table_dir,
          unsigned threads, const std::string& calibrate) {
    CalibrationOptions c;
    c.B = B;
    c.seed = seed;
    c.table_dir = std::move(table_dir);
    c.threads = threads;
    if (calibrate == "mc")
      c.mode = CalibrationMode::ForceMC;
    else if (calibrate == "cauchy")
      c.mode = CalibrationMode::Cauchy;
    else if (calibrate == "auto")
      c.mode = CalibrationMode::Auto;
    else
      throw UsageError("calibrate must be auto, mc, or cauchy");
    provider_ = std::make_unique<TableProvider>(std::move(c));
  }

  py::dict combine(const std::vector<double>& p, const std::string& method,
                   std::optional<double> tau,
                   std::optional<std::vector<double>> tau_set,
                   std::optional<double> delta, std::optional<double> gamma) {
    const MethodSpec spec =
        build_spec(method, tau, std::move(tau_set), delta, gamma);
    const Combiner comb(spec, static_cast<int>(p.size()), *provider_);
    return to_dict(comb.combine(p));
  }

  py::dict combine_pair(const std::vector<double>& left,
                        const std::vector<double>& right,
                        const std::string& method, std::optional<double> delta,
                        std::optional<double> gamma) {
    const MethodSpec spec =
        build_spec(method, std::nullopt, std::nullopt, delta, gamma);
    const Combiner comb(spec, static_cast<int>(left.size()), *provider_);
    return to_dict(comb.combine_pair(left, right));
  }

  double critical(const std::string& method, int K, double alpha,
                  std::optional<double> tau) {
    const MethodSpec spec =
        build_spec(method, tau, std::nullopt, std::nullopt, std::nullopt);
    const Combiner comb(spec, K, *provider_);
    return comb.critical_stat(alpha);
  }

  std::vector<std::string> table_keys() const {
    return provider_->used_keys();
  }

 private:
  std::unique_ptr<TableProvider> provider_;
};

py::dict fit_dict(const RegressionFit& f) {
  py::dict d;
  d["beta_age"] = f.beta_age;
  d["se"] = f.se;
  d["t"] = f.t;
  d["p_two"] = f.p_two;
  d["p_left"] = f.p_left;
  d["p_right"] = f.p_right;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "p-value combination methods with Monte Carlo calibration";
  m.attr("__version__") = PCOMBINE_VERSION;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<GuardError>(m, "GuardError", PyExc_RuntimeError);

  py::class_<Session>(m, "Session",
                      "Null-table cache bound to one (B, seed) setup")
      .def(py::init<std::int64_t, std::uint64_t, std::string, unsigned,
                    const std::string&>(),
           py::arg("B") = 100000, py::arg("seed") = 20240817ull,
           py::arg("table_dir") = "", py::arg("threads") = 0,
           py::arg("calibrate") = "auto")
      .def("combine", &Session::combine, py::arg("p"),
           py::arg("method") = "fisher", py::arg("tau") = py::none(),
           py::arg("tau_set") = py::none(), py::arg("delta") = py::none(),
           py::arg("gamma") = py::none(),
           "Combine one two-sided p-value vector")
      .def("combine_pair", &Session::combine_pair, py::arg("left"),
           py::arg("right"), py::arg("method") = "fecs",
           py::arg("delta") = py::none(), py::arg("gamma") = py::none(),
           "Combine one (left, right) one-sided p-value pair")
      .def("critical", &Session::critical, py::arg("method"), py::arg("K"),
           py::arg("alpha"), py::arg("tau") = py::none(),
           "Rejection threshold on the statistic scale")
      .def("table_keys", &Session::table_keys,
           "Cache keys touched by this session");

  m.def("bh_qvalues", &bh_qvalues, py::arg("pvalues"),
        "Benjamini-Hochberg step-up q-values");
  m.def(
      "fit_feature_regression",
      [](const std::vector<double>& y, const std::vector<double>& age,
         const std::vector<double>& sex) {
        return fit_dict(fit_feature_regression(y, age, sex));
      },
      py::arg("y"), py::arg("age"), py::arg("sex"),
      "OLS of y on [1, age, sex]; p-values for the age slope");
  m.def("association_measure", &association_measure, py::arg("beta"),
        py::arg("p_left"), py::arg("p_right"));
  m.def("chi2_sf", [](double x, double df) { return special::chi2_sf(x, df); },
        py::arg("x"), py::arg("df"));
  m.def("normal_quantile", &special::normal_quantile, py::arg("p"));
  m.def("cauchy_sf", &special::cauchy_sf, py::arg("t"));
  m.def("method_names", [] {
    std::vector<std::string> out;
    for (int i = 0; i <= static_cast<int>(Method::FECS); ++i)
      out.push_back(method_name(static_cast<Method>(i)));
    return out;
  });
}
