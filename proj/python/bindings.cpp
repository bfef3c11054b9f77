#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sigmabilap/cli.hpp"
#include "sigmabilap/cone_exponents.hpp"
#include "sigmabilap/corner_spectrum.hpp"
#include "sigmabilap/kernel1d.hpp"

namespace py = pybind11;
using namespace sigmabilap;

namespace {

py::dict report_dict(const RegionReport& r) {
    py::dict d;
    d["g"] = r.g_value;
    d["ell_minus"] = r.ell_minus;
    d["ell_plus"] = r.ell_plus;
    d["membership"] = to_string(r.membership);
    return d;
}

py::object root_dict(const std::optional<SingularExponentResult>& r) {
    if (!r) return py::none();
    py::dict d;
    d["eta0"] = r->eta0;
    d["residual"] = r->residual;
    d["bracket"] = r->bracket;
    d["sign_changes"] = r->sign_changes_found;
    d["extended_precision"] = r->extended_precision;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sigmabilap, m) {
    m.doc() = "Corner exponents, 1D kernels, cone exponents and the CLI driver";

    m.def("eval_h", [](double a, double k, double eta) { return eval_h({a, k}, eta); }, py::arg("alpha"),
          py::arg("kappa"), py::arg("eta"));
    m.def("eval_g", [](double a, double k) { return eval_g({a, k}); }, py::arg("alpha"), py::arg("kappa"));
    m.def("interval_endpoints", &interval_endpoints, py::arg("alpha"));
    m.def("classify_region",
          [](double a, double k, double eps) { return report_dict(classify_region({a, k}, eps)); },
          py::arg("alpha"), py::arg("kappa"), py::arg("eps_boundary") = 1e-6);
    m.def("find_eta0", [](double a, double k) { return root_dict(find_eta0({a, k})); }, py::arg("alpha"),
          py::arg("kappa"));
    m.def("normalized_determinant",
          [](double a, double k, double re, double im) { return normalized_determinant({a, k}, cplx(re, im)); },
          py::arg("alpha"), py::arg("kappa"), py::arg("re"), py::arg("im"));

    m.def("critical_contrasts_two_segment", [](double t) { return critical_contrasts_two_segment(t).roots; },
          py::arg("t"));
    m.def("critical_contrasts_three_segment",
          [](double delta) { return critical_contrasts_three_segment(delta).roots; }, py::arg("delta"));
    m.def("scan_two_segment", [](double a, double b) { return scan_critical_contrasts(TwoSegmentDomain{a, b}).roots; },
          py::arg("a"), py::arg("b"));
    m.def("scan_three_segment", [](double delta) { return scan_critical_contrasts(ThreeSegmentDomain{delta}).roots; },
          py::arg("delta"));

    m.def("legendre_p", &legendre_p, py::arg("nu"), py::arg("x"));
    m.def("cap_mu1", &cap_mu1, py::arg("alpha"));
    m.def("critical_aperture", &critical_aperture);
    m.def("lambda_pm", &lambda_pm, py::arg("d"), py::arg("mu"));
    m.def("fredholm_classify",
          [](double beta, int l, int d, double lp) { return to_string(fredholm_classify({beta, l, d}, lp)); },
          py::arg("beta"), py::arg("l"), py::arg("d"), py::arg("lambda1_plus"));

    m.def("run_cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "sigmabilap");
              std::ostringstream out, err;
              const int code = cli::run(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"));
}
