#include <random>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "densecap/bounds.hpp"
#include "densecap/compress.hpp"
#include "densecap/computational.hpp"
#include "densecap/cutnorm.hpp"
#include "densecap/error.hpp"
#include "densecap/network.hpp"
#include "densecap/propagation.hpp"

namespace py = pybind11;
using namespace densecap;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dense networks, their computational kernels, cut norms and compression";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<DenseNetwork>(m, "DenseNetwork")
      .def_readonly("depth", &DenseNetwork::depth)
      .def_readonly("input_dim", &DenseNetwork::input_dim)
      .def_readonly("output_dim", &DenseNetwork::output_dim)
      .def_readonly("hidden_dim", &DenseNetwork::hidden_dim)
      .def_readonly("bound", &DenseNetwork::bound)
      .def_readonly("weights", &DenseNetwork::weights)
      .def_readonly("biases", &DenseNetwork::biases)
      .def("forward", [](const DenseNetwork& n, const Eigen::VectorXd& x) { return forward(n, x); })
      .def("serialize", [](const DenseNetwork& n) { return serialize(n); });

  m.def("make_network", &make_network, py::arg("L"), py::arg("d0"), py::arg("dL"), py::arg("d"),
        py::arg("B"), py::arg("weights"), py::arg("biases"));
  m.def(
      "random_network",
      [](int L, int d0, int dL, int d, double B, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_network(L, d0, dL, d, B, rng);
      },
      py::arg("L"), py::arg("d0"), py::arg("dL"), py::arg("d"), py::arg("B"), py::arg("seed") = 0);
  m.def("deserialize", &deserialize, py::arg("text"));
  m.def("param_count", &param_count, py::arg("L"), py::arg("d0"), py::arg("dL"), py::arg("d"));

  /// Kernel coefficients c = A / B of the induced computational kernel.
  m.def("induce_kernel", [](const DenseNetwork& n) { return induce_kernel(n).kernel().coeffs(); });

  m.def(
      "check_equivalence",
      [](const DenseNetwork& n, const Eigen::VectorXd& x, double tol) {
        const EquivalenceReport r = check_equivalence(n, x, tol);
        py::dict out;
        out["network"] = r.network;
        out["kernel"] = r.kernel;
        out["graph"] = r.graph;
        out["max_discrepancy"] = r.max_discrepancy;
        out["bias_deviation"] = r.bias_deviation;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("net"), py::arg("x"), py::arg("tol") = 1e-9);

  /// Exact cut norm of a block matrix whose rows and columns carry equal measure.
  m.def(
      "kernel_cut_norm",
      [](const Eigen::MatrixXd& values, int cap) {
        MeasuredMatrix mm{values, Eigen::VectorXd::Constant(values.rows(), 1.0 / values.rows()),
                          Eigen::VectorXd::Constant(values.cols(), 1.0 / values.cols())};
        return kernel_cut_norm_exact(mm, cap).value;
      },
      py::arg("values"), py::arg("cap") = 24);

  m.def(
      "compress",
      [](const DenseNetwork& n, int target_d, double epsilon, int samples, std::uint64_t seed) {
        CompressOptions o;
        o.target_d = target_d;
        o.epsilon = epsilon;
        o.samples = samples;
        o.seed = seed;
        CompressionResult r = compress_network(n, o);
        return py::make_tuple(r.network, report_json(r.report));
      },
      py::arg("net"), py::arg("target_d") = 0, py::arg("epsilon") = 0.0,
      py::arg("samples") = 10000, py::arg("seed") = 0);

  m.def("lipschitz_constant", [](const std::string& B, int L) {
    return lipschitz_constant(parse_rational(B), L).exact_text();
  });
  m.def("compression_hidden_dim_log2", [](const std::string& eps, const std::string& B, int L,
                                          std::int64_t d0, std::int64_t dL) {
    return compression_hidden_dim(parse_rational(eps), parse_rational(B), L, d0, dL).log2_text();
  });
}
