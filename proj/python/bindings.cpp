#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstring>

#include "fcdcc/config.hpp"
#include "fcdcc/cost.hpp"
#include "fcdcc/errors.hpp"
#include "fcdcc/experiments.hpp"
#include "fcdcc/runtime.hpp"
#include "fcdcc/tensor.hpp"
#include "fcdcc/verify.hpp"

namespace py = pybind11;
using namespace fcdcc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor3 to_tensor3(const Array& a) {
  if (a.ndim() != 3) throw ShapeError("expected a 3-d array (C, H, W)");
  const Dims3 d{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                static_cast<std::size_t>(a.shape(2))};
  return Tensor3(d, std::vector<double>(a.data(), a.data() + a.size()));
}

Tensor4 to_tensor4(const Array& a) {
  if (a.ndim() != 4) throw ShapeError("expected a 4-d array (N, C, K_H, K_W)");
  const Dims4 d{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
  return Tensor4(d, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor3& t) {
  Array out({t.channels(), t.height(), t.width()});
  std::memcpy(out.mutable_data(), t.data().data(), t.size() * sizeof(double));
  return out;
}

py::dict report_dict(const SimReport& r) {
  py::dict d;
  d["codec"] = std::string(to_string(r.codec));
  d["n"] = r.n;
  d["k_A"] = r.k_A;
  d["k_B"] = r.k_B;
  d["delta"] = r.delta;
  d["gamma"] = r.gamma;
  d["responsive"] = r.responsive;
  d["used_workers"] = r.used_workers;
  d["makespan"] = r.makespan;
  d["encode_time"] = r.encode_time;
  d["upload_time"] = r.upload_time;
  d["compute_time"] = r.compute_time;
  d["download_time"] = r.download_time;
  d["decode_time"] = r.decode_time;
  d["kappa"] = r.kappa;
  d["v_comm_up"] = r.v_comm_up;
  d["v_comm_down"] = r.v_comm_down;
  d["v_store"] = r.v_store;
  d["m_comp"] = r.m_comp;
  return d;
}

py::dict cost_dict(const CostBreakdown& c) {
  py::dict d;
  d["comm_up"] = c.c_comm_up;
  d["comm_down"] = c.c_comm_down;
  d["comp"] = c.c_comp;
  d["store"] = c.c_store;
  d["total"] = c.total;
  return d;
}

py::dict optimize_dict(const OptimizeRow& r) {
  py::dict d;
  d["model"] = r.model;
  d["layer"] = r.layer;
  d["Q"] = r.Q;
  d["k_A"] = r.k_A;
  d["k_B"] = r.k_B;
  d["U"] = r.cost;
  d["k_A_continuous"] = r.k_A_continuous;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coded distributed convolution with rotation-embedded codes.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<ParameterError>(m, "ParameterError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DecodeInfeasibleError>(m, "DecodeInfeasibleError", base);
  py::register_exception<StarvationError>(m, "StarvationError", base);

  py::class_<LayerDims>(m, "LayerDims")
      .def(py::init([](std::size_t C, std::size_t H, std::size_t W, std::size_t N, std::size_t K_H,
                       std::size_t K_W, std::size_t stride, std::size_t padding) {
             return LayerDims{C, H, W, N, K_H, K_W, stride, padding};
           }),
           py::arg("C"), py::arg("H"), py::arg("W"), py::arg("N"), py::arg("K_H"), py::arg("K_W"),
           py::arg("stride") = 1, py::arg("padding") = 0)
      .def_readwrite("C", &LayerDims::C)
      .def_readwrite("H", &LayerDims::H)
      .def_readwrite("W", &LayerDims::W)
      .def_readwrite("N", &LayerDims::N)
      .def_readwrite("K_H", &LayerDims::K_H)
      .def_readwrite("K_W", &LayerDims::K_W)
      .def_readwrite("stride", &LayerDims::stride)
      .def_readwrite("padding", &LayerDims::padding)
      .def("__repr__", [](const LayerDims& d) {
        return "LayerDims(C=" + std::to_string(d.C) + ", H=" + std::to_string(d.H) +
               ", W=" + std::to_string(d.W) + ", N=" + std::to_string(d.N) +
               ", K_H=" + std::to_string(d.K_H) + ", K_W=" + std::to_string(d.K_W) +
               ", stride=" + std::to_string(d.stride) + ", padding=" + std::to_string(d.padding) +
               ")";
      });

  m.def(
      "conv3d_ref",
      [](const Array& x, const Array& k, std::size_t stride, std::size_t padding) {
        return to_array(conv3d_ref(to_tensor3(x), to_tensor4(k), {stride, padding}));
      },
      py::arg("x"), py::arg("k"), py::arg("stride") = 1, py::arg("padding") = 0,
      "Direct convolution of x (C, H, W) with k (N, C, K_H, K_W).");

  m.def(
      "coded_conv",
      [](const Array& x, const Array& k, std::size_t n, std::size_t k_A, std::size_t k_B,
         std::size_t stride, std::size_t padding, const std::string& codec,
         const std::vector<std::size_t>& failed, const std::map<std::size_t, double>& delayed,
         std::uint64_t seed, double seconds_per_mac, double seconds_per_entry) {
        SimConfig cfg;
        cfg.n = n;
        cfg.k_A = k_A;
        cfg.k_B = k_B;
        cfg.conv = {stride, padding};
        cfg.codec = parse_codec(codec);
        cfg.stragglers.failed = failed;
        for (const auto& [id, delay] : delayed) cfg.stragglers.delayed.push_back({id, delay});
        cfg.seed = seed;
        cfg.time = {seconds_per_mac, seconds_per_entry};
        const Tensor3 xt = to_tensor3(x);
        const Tensor4 kt = to_tensor4(k);
        RunResult r = [&] {
          py::gil_scoped_release release;
          return run_end_to_end(xt, kt, cfg);
        }();
        return py::make_tuple(to_array(r.output), report_dict(r.report));
      },
      py::arg("x"), py::arg("k"), py::arg("n"), py::arg("k_A"), py::arg("k_B"),
      py::arg("stride") = 1, py::arg("padding") = 0, py::arg("codec") = "crme",
      py::arg("failed") = std::vector<std::size_t>{},
      py::arg("delayed") = std::map<std::size_t, double>{}, py::arg("seed") = 0,
      py::arg("seconds_per_mac") = 1e-9, py::arg("seconds_per_entry") = 1e-8,
      "Coded convolution over n simulated workers. Returns (output, report).");

  m.def(
      "run_config_json",
      [](const std::string& text) {
        const RunConfig cfg = parse_run_config(text);
        RunRecord rec = [&] {
          py::gil_scoped_release release;
          return run_config(cfg);
        }();
        py::dict d = report_dict(rec.report);
        d["mse"] = rec.mse;
        d["max_abs_error"] = rec.max_abs_error;
        return d;
      },
      py::arg("text"), "Runs a JSON configuration document and returns its run record.");

  m.def(
      "stability",
      [](const std::vector<std::size_t>& n,
         const std::vector<std::pair<std::size_t, std::size_t>>& k, std::size_t trials,
         std::uint64_t seed) {
        const auto rows = [&] {
          py::gil_scoped_release release;
          return stability_rows({n, k, trials, seed});
        }();
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["codec"] = std::string(to_string(r.codec));
          d["n"] = r.n;
          d["k_A"] = r.k_A;
          d["k_B"] = r.k_B;
          d["delta"] = r.delta;
          d["subset_id"] = r.subset_id;
          d["kappa"] = r.kappa;
          d["mse"] = r.mse;
          d["workers"] = r.workers;
          out.append(d);
        }
        return out;
      },
      py::arg("n"), py::arg("k"), py::arg("trials"), py::arg("seed"),
      "Condition numbers and decode errors over random recovery subsets.");

  m.def(
      "stability_csv",
      [](const std::vector<std::size_t>& n,
         const std::vector<std::pair<std::size_t, std::size_t>>& k, std::size_t trials,
         std::uint64_t seed) { return stability_csv(stability_rows({n, k, trials, seed})); },
      py::arg("n"), py::arg("k"), py::arg("trials"), py::arg("seed"));

  m.def(
      "total_cost",
      [](const LayerDims& dims, std::size_t k_A, std::size_t k_B, double lambda_comm,
         double lambda_comp, double lambda_store) {
        return cost_dict(total_cost(dims, {lambda_comm, lambda_comp, lambda_store}, k_A, k_B));
      },
      py::arg("dims"), py::arg("k_A"), py::arg("k_B"), py::arg("lambda_comm") = 0.09,
      py::arg("lambda_comp") = 0.0, py::arg("lambda_store") = 0.023);

  m.def(
      "node_volumes",
      [](const LayerDims& dims, std::size_t k_A, std::size_t k_B) {
        const NodeVolumes v = node_volumes(dims, k_A, k_B);
        py::dict d;
        d["comm_up"] = v.comm_up;
        d["comm_down"] = v.comm_down;
        d["store"] = v.store;
        d["comp"] = v.comp;
        return d;
      },
      py::arg("dims"), py::arg("k_A"), py::arg("k_B"));

  m.def(
      "optimize_layer",
      [](const LayerDims& dims, std::size_t Q, double lambda_comm, double lambda_comp,
         double lambda_store) {
        const CostCoefficients c{lambda_comm, lambda_comp, lambda_store};
        const DiscreteOptimum o = optimize_discrete(dims, c, Q);
        py::dict d;
        d["k_A"] = o.k_A;
        d["k_B"] = o.k_B;
        d["U"] = o.cost.total;
        d["cost"] = cost_dict(o.cost);
        return d;
      },
      py::arg("dims"), py::arg("Q"), py::arg("lambda_comm") = 0.09, py::arg("lambda_comp") = 0.0,
      py::arg("lambda_store") = 0.023);

  m.def(
      "optimize_model",
      [](const std::string& model, const std::vector<std::size_t>& Qs, double lambda_comm,
         double lambda_comp, double lambda_store) {
        py::list out;
        for (const auto& r : optimize_table(layers_for_model(model),
                                            {lambda_comm, lambda_comp, lambda_store}, Qs))
          out.append(optimize_dict(r));
        return out;
      },
      py::arg("model"), py::arg("Q"), py::arg("lambda_comm") = 0.09, py::arg("lambda_comp") = 0.0,
      py::arg("lambda_store") = 0.023);

  m.def("registry_models", &registry_models);
  m.def(
      "registry_layers",
      [](const std::string& model) {
        py::list out;
        for (const auto& e : layers_for_model(model)) out.append(py::make_tuple(e.layer, e.dims));
        return out;
      },
      py::arg("model"));

  m.def(
      "verify",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : run_invariant_checks(seed))
          out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
      },
      py::arg("seed") = 1, "Runs the invariant suite. Returns (name, passed, detail) tuples.");
}
