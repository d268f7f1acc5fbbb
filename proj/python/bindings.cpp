// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attndrop/attention_drop.hpp"
#include "attndrop/errors.hpp"
#include "attndrop/kernel_table.hpp"
#include "attndrop/metrics.hpp"
#include "attndrop/ops.hpp"
#include "attndrop/run_io.hpp"
#include "attndrop/theory.hpp"
#include "attndrop/trainer.hpp"

namespace py = pybind11;
using namespace attndrop;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict variance_dict(const VarianceReport& r) {
  py::dict d;
  d["var_base"] = r.var_base;
  d["var_ad"] = r.var_ad;
  d["var_delta"] = r.var_delta;
  d["cov"] = r.cov;
  d["identity_residual"] = r.identity_residual;
  d["condition_holds"] = r.condition_holds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "attndrop native core";

  static PyObject* domain_error = py::exception<DomainError>(m, "DomainError", PyExc_ValueError).release().ptr();
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::object err = py::reinterpret_borrow<py::object>(domain_error)(e.what());
      err.attr("value") = e.value();
      PyErr_SetObject(domain_error, err.ptr());
    }
  });

  py::class_<GaussianKernelTable>(m, "KernelTable")
      .def_static("build", &GaussianKernelTable::build, py::arg("w"), py::arg("sigma_max"), py::arg("steps") = 50)
      .def_static("from_json", &GaussianKernelTable::from_json)
      .def_property_readonly("width", &GaussianKernelTable::width)
      .def_property_readonly("sigma_max", &GaussianKernelTable::sigma_max)
      .def_property_readonly("steps", &GaussianKernelTable::steps)
      .def_property_readonly("sigmas", &GaussianKernelTable::sigmas)
      .def("kernel",
           [](const GaussianKernelTable& t, std::size_t row) {
             const auto k = t.kernel(row);
             return std::vector<double>(k.begin(), k.end());
           })
      .def("nearest_row", &GaussianKernelTable::nearest_row)
      .def("to_json", &GaussianKernelTable::to_json);

  m.def("gaussian_kernel", &gaussian_kernel_1d, py::arg("w"), py::arg("sigma"));
  m.def("topk", [](const std::vector<double>& row, std::size_t k) { return topk_indices(row, k); }, py::arg("row"),
        py::arg("k"));

  m.def("softmax", [](const Array& logits) { return to_array(softmax_rows(to_tensor(logits))); });
  m.def(
      "hard_mask",
      [](const Array& logits, double p, std::size_t k, std::uint64_t seed, bool training) {
        RngStream rng(seed);
        return to_array(hard_mask(to_tensor(logits), p, k, rng, training));
      },
      py::arg("logits"), py::arg("p"), py::arg("k"), py::arg("seed") = 0, py::arg("training") = true);
  m.def(
      "blur",
      [](const Array& logits, const GaussianKernelTable& table, std::uint64_t seed, bool training,
         const std::string& mode) {
        RngStream rng(seed);
        return to_array(blur_smooth(to_tensor(logits), table, rng, training, blur_mode_from_string(mode)));
      },
      py::arg("logits"), py::arg("table"), py::arg("seed") = 0, py::arg("training") = true, py::arg("mode") = "row");
  m.def(
      "smooth_logits",
      [](const Array& logits, const std::vector<double>& kernel, const std::string& mode) {
        return to_array(smooth_logits(to_tensor(logits), kernel, blur_mode_from_string(mode)));
      },
      py::arg("logits"), py::arg("kernel"), py::arg("mode") = "row");
  m.def("consistency_loss",
        [](const Array& z1, const Array& z2) { return consistency_loss(to_tensor(z1), to_tensor(z2)).item(); });

  m.def("kl_gaussian_attention", &kl_gaussian_attention, py::arg("heads"), py::arg("seq_len"), py::arg("sigma"));
  m.def(
      "pac_bayes_bound",
      [](std::size_t heads, std::size_t seq_len, double sigma, std::size_t n, double delta, double emp_risk) {
        TheoryInputs in{heads, seq_len, n, delta, sigma, emp_risk};
        return pac_bayes_bound(in, kl_gaussian_attention(heads, seq_len, sigma));
      },
      py::arg("heads"), py::arg("seq_len"), py::arg("sigma"), py::arg("n"), py::arg("delta") = 0.05,
      py::arg("emp_risk") = 0.0);
  m.def(
      "variance_decomposition",
      [](const std::vector<std::vector<double>>& base, const std::vector<std::vector<double>>& ad) {
        return variance_dict(variance_decomposition(base, ad));
      },
      py::arg("g_base"), py::arg("g_ad"));

  m.def(
      "ece",
      [](const std::vector<double>& confidence, const std::vector<bool>& correct, std::size_t bins) {
        if (confidence.size() != correct.size()) throw DimensionError("ece: confidence and correct differ in length");
        std::vector<Prediction> preds;
        for (std::size_t i = 0; i < confidence.size(); ++i) preds.push_back({confidence[i], correct[i]});
        return expected_calibration_error(preds, bins);
      },
      py::arg("confidence"), py::arg("correct"), py::arg("bins") = 15);

  m.def("default_config", [] { return run_config_to_json(RunConfig{}); });
  m.def(
      "train",
      [](const std::string& config_json) {
        const auto cfg = parse_run_config(config_json);
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_training(cfg);
        }
        py::list epochs;
        for (const auto& r : rec.epochs) {
          py::dict d;
          d["epoch"] = r.epoch;
          d["task_loss"] = r.task_loss;
          d["cons_loss"] = r.cons_loss;
          d["train_acc"] = r.train_acc;
          d["val_acc"] = r.val_acc;
          d["ece"] = r.ece;
          d["grad_var"] = r.grad_var;
          d["wall_ms"] = r.wall_ms;
          epochs.append(d);
        }
        py::dict out;
        out["epochs"] = epochs;
        out["parameter_count"] = rec.parameter_count;
        out["final_variance"] = variance_dict(rec.final_variance);
        out["csv"] = run_record_csv(rec);
        return out;
      },
      py::arg("config_json") = "{}");
}
