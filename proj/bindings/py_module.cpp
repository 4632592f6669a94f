#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tradeslab/cli.hpp"
#include "tradeslab/telemetry.hpp"

namespace py = pybind11;
using namespace tradeslab;

namespace {

Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  Shape shape(arr.ndim());
  for (py::ssize_t i = 0; i < arr.ndim(); ++i)
    shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arr.shape(i));
  std::vector<double> data(arr.data(), arr.data() + arr.size());
  return Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
  py::array_t<double> arr(shape);
  std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
  return arr;
}

py::array_t<int> array_from_labels(const std::vector<int>& labels) {
  py::array_t<int> arr(static_cast<py::ssize_t>(labels.size()));
  std::copy(labels.begin(), labels.end(), arr.mutable_data());
  return arr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "TRADES adversarial-training laboratory with gradient-masking "
            "instrumentation";

  m.def(
      "gen_blobs",
      [](std::size_t classes, std::size_t per_class, std::size_t dim, double spread,
         std::uint64_t seed) {
        Rng rng(seed);
        const Dataset ds = gen_blobs(classes, per_class, dim, spread, rng);
        return py::make_tuple(array_from_tensor(ds.features),
                              array_from_labels(ds.labels));
      },
      py::arg("classes"), py::arg("per_class"), py::arg("dim"), py::arg("spread"),
      py::arg("seed"),
      "Synthetic Gaussian-cluster dataset rescaled to [0,1]^dim; returns "
      "(features, labels).");

  m.def(
      "fosc_closed_form",
      [](const py::array_t<double>& x_clean, const py::array_t<double>& x_adv,
         const py::array_t<double>& grad, double epsilon) {
        const Tensor a = tensor_from_array(x_clean);
        const Tensor b = tensor_from_array(x_adv);
        const Tensor g = tensor_from_array(grad);
        return fosc_closed_form(a.data, b.data, g.data, epsilon);
      },
      py::arg("x_clean"), py::arg("x_adv"), py::arg("grad"), py::arg("epsilon"),
      "eps * ||grad||_1 - <x_adv - x_clean, grad>");

  m.def("masking_verdict", &masking_verdict, py::arg("pgd_acc"), py::arg("blackbox_acc"),
        py::arg("threshold") = 0.08,
        "True iff white-box accuracy exceeds black-box accuracy by >= threshold.");

  m.def(
      "lr_at",
      [](std::size_t epoch, double lr0, const std::vector<std::size_t>& decay_epochs,
         double gamma) {
        TrainConfig cfg;
        cfg.lr0 = lr0;
        cfg.lr_decay_epochs = decay_epochs;
        cfg.lr_gamma = gamma;
        return lr_at(epoch, cfg);
      },
      py::arg("epoch"), py::arg("lr0"), py::arg("decay_epochs"), py::arg("gamma"));

  m.def("train_run", &cmd_train, py::arg("config_path"), py::arg("out_dir"),
        py::arg("seed_override") = std::nullopt,
        "Run training from a config file; returns the CLI exit code.");

  m.def("eval_run", &cmd_eval, py::arg("ckpt_path"), py::arg("config_path"),
        py::arg("attacks") = "", py::arg("out_path") = "",
        py::arg("seed_override") = std::nullopt,
        "Evaluate a checkpoint; returns the CLI exit code.");

  m.def(
      "predict",
      [](const std::string& ckpt_path, const py::array_t<double>& x) {
        const Params params = params_of(load_checkpoint(ckpt_path));
        return array_from_labels(predict(params, tensor_from_array(x)));
      },
      py::arg("ckpt_path"), py::arg("x"),
      "Class predictions of a checkpointed model for a [n x d] array.");

  m.def("rng_algorithm", [] { return std::string(Rng::kAlgorithm); });
}
