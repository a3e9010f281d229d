// Python bindings. Trajectories cross the boundary as float64 arrays shaped
// (channels, steps); ground motions as 1-D arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "seisop/config.hpp"
#include "seisop/dataset.hpp"
#include "seisop/dynamics.hpp"
#include "seisop/error.hpp"
#include "seisop/excitation.hpp"
#include "seisop/metrics.hpp"
#include "seisop/neuralop.hpp"
#include "seisop/pipeline.hpp"
#include "seisop/refine.hpp"
#include "seisop/simplify.hpp"

namespace py = pybind11;
using namespace seisop;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Trajectory& t) {
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(t.channels()), static_cast<py::ssize_t>(t.steps())});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Array to_array_1d(const Trajectory& t) {
  // An explicit shape vector; a bare size_t picks an overload with zero stride.
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(t.steps())});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

// 1-D input becomes one channel.
Trajectory to_trajectory(const Array& a, double dt) {
  if (a.ndim() == 1) return Trajectory(TimeGrid(dt, a.shape(0)), 1, std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() == 2) {
    return Trajectory(TimeGrid(dt, a.shape(1)), a.shape(0), std::vector<double>(a.data(), a.data() + a.size()));
  }
  throw InvalidArgument("expected a 1-D or 2-D array, got " + std::to_string(a.ndim()) + " dimensions");
}

std::vector<Trajectory> to_trajectories(const std::vector<Array>& arrays, double dt) {
  std::vector<Trajectory> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(to_trajectory(a, dt));
  return out;
}

// Runs f without the GIL and converts the trajectory afterwards.
template <class F>
Array released(F&& f) {
  std::optional<Trajectory> t;
  {
    py::gil_scoped_release release;
    t.emplace(f());
  }
  return to_array(*t);
}

double config_dt(const ExperimentConfig& c) { return c.excitation.grid.dt(); }

}  // namespace

PYBIND11_MODULE(seisop, m) {
  m.doc() = "Composite physics-informed neural operator for seismic response";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  py::class_<ExperimentConfig>(m, "Config")
      .def_static("full", &ExperimentConfig::full)
      .def_static("desk", &ExperimentConfig::desk)
      .def_static("from_json", [](const std::string& text) { return parse_config(text); })
      .def_static("load", &load_config)
      .def("to_json", [](const ExperimentConfig& c) { return config_to_json(c); })
      .def("physics_hash", [](const ExperimentConfig& c) { return physics_hash(c); })
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("substeps", &ExperimentConfig::substeps)
      .def_property_readonly("dt", &config_dt)
      .def_property_readonly("steps", [](const ExperimentConfig& c) { return c.excitation.grid.size(); })
      .def_property_readonly("stories", [](const ExperimentConfig& c) { return c.model.n_dof(); })
      .def_property(
          "simplifier", [](const ExperimentConfig& c) { return c.simplifier.to_string(); },
          [](ExperimentConfig& c, const std::string& s) { c.simplifier = simplify::SimplifierKind::parse(s); })
      .def("__repr__", [](const ExperimentConfig& c) { return "Config(" + config_to_json(c, -1) + ")"; });

  m.def("record_seed", &record_seed, py::arg("master_seed"), py::arg("index"));
  m.def(
      "synthesize_ground_motion",
      [](const ExperimentConfig& c, std::uint64_t seed) {
        RngStream rng(seed);
        return to_array_1d(excitation::synthesize(c.excitation, rng));
      },
      py::arg("config"), py::arg("seed"), "One ground motion a_g(t) drawn with the given seed.");

  m.def(
      "simulate",
      [](const ExperimentConfig& c, const Array& a_g) {
        const auto ag = to_trajectory(a_g, config_dt(c));
        return released([&] { return dynamics::simulate_nonlinear(c.model, ag, c.substeps); });
      },
      py::arg("config"), py::arg("a_g"), "Nonlinear story displacements, shape (stories, steps).");
  m.def(
      "simplified_response",
      [](const ExperimentConfig& c, const Array& a_g, const std::string& kind) {
        const auto ag = to_trajectory(a_g, config_dt(c));
        const auto k = simplify::SimplifierKind::parse(kind);
        return released([&] { return simplify::apply(k, c.model, ag, c.substeps); });
      },
      py::arg("config"), py::arg("a_g"), py::arg("simplifier") = "els",
      "Response of a simplified model: 'els', 'modal:r' or 'relaxed:k'.");

  m.def(
      "truncated_dft",
      [](const std::vector<double>& x, std::size_t modes) { return neuralop::truncated_dft(x, modes); },
      py::arg("x"), py::arg("modes"));
  m.def(
      "truncated_idft",
      [](const std::vector<std::complex<double>>& c, std::size_t n) { return neuralop::truncated_idft(c, n); },
      py::arg("modes"), py::arg("n"));

  py::class_<PairedDataset>(m, "Dataset")
      .def_static(
          "generate",
          [](const ExperimentConfig& c, const std::string& simplifier, std::size_t count, std::uint64_t seed) {
            const auto k = simplify::SimplifierKind::parse(simplifier);
            py::gil_scoped_release release;
            return generate_dataset(c, k, count, seed);
          },
          py::arg("config"), py::arg("simplifier"), py::arg("count"), py::arg("seed"))
      .def_static("load", &load_dataset)
      .def("save", [](const PairedDataset& d, const std::string& path) { save_dataset(path, d); })
      .def("__len__", &PairedDataset::size)
      .def_property_readonly("simplifier", [](const PairedDataset& d) { return d.simplifier.to_string(); })
      .def("a_g", [](const PairedDataset& d, std::size_t j) { return to_array_1d(d.records.at(j).a_g); })
      .def("z",
           [](const PairedDataset& d, std::size_t j) -> std::optional<Array> {
             const auto& z = d.records.at(j).z;
             return z ? std::optional<Array>(to_array(*z)) : std::nullopt;
           })
      .def("u",
           [](const PairedDataset& d, std::size_t j) -> std::optional<Array> {
             const auto& u = d.records.at(j).u;
             return u ? std::optional<Array>(to_array(*u)) : std::nullopt;
           })
      .def(
          "split",
          [](const PairedDataset& d, std::size_t n_train, std::size_t n_val, std::size_t n_test, std::uint64_t seed) {
            auto parts = split(d, n_train, n_val, n_test, seed);
            return py::make_tuple(parts[0], parts[1], parts[2]);
          },
          py::arg("train"), py::arg("validation"), py::arg("test"), py::arg("seed"));

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_static(
          "train",
          [](const PairedDataset& tr, const PairedDataset& va, const ExperimentConfig& c, const std::string& mode,
             std::optional<std::uint64_t> seed) {
            const Mode md = parse_mode(mode);
            py::gil_scoped_release release;
            auto ck = train(tr, va, c.network, c.training, seed.value_or(c.seed), md);
            ck.set_config(c);
            return ck;
          },
          py::arg("train"), py::arg("validation"), py::arg("config"), py::arg("mode") = "composite",
          py::arg("seed") = py::none(), "Adam training; keeps the best-validation parameters.")
      .def_static("load", &load_checkpoint)
      .def("save", [](const Checkpoint& ck, const std::string& path) { save_checkpoint(path, ck); })
      .def_property_readonly("mode", [](const Checkpoint& ck) { return to_string(ck.mode); })
      .def_readonly("best_epoch", &Checkpoint::best_epoch)
      .def_property_readonly("parameter_count", [](const Checkpoint& ck) { return ck.params.size(); })
      .def_property_readonly("history",
                             [](const Checkpoint& ck) {
                               std::vector<std::pair<double, double>> h;
                               for (const auto& e : ck.history) h.emplace_back(e.train, e.validation);
                               return h;
                             })
      .def(
          "predict",
          [](const Checkpoint& ck, const Array& a_g, std::optional<Array> z) {
            const double dt = ck.grid().dt();
            const auto ag = to_trajectory(a_g, dt);
            std::optional<Trajectory> zt;
            if (z) zt = to_trajectory(*z, dt);
            return released([&] { return predict(ck, ag, zt ? &*zt : nullptr); });
          },
          py::arg("a_g"), py::arg("z") = py::none())
      .def("predict_dataset", [](const Checkpoint& ck, const PairedDataset& d) {
        std::vector<Trajectory> p;
        {
          py::gil_scoped_release release;
          p = predict_dataset(ck, d);
        }
        std::vector<Array> out;
        for (const auto& t : p) out.push_back(to_array(t));
        return out;
      });

  py::class_<refine::RefinementModel>(m, "Refinement")
      .def_static(
          "fit",
          [](const std::vector<Array>& z, const std::vector<Array>& u_hat, const std::vector<Array>& u,
             std::size_t samples, std::uint64_t seed) {
            return refine::fit_refinement(to_trajectories(z, 1.0), to_trajectories(u_hat, 1.0),
                                          to_trajectories(u, 1.0), samples, seed);
          },
          py::arg("z"), py::arg("u_hat"), py::arg("u"), py::arg("samples") = 1000, py::arg("seed") = 0)
      .def_readonly("weights", &refine::RefinementModel::weights)
      .def_readonly("sigma", &refine::RefinementModel::sigma)
      .def_readonly("ridge", &refine::RefinementModel::ridge)
      .def(
          "predict",
          [](const refine::RefinementModel& r, const Array& z, const Array& u_hat) {
            const auto p = refine::refine_predict(r, to_trajectory(z, 1.0), to_trajectory(u_hat, 1.0));
            return py::make_tuple(to_array(p.mean), p.sigma);
          },
          py::arg("z"), py::arg("u_hat"), "Returns (mean, sigma per story).")
      .def("to_json", [](const refine::RefinementModel& r) { return refine::to_json(r); })
      .def_static("from_json", [](const std::string& s) { return refine::from_json(s); });

  m.def(
      "rmse",
      [](const std::vector<Array>& p, const std::vector<Array>& t) {
        return metrics::rmse(to_trajectories(p, 1.0), to_trajectories(t, 1.0));
      },
      py::arg("predictions"), py::arg("targets"), "Per-story RMSE over all records and steps.");
  m.def(
      "relative_l2",
      [](const std::vector<Array>& p, const std::vector<Array>& t) {
        return metrics::relative_l2(to_trajectories(p, 1.0), to_trajectories(t, 1.0));
      },
      py::arg("predictions"), py::arg("targets"), "Per-story relative L2 error.");
  m.def(
      "peak_distribution",
      [](const std::vector<Array>& t) { return metrics::peak_distribution(to_trajectories(t, 1.0)); },
      py::arg("trajectories"));
  m.def(
      "ks_statistic", [](const std::vector<double>& a, const std::vector<double>& b) { return metrics::ks_statistic(a, b); },
      py::arg("a"), py::arg("b"));
}
