// Copyright 2026 The outage-alloc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "outage/allocator.hpp"
#include "outage/analysis.hpp"
#include "outage/channel_sim.hpp"
#include "outage/errors.hpp"
#include "outage/losses.hpp"
#include "outage/predictor.hpp"

namespace py = pybind11;
using namespace outage;

namespace {

CapacityMode parse_capacity_mode(const std::string& s) {
  if (s == "mean") return CapacityMode::kMean;
  if (s == "sum") return CapacityMode::kSum;
  throw py::value_error("capacity mode must be 'mean' or 'sum'");
}

IndependenceMode parse_independence(const std::string& s) {
  if (s == "shared_fft") return IndependenceMode::kSharedFft;
  if (s == "independent") return IndependenceMode::kIndependentEpisodes;
  throw py::value_error("mode must be 'shared_fft' or 'independent'");
}

std::vector<std::uint8_t> to_labels(const std::vector<int>& b) {
  std::vector<std::uint8_t> out;
  out.reserve(b.size());
  for (int v : b) {
    if (v != 0 && v != 1) throw py::value_error("labels must be 0 or 1");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

py::dict tally_dict(const ConfusionTally& t) {
  py::dict d;
  d["tn"] = t.tn;
  d["fn"] = t.fn;
  d["tp"] = t.tp;
  d["fp"] = t.fp;
  return d;
}

py::dict proportion_dict(const Proportion& p) {
  py::dict d;
  d["value"] = p.value;
  d["n"] = p.n;
  d["standard_error"] = p.standard_error;
  return d;
}

py::array_t<cplx> episode_array(const ChannelEpisode& ep) {
  py::array_t<cplx> out({ep.resource_count(), ep.length()});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < ep.resource_count(); ++r) {
    for (std::size_t t = 0; t < ep.length(); ++t) {
      m(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(t)) = ep.at(r, t);
    }
  }
  return out;
}

py::dict result_dict(const MonteCarloResult& r) {
  py::dict d;
  d["outage"] = r.outage.value;
  d["standard_error"] = r.outage.standard_error;
  d["n_episodes"] = r.outage.n_samples;
  d["p1"] = proportion_dict(r.p1);
  d["fq"] = proportion_dict(r.fq);
  d["pinf"] = proportion_dict(r.pinf);
  d["pinf_defined"] = r.pinf_defined;
  d["theorem1_plugin"] = r.plugin.value;
  d["theorem1_plugin_se"] = r.plugin.standard_error;
  d["fallback_count"] = r.fallback_count;
  d["selection_counts"] = r.selection_counts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of outage_alloc.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n_taps", &SimConfig::n_taps)
      .def_readwrite("k", &SimConfig::k)
      .def_readwrite("l", &SimConfig::l)
      .def_readwrite("resource_count", &SimConfig::resource_count)
      .def_readwrite("phase_half_width", &SimConfig::phase_half_width)
      .def_readwrite("gamma_th", &SimConfig::gamma_th)
      .def_readwrite("seed", &SimConfig::seed)
      .def_property(
          "capacity_mode",
          [](const SimConfig& c) {
            return std::string(c.capacity_mode == CapacityMode::kMean ? "mean" : "sum");
          },
          [](SimConfig& c, const std::string& s) { c.capacity_mode = parse_capacity_mode(s); })
      .def("validate", &SimConfig::validate);

  m.def(
      "capacity",
      [](const std::vector<cplx>& w, const std::string& mode) {
        return capacity(w, parse_capacity_mode(mode));
      },
      py::arg("window"), py::arg("mode") = "mean");
  m.def(
      "label",
      [](const std::vector<cplx>& f, double gamma_th, const std::string& mode) {
        return static_cast<int>(label(f, gamma_th, parse_capacity_mode(mode)));
      },
      py::arg("future"), py::arg("gamma_th"), py::arg("mode") = "mean");

  m.def(
      "theorem1_outage",
      [](double p1, double fq, double pinf, std::size_t resource_count) {
        return theorem1_outage({p1, fq, pinf, resource_count});
      },
      py::arg("p1"), py::arg("fq"), py::arg("pinf"), py::arg("resource_count"));

  m.def(
      "confusion",
      [](const std::vector<double>& q, const std::vector<int>& b, double q_th,
         std::optional<double> alpha) {
        const Weighting w = alpha ? Weighting::logistic(*alpha) : Weighting::heaviside();
        return tally_dict(confusion(q, to_labels(b), q_th, w));
      },
      py::arg("q"), py::arg("b"), py::arg("q_th"), py::arg("alpha") = py::none(),
      "Heaviside tallies, or logistic tallies with slope alpha.");

  m.def(
      "custom_loss",
      [](const std::vector<double>& q, const std::vector<int>& b, double q_th,
         double alpha, std::size_t resource_count) {
        const LossValue v = custom_loss(q, to_labels(b), q_th, alpha, resource_count);
        return py::make_tuple(v.value, py::array_t<double>(v.grad.size(), v.grad.data()));
      },
      py::arg("q"), py::arg("b"), py::arg("q_th") = 0.5, py::arg("alpha") = 10.0,
      py::arg("resource_count") = 6, "Returns (loss, d loss / d q).");

  m.def(
      "greedy_select",
      [](const std::vector<double>& q, double q_th) {
        const Selection s = greedy_select(q, q_th);
        return py::make_tuple(s.index, s.fallback);
      },
      py::arg("q"), py::arg("q_th"),
      "Returns (1-based resource index, fallback flag).");

  m.def(
      "simulate_episode",
      [](const SimConfig& cfg, std::uint64_t index, const std::string& mode) {
        return episode_array(simulate_episode(cfg, index, parse_independence(mode)));
      },
      py::arg("config"), py::arg("index") = 0, py::arg("mode") = "shared_fft",
      "Complex array of shape (resource_count, k + l).");

  py::class_<PredictorParams>(m, "Predictor")
      .def(py::init([](std::uint64_t seed, std::uint32_t hidden, std::uint32_t dense) {
             Rng rng = make_rng(seed);
             return init_params(
                 Architecture::for_mode(FeatureMode::kMagnitude, hidden, dense), rng);
           }),
           py::arg("seed") = 0, py::arg("hidden") = 32, py::arg("dense") = 16)
      .def_static("load", &load_params, py::arg("path"))
      .def("save", [](const PredictorParams& p, const std::filesystem::path& path) {
        save_params(p, path);
      })
      .def_property_readonly("parameter_count", &PredictorParams::size)
      .def_property_readonly("values",
                             [](const PredictorParams& p) {
                               const auto v = p.values();
                               return py::array_t<double>(v.size(), v.data());
                             })
      .def("predict", [](const PredictorParams& p, const std::vector<cplx>& w) {
        return forward(p, w).first;
      });

  m.def(
      "monte_carlo",
      [](const SimConfig& cfg, py::object classifier, double q_th,
         std::size_t n_episodes, std::uint64_t seed, const std::string& mode) {
        const IndependenceMode im = parse_independence(mode);
        if (py::isinstance<PredictorParams>(classifier)) {
          const LstmClassifier clf(classifier.cast<PredictorParams>());
          MonteCarloResult r;
          {
            py::gil_scoped_release release;
            r = monte_carlo(cfg, clf, q_th, n_episodes, im, seed);
          }
          return result_dict(r);
        }
        // Python callables run on the calling thread with the GIL held.
        auto fn = classifier.cast<std::function<double(std::vector<cplx>)>>();
        const FunctionClassifier clf([&fn](std::span<const cplx> w) {
          return fn(std::vector<cplx>(w.begin(), w.end()));
        });
        return result_dict(monte_carlo(cfg, clf, q_th, n_episodes, im, seed, 1));
      },
      py::arg("config"), py::arg("classifier"), py::arg("q_th"),
      py::arg("n_episodes"), py::arg("seed") = 0, py::arg("mode") = "shared_fft",
      "classifier is a Predictor or a callable mapping a window to a score.");
}
