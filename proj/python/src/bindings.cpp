#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "alignpxtr/align.hpp"
#include "alignpxtr/commands.hpp"
#include "alignpxtr/conddist.hpp"
#include "alignpxtr/config.hpp"
#include "alignpxtr/metrics.hpp"
#include "alignpxtr/serialization.hpp"

namespace py = pybind11;
using namespace alignpxtr;

namespace {

ExperimentConfig parse_config(const std::string& text) {
  return ExperimentConfig::from_json(nlohmann::json::parse(text));
}

std::vector<BiasKey> to_keys(const std::vector<std::vector<std::size_t>>& keys) {
  std::vector<BiasKey> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(BiasKey{k});
  return out;
}

// Runs a command with its log captured; returns (result, log).
template <typename F>
auto logged(F&& f) {
  std::ostringstream log;
  auto result = f(log);
  return std::make_pair(std::move(result), log.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bias-conditional score alignment";

  m.def("default_config", [] { return default_experiment().to_json().dump(); },
        "Default experiment as a JSON string.");
  m.def("validate_config", [](const std::string& text) { return parse_config(text).to_json().dump(); },
        py::arg("config_json"));
  m.def("config_fingerprint", [](const std::string& text) { return parse_config(text).fingerprint(); },
        py::arg("config_json"));

  m.def("simulate", [](const std::string& cfg, const std::filesystem::path& out) {
    return logged([&](std::ostream& log) { return cmd_simulate(parse_config(cfg), out, log); });
  }, py::arg("config_json"), py::arg("out"));
  m.def("fit", [](const std::string& cfg, const std::filesystem::path& data, const std::filesystem::path& models) {
    return logged([&](std::ostream& log) {
      cmd_fit(parse_config(cfg), data, models, log);
      return 0;
    }).second;
  }, py::arg("config_json"), py::arg("data"), py::arg("models"));
  m.def("transform", [](const std::string& cfg, const std::filesystem::path& data,
                        const std::filesystem::path& models, const std::filesystem::path& out) {
    return logged([&](std::ostream& log) { return cmd_transform(parse_config(cfg), data, models, out, log); });
  }, py::arg("config_json"), py::arg("data"), py::arg("models"), py::arg("out"));
  m.def("evaluate", [](const std::string& cfg, const std::filesystem::path& data,
                       const std::filesystem::path& report, std::optional<std::filesystem::path> models) {
    return logged([&](std::ostream& log) {
      return cmd_evaluate(parse_config(cfg), data, report, models, log).to_json().dump();
    });
  }, py::arg("config_json"), py::arg("data"), py::arg("report"), py::arg("models") = py::none());
  m.def("pipeline", [](const std::string& cfg, const std::filesystem::path& out_dir) {
    return logged([&](std::ostream& log) { return cmd_pipeline(parse_config(cfg), out_dir, log).to_json().dump(); });
  }, py::arg("config_json"), py::arg("out_dir"));

  m.def("mutual_information",
        [](const std::vector<double>& z, const std::vector<std::size_t>& labels, std::size_t bins,
           std::size_t permutations, std::uint64_t seed) {
          MiOptions o;
          o.n_bins_z = bins;
          o.permutations = permutations;
          o.seed = seed;
          const auto est = mutual_information_binned(z, labels, o);
          return std::make_pair(est.nats, est.noise_floor_nats);
        },
        py::arg("z"), py::arg("labels"), py::arg("bins") = 20, py::arg("permutations") = 8,
        py::arg("seed") = 0, "Returns (mi_nats, noise_floor_nats).");
  m.def("ks_uniformity", [](const std::vector<double>& z) { return ks_uniformity(z).d_statistic; },
        py::arg("z"));
  m.def("rank_correlation",
        [](const std::vector<double>& a, const std::vector<double>& b) { return rank_correlation(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("to_gaussian", [](double z, double location, double scale) {
    return to_target(z, GaussianTarget{location, scale});
  }, py::arg("z"), py::arg("location") = 0.0, py::arg("scale") = 1.0);

  py::class_<ConditionalModel>(m, "ConditionalModel")
      .def_static(
          "fit_empirical",
          [](const std::vector<double>& x, const std::vector<std::vector<std::size_t>>& keys,
             const std::string& spec_json, std::size_t grid_size, std::size_t min_bucket_count,
             double shrinkage_strength) {
            if (x.size() != keys.size()) throw std::invalid_argument("x and keys differ in length");
            const auto spec = bias_spec_from_json(nlohmann::json::parse(spec_json));
            const auto k = to_keys(keys);
            std::vector<Observation> obs(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) obs[i] = {x[i], k[i]};
            ConditionalOptions options;
            options.grid_size = grid_size;
            options.min_bucket_count = min_bucket_count;
            options.shrinkage_strength = shrinkage_strength;
            return ConditionalModel::fit_empirical(obs, spec, options);
          },
          py::arg("x"), py::arg("keys"), py::arg("spec_json"), py::arg("grid_size") = 1024,
          py::arg("min_bucket_count") = 100, py::arg("shrinkage_strength") = 50.0)
      .def_static("load", &ConditionalModel::load, py::arg("path"))
      .def("save", &ConditionalModel::save, py::arg("path"))
      .def("cdf", [](const ConditionalModel& self, const std::vector<std::size_t>& key,
                     double x) { return self.cdf(BiasKey{key}, x); }, py::arg("key"), py::arg("x"))
      .def("inv_cdf", [](const ConditionalModel& self, const std::vector<std::size_t>& key,
                         double tau) { return self.inv_cdf(BiasKey{key}, tau); }, py::arg("key"), py::arg("tau"))
      .def("cond_mean", [](const ConditionalModel& self, const std::vector<std::size_t>& key) {
        return self.cond_mean(BiasKey{key});
      }, py::arg("key"))
      .def("count", [](const ConditionalModel& self, const std::vector<std::size_t>& key) {
        return self.count(BiasKey{key});
      }, py::arg("key"))
      .def("quantile_map", [](const ConditionalModel& self, const std::vector<std::size_t>& key,
                              double x) { return quantile_map(self, BiasKey{key}, x); },
           py::arg("key"), py::arg("x"))
      .def("to_json", [](const ConditionalModel& self) { return self.to_json().dump(); });
}
