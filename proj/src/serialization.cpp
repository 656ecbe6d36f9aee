#include "alignpxtr/serialization.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alignpxtr/conddist.hpp"

namespace alignpxtr {

using nlohmann::json;

nlohmann::json bias_spec_to_json(const BiasSpec& spec) {
  json dims = json::array();
  for (const auto& dim : spec.dimensions()) {
    json d;
    d["name"] = dim.name;
    if (const auto* c = std::get_if<Categorical>(&dim.kind)) {
      d["kind"] = "categorical";
      d["cardinality"] = c->cardinality;
    } else {
      d["kind"] = "continuous";
      d["boundaries"] = std::get<Continuous>(dim.kind).boundaries;
    }
    dims.push_back(std::move(d));
  }
  return dims;
}

BiasSpec bias_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("bias_dimensions: expected an array");
  std::vector<BiasDimension> dims;
  for (const auto& d : doc) {
    BiasDimension dim;
    dim.name = require_field(d, "name").get<std::string>();
    const auto kind = require_field(d, "kind").get<std::string>();
    if (kind == "categorical") {
      const auto cardinality = require_field(d, "cardinality").get<long long>();
      if (cardinality < 1) {
        throw std::invalid_argument("bias_dimensions." + dim.name +
                                    ".cardinality: must be positive");
      }
      dim.kind = Categorical{static_cast<std::size_t>(cardinality)};
    } else if (kind == "continuous") {
      dim.kind = Continuous{require_field(d, "boundaries").get<std::vector<double>>()};
    } else {
      throw std::invalid_argument("bias_dimensions." + dim.name + ".kind: unknown kind '" + kind +
                                  "'");
    }
    dims.push_back(std::move(dim));
  }
  return BiasSpec(std::move(dims));
}

const nlohmann::json& require_field(const nlohmann::json& doc, std::string_view field) {
  if (!doc.is_object()) {
    throw std::invalid_argument("expected an object holding '" + std::string(field) + "'");
  }
  const auto it = doc.find(std::string(field));
  if (it == doc.end()) throw std::invalid_argument("missing field '" + std::string(field) + "'");
  return *it;
}

void check_artifact(const nlohmann::json& doc, std::string_view artifact) {
  const int version = require_field(doc, "format_version").get<int>();
  if (version != kArtifactFormatVersion) {
    throw std::invalid_argument("unsupported format_version " + std::to_string(version));
  }
  const auto tag = require_field(doc, "artifact").get<std::string>();
  if (tag != artifact) {
    throw std::invalid_argument("expected a '" + std::string(artifact) + "' artifact, found '" +
                                tag + "'");
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace alignpxtr
