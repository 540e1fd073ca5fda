#include "bioid/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "bioid/errors.hpp"

namespace bioid {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr const char* kModelFormat = "bioid-model";
constexpr const char* kCommitteeFormat = "bioid-committee";

json model_to_json(const MlpModel& m, const std::optional<ModelMeta>& meta) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kFormatVersion;
  j["topology"] = {{"input_dim", m.topology.input_dim},
                   {"hidden_dim", m.topology.hidden_dim},
                   {"output_dim", m.topology.output_dim}};
  const Eigen::VectorXd params = m.flatten();
  j["params"] = std::vector<double>(params.data(), params.data() + params.size());
  if (meta) {
    j["meta"] = {{"scheme", meta->scheme},
                 {"seed", meta->seed},
                 {"epochs", meta->epochs}};
  }
  return j;
}

MlpModel model_from_json(const json& j, const std::string& where) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw DataError(where + ": not a model file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw DataError(where + ": unsupported checkpoint version");
    }
    const auto& t = j.at("topology");
    MlpTopology topology{t.at("input_dim").get<int>(),
                         t.at("hidden_dim").get<int>(),
                         t.at("output_dim").get<int>()};
    const auto params = j.at("params").get<std::vector<double>>();
    if (static_cast<int>(params.size()) != topology.param_count()) {
      throw DataError(where + ": parameter count does not match topology");
    }
    return MlpModel::unflatten(
        topology, Eigen::Map<const Eigen::VectorXd>(
                      params.data(), static_cast<Eigen::Index>(params.size())));
  } catch (const json::exception& e) {
    throw DataError(where + ": malformed checkpoint (" + e.what() + ")");
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  out << j.dump(2) << "\n";
}

}  // namespace

void save_model(const MlpModel& m, const std::filesystem::path& path,
                const std::optional<ModelMeta>& meta) {
  write_json(model_to_json(m, meta), path);
}

MlpModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path), path.string());
}

void save_committee(const Committee& c, const std::filesystem::path& path) {
  json j;
  j["format"] = kCommitteeFormat;
  j["version"] = kFormatVersion;
  j["members"] = json::array();
  for (const auto& m : c.experts) {
    j["members"].push_back(model_to_json(m, std::nullopt));
  }
  write_json(j, path);
}

Committee load_committee(const std::filesystem::path& path) {
  const json j = read_json(path);
  try {
    if (j.at("format").get<std::string>() != kCommitteeFormat) {
      throw DataError(path.string() + ": not a committee file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw DataError(path.string() + ": unsupported checkpoint version");
    }
    std::vector<MlpModel> members;
    for (const auto& mj : j.at("members")) {
      members.push_back(model_from_json(mj, path.string()));
    }
    return Committee(std::move(members));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed committee file (" + e.what() +
                    ")");
  }
}

std::variant<MlpModel, Committee> load_model_or_committee(
    const std::filesystem::path& path) {
  const json j = read_json(path);
  std::string format;
  try {
    format = j.at("format").get<std::string>();
  } catch (const json::exception&) {
    throw DataError(path.string() + ": missing format field");
  }
  if (format == kModelFormat) {
    return model_from_json(j, path.string());
  }
  if (format == kCommitteeFormat) {
    return load_committee(path);
  }
  throw DataError(path.string() + ": unknown format '" + format + "'");
}

}  // namespace bioid
