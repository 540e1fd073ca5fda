#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "bioid/committee.hpp"
#include "bioid/mlp.hpp"

namespace bioid {

// Optional provenance carried inside checkpoints; has no effect on
// inference.
struct ModelMeta {
  std::string scheme;
  std::uint64_t seed = 0;
  int epochs = 0;
};

// Checkpoints are JSON: {"format":"bioid-model","version":1,"topology":
// {...},"params":[...]} with params in the documented flattening order.
// Committee files are {"format":"bioid-committee","version":1,
// "members":[<model objects>]}.
void save_model(const MlpModel& m, const std::filesystem::path& path,
                const std::optional<ModelMeta>& meta = std::nullopt);
MlpModel load_model(const std::filesystem::path& path);

void save_committee(const Committee& c, const std::filesystem::path& path);
Committee load_committee(const std::filesystem::path& path);

// Loads either format; used by the eval CLI.
std::variant<MlpModel, Committee> load_model_or_committee(
    const std::filesystem::path& path);

}  // namespace bioid
