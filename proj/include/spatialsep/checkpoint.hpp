#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatialsep/model.hpp"

namespace spatialsep {

struct Checkpoint {
    SeparatorModel model;
    std::vector<std::string> labels;
    /// Free-form run metadata (experiment label, seeds, ...).
    nlohmann::json metadata = nlohmann::json::object();
};

/// File layout: one line of compact JSON describing the shape, then the flat
/// parameter vector, the normalisation mean and the normalisation std, all
/// as little-endian float64.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json shape_to_json(const ModelShape& shape);
ModelShape shape_from_json(const nlohmann::json& j);

} // namespace spatialsep
