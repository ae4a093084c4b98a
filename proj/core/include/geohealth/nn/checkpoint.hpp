#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "geohealth/nn/train.hpp"

namespace geohealth::nn {

nlohmann::json spec_to_json(const ModelSpec& spec);
/// Missing keys keep their defaults; unknown enum names throw InvalidConfig.
ModelSpec spec_from_json(const nlohmann::json& j, ModelSpec base = {});

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace geohealth::nn
