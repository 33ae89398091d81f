#pragma once

#include "bois/flowsheet.hpp"
#include "bois/gp.hpp"
#include "bois/gp_bank.hpp"

#include <json.hpp>

#include <filesystem>

// JSON schemas (schema_version 1) for trained models and benchmark
// parameters, so a fitted surrogate can be stored once and reused bit-for-bit
// by different consumers.

namespace bois {

nlohmann::json to_json(const GPModel& model);
GPModel gp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GpBank& bank);
GpBank bank_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

FlowsheetParams flowsheet_params_from_json(const nlohmann::json& j);
CostWeights cost_weights_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FlowsheetParams& p);
nlohmann::json to_json(const CostWeights& w);

}  // namespace bois
