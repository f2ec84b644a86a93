#pragma once

// JSON documents for every on-disk artifact. Each document carries a
// "schema_version"; readers reject versions they do not know.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "shaftpower/ef_fit.hpp"
#include "shaftpower/metrics.hpp"
#include "shaftpower/rpm_poly.hpp"
#include "shaftpower/synth.hpp"
#include "shaftpower/train.hpp"

namespace shaftpower {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const ResistanceCoefficients& k);
ResistanceCoefficients coefficients_from_json(const Json& j);

Json to_json(const MultiplicativePolyModel& m);
MultiplicativePolyModel rpm_model_from_json(const Json& j);

Json to_json(const FeatureGroups& g);
FeatureGroups feature_groups_from_json(const Json& j);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const EfFitConfig& c);
EfFitConfig ef_fit_config_from_json(const Json& j);

Json to_json(const MlpModel& m);
MlpModel mlp_from_json(const Json& j);

Json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const Json& j);

Json to_json(const TrainedPredictor& p);
TrainedPredictor predictor_from_json(const Json& j);

/// Partial documents are allowed: absent keys keep their defaults.
Json to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const Json& j);

Json to_json(const EvalReport& r);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const Json& j);
std::uint64_t fnv1a(std::string_view bytes);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace shaftpower
