#pragma once

#include "wcga/analysis.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/greedy.hpp"

#include <json.hpp>

#include <string>

namespace wcga {

/// Version stamped into every JSON document this library writes. Readers
/// refuse documents carrying any other value.
inline constexpr int kSchemaVersion = 1;

/// Throws std::runtime_error naming the found and expected versions.
void require_schema_version(const nlohmann::json& doc);

void to_json(nlohmann::json& j, const DictionaryDescriptor& d);
void from_json(const nlohmann::json& j, DictionaryDescriptor& d);

void to_json(nlohmann::json& j, const GreedyConfig& c);
void from_json(const nlohmann::json& j, GreedyConfig& c);

/// Indices, norms, config and stop reason; the final residual samples are
/// not stored, only its coefficients.
void to_json(nlohmann::json& j, const GreedyTrace& t);
void from_json(const nlohmann::json& j, GreedyTrace& t);

void to_json(nlohmann::json& j, const ConditionEstimate& e);
void from_json(const nlohmann::json& j, ConditionEstimate& e);

void to_json(nlohmann::json& j, const SigmaTable& s);

void to_json(nlohmann::json& j, const DecayBoundReport& r);
void to_json(nlohmann::json& j, const RateBoundReport& r);
void to_json(nlohmann::json& j, const Lemma31Report& r);

/// Columns: m, sigma_m, support (indices joined by ';').
std::string sigma_table_csv(const SigmaTable& table);

/// Fixed 17-significant-digit rendering used by every CSV writer.
std::string format_number(double v);

}  // namespace wcga
