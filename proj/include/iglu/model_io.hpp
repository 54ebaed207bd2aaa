#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "iglu/clarke.hpp"
#include "iglu/evaluation.hpp"
#include "iglu/metrics.hpp"
#include "iglu/model.hpp"

namespace iglu::io {

using Json = nlohmann::ordered_json;

/// Serializes with floating-point numbers at 17 significant digits, two-space
/// indentation and keys in insertion order. Output is byte-stable.
std::string dump(const Json& j);

Json to_json(const metrics::MetricsReport& r);
metrics::MetricsReport metrics_from_json(const Json& j);

Json to_json(const PolynomialModel& m);
Json to_json(const LogisticModel& m, const std::optional<metrics::MetricsReport>& training = std::nullopt);
Json to_json(const SvrModel& m, const std::optional<metrics::MetricsReport>& training = std::nullopt);
Json to_json(const DnnModel& m, const std::optional<metrics::MetricsReport>& training = std::nullopt);
Json model_to_json(const FittedModel& m, const std::optional<metrics::MetricsReport>& training = std::nullopt);

/// Parses any model document; throws a data error on schema violations.
FittedModel model_from_json(const Json& j);

void save_model(const FittedModel& m, const std::optional<metrics::MetricsReport>& training,
                const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

Json to_json(const clarke::CegReport& r);
Json to_json(const CrossValResult& r);
Json to_json(const StudyResult& r);
Json to_json(const StabilityReport& r);
Json to_json(const ComparisonResult& r);

void write_text(const std::filesystem::path& path, const std::string& body);
std::string read_text(const std::filesystem::path& path);

}  // namespace iglu::io
