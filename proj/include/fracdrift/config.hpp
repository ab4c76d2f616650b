#pragma once

#include "fracdrift/montecarlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fracdrift {

enum class OutputFormat { csv, json };

/// Everything a CLI run needs: the experiment plus output and sweep settings.
struct RunConfig {
  ExperimentConfig experiment;
  std::filesystem::path out_dir = ".";
  OutputFormat format = OutputFormat::csv;
  int verbosity = 0;
  int n_fixed = 15;          ///< sweep sample size
  std::string sweep_grid;    ///< "start:step:count", empty = none

  bool operator==(const RunConfig&) const = default;
};

/// Validates a JSON key-value document and fills defaults.
///
/// Model presets pin the horizon, σ, x₀ and θ₀ ("model1": T = 0.1, σ = 0.25;
/// "model2": T = 0.75, σ = 1; both x₀ = 5, θ₀ = 1) unless the document overrides them.
/// Unknown keys and out-of-range values raise ValidationError naming the field.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads `path` (if any), applies "key=value" overrides in order, then parses.
/// Override values are read as JSON when possible and as strings otherwise.
nlohmann::json load_config_document(const std::optional<std::filesystem::path>& path,
                                    const std::vector<std::string>& overrides);

/// The effective configuration; parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// "start:step:count" → {start + k·step ; k = 0..count-1}.
std::vector<double> parse_threshold_grid(const std::string& spec);

}  // namespace fracdrift
