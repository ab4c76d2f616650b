#pragma once

#include "fracdrift/config.hpp"
#include "fracdrift/estimators.hpp"
#include "fracdrift/montecarlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>

namespace fracdrift {

/// 17 significant digits ("%.17g"), which round-trips any double. NaN prints as "nan".
std::string format_number(double x);

/// Writes `text` with LF line endings; throws IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

/// CSV with header "t,path_1,...,path_N" and one row per node.
std::string paths_csv(const PathBundle& bundle);

/// Reads a file produced by paths_csv back into a solution bundle.
PathBundle read_paths_csv(const std::filesystem::path& path);

nlohmann::ordered_json estimate_record(const EstimateFBM& est);
nlohmann::ordered_json estimate_record(const EstimateBM& est);

/// One header line plus one row, keys in record order.
std::string record_csv(const nlohmann::ordered_json& record);

/// Optional wall-clock seconds go in the last column; omitted (empty) keeps output byte-stable.
std::string summary_csv(const RunConfig& config, const SummaryReport& report,
                        std::optional<double> seconds);
nlohmann::ordered_json summary_json(const RunConfig& config, const SummaryReport& report,
                            std::optional<double> seconds);

/// Columns trial,N,estimate,aci_lower,aci_upper; failed estimates leave empty fields.
std::string trajectories_csv(std::span<const TrialResult> trials);
nlohmann::ordered_json trajectories_json(std::span<const TrialResult> trials);

std::string sweep_csv(const SummaryReport& report);
nlohmann::ordered_json sweep_json(const SummaryReport& report);

}  // namespace fracdrift
