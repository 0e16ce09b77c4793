#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rssloc/harness.hpp"

namespace rssloc {

using nlohmann::json;

// Scenario and solver configs share one structured-text (JSON) format,
// keys mapping 1:1 to the struct fields. Units: meters, dBm, dB.
void to_json(json& j, const Scenario& s);
void from_json(const json& j, Scenario& s);
void to_json(json& j, const BarpropConfig& c);
void from_json(const json& j, BarpropConfig& c);
void to_json(json& j, const RmspropConfig& c);
void from_json(const json& j, RmspropConfig& c);
void to_json(json& j, const LmConfig& c);
void from_json(const json& j, LmConfig& c);
void to_json(json& j, const DeConfig& c);
void from_json(const json& j, DeConfig& c);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

/// Full CLI configuration document with every key present at its default
/// value (the benchmark-study parameters).
json default_config();

/// Read a config file and merge it over the defaults. Throws
/// std::runtime_error with a diagnostic on parse failure or unknown keys.
json load_config(const std::string& path);

/// Apply `key=value` overrides (dotted paths, values parsed as JSON with a
/// string fallback). Every path must already exist in the config. Returns
/// the echo strings ("key=value") for report metadata.
std::vector<std::string> apply_overrides(json& config, const std::vector<std::string>& sets);

/// Build the experiment spec (scenario source, target, runs, algorithms,
/// solver configs) from a merged config document.
ExperimentSpec spec_from_config(const json& config);

/// CSV rows: algorithm, sweep_value, rmse, crlb, mean_time_ms, mean_iters.
/// Override echoes appear as leading `# key=value` comment lines. Floats are
/// written in shortest round-trip form so identical reports serialize to
/// identical bytes.
std::string report_csv(const std::vector<ExperimentReport>& reports,
                       const std::vector<std::string>& override_echo);

/// Structured dump with metadata, per-algorithm summaries, full error
/// samples and CDF points.
json report_json(const std::vector<ExperimentReport>& reports,
                 const std::vector<std::string>& override_echo, std::uint64_t master_seed);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rssloc
