// Run manifests and report files written by the rotgrad tool.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotgrad/harness.hpp"

namespace rotgrad::cli {

inline constexpr int kReportSchemaVersion = 1;

/// Git blob id of the text: sha1("blob <size>\0" + text), lowercase hex.
std::string git_blob_sha1(const std::string& text);

/// Hash of the compact, key-sorted serialization of a config object.
std::string config_hash(const nlohmann::json& config);

/// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

struct RunManifest {
  nlohmann::json config;
  std::string started;
  std::string finished;
  std::vector<std::filesystem::path> outputs;

  nlohmann::json to_json() const;
};

nlohmann::json metrics_json(const MetricsRow& row);

/// Header row then one line per row, columns in the fixed order
/// iteration,mean_deg,median_deg,acc5,acc3,mean_norm.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

/// {"schema_version", "kind", "manifest", "result"}, pretty-printed.
void write_report(const std::filesystem::path& path, const std::string& kind,
                  const RunManifest& manifest, const nlohmann::json& result);

}  // namespace rotgrad::cli
