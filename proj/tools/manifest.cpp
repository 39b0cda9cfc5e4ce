#include "manifest.hpp"

#include <openssl/sha.h>

#include <cstdio>
#include <ctime>
#include <fstream>

#include "rotgrad/errors.hpp"

#ifndef ROTGRAD_VERSION
#define ROTGRAD_VERSION "0.0.0"
#endif

namespace rotgrad::cli {

std::string git_blob_sha1(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char b : digest) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  return hex;
}

std::string config_hash(const nlohmann::json& config) { return git_blob_sha1(config.dump()); }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : outputs) paths.push_back(p.string());
  return {{"tool", "rotgrad"},
          {"version", ROTGRAD_VERSION},
          {"config", config},
          {"config_hash", config_hash(config)},
          {"started", started},
          {"finished", finished},
          {"outputs", paths}};
}

nlohmann::json metrics_json(const MetricsRow& row) {
  return {{"iteration", row.iteration}, {"mean_deg", row.mean_deg},
          {"median_deg", row.median_deg}, {"acc5", row.acc5},
          {"acc3", row.acc3},           {"mean_norm", row.mean_norm}};
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "iteration,mean_deg,median_deg,acc5,acc3,mean_norm\n";
  char line[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(line, sizeof line, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.mean_deg, r.median_deg, r.acc5, r.acc3, r.mean_norm);
    out << line;
  }
}

void write_report(const std::filesystem::path& path, const std::string& kind,
                  const RunManifest& manifest, const nlohmann::json& result) {
  const nlohmann::json report = {{"schema_version", kReportSchemaVersion},
                                 {"kind", kind},
                                 {"manifest", manifest.to_json()},
                                 {"result", result}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

}  // namespace rotgrad::cli
