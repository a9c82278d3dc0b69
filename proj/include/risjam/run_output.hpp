#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "risjam/scenario.hpp"

// Artifact plumbing: scenario files in, result files and a manifest out.
namespace risjam::io {

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kResultsColumns = "scenario,target_set,device,metric,value";

enum class Format { Csv, Json };

Format format_from_string(std::string_view name);

/// Input that is well-formed but cannot be processed together, such as
/// results of differently shaped runs.
class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  unsigned threads = 1;
  Format format = Format::Csv;
};

struct FileEntry {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  int manifest_version = kManifestVersion;
  std::string tool_version;
  std::string scenario;
  std::string mode;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  std::vector<FileEntry> files;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
};

std::string tool_version();
std::string sha256_hex(std::string_view data);

/// Reads and validates a scenario document. Unreadable files and malformed
/// JSON are reported as ValidationError.
scn::ScenarioSpec parse_scenario(const std::filesystem::path& path);
scn::ScenarioSpec parse_scenario_text(std::string_view text);

/// SHA-256 of the normalized scenario; independent of key order and of
/// defaults being spelled out.
std::string scenario_hash(const scn::ScenarioSpec& spec);

void write_results_csv(std::ostream& out, const scn::RunResult& result);
nlohmann::json results_to_json(const scn::RunResult& result);
/// Header row of x coordinates (first cell "y\\x"), then one row per y.
void write_heatmap_csv(std::ostream& out, const scn::HeatmapGrid& grid);

/// Runs the scenario and writes its artifacts below `out_dir`.
RunManifest execute(scn::ScenarioSpec spec, const std::filesystem::path& out_dir, const RunOptions& options);

/// One (target_set, device, metric) value of a results file.
struct ResultKey {
  std::string target_set;
  std::string device;
  std::string metric;
  auto operator<=>(const ResultKey&) const = default;
};

std::vector<std::pair<ResultKey, double>> load_results(const std::filesystem::path& manifest_path);

/// Per-metric deltas between two runs, separation regressions and
/// diagonal-dominance changes. Throws ShapeMismatch when the runs cover
/// different target sets or devices.
nlohmann::json compare_runs(const std::filesystem::path& manifest_a, const std::filesystem::path& manifest_b);

/// Machine-readable error document.
nlohmann::json error_json(std::string_view kind, const std::string& message, const std::string& path = {});

}  // namespace risjam::io
