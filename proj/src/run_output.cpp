#include "risjam/run_output.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "risjam/format.hpp"
#include "risjam/json_util.hpp"

namespace risjam::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + " is not valid JSON: " + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_value(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

std::string file_name_for(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '+' || c == '#';
    out += safe ? c : '_';
  }
  return out;
}

// Writes `content` and records it in the inventory.
void emit(const fs::path& dir, const std::string& rel, const std::string& content, std::vector<FileEntry>& files) {
  const fs::path path = dir / rel;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
  files.push_back({rel, content.size(), sha256_hex(content)});
}

bool same_value(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Format format_from_string(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ValidationError("unknown format '" + std::string(name) + "'; valid formats: csv, json", "format");
}

std::string tool_version() { return RISJAM_VERSION; }

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

scn::ScenarioSpec parse_scenario_text(std::string_view text) {
  return scn::scenario_from_json(parse_json_text(text, "scenario"));
}

scn::ScenarioSpec parse_scenario(const fs::path& path) { return parse_scenario_text(read_file(path)); }

std::string scenario_hash(const scn::ScenarioSpec& spec) {
  // nlohmann::json keeps object keys sorted, so the dump is canonical.
  return sha256_hex(scn::to_json(spec).dump());
}

json RunManifest::to_json() const {
  json inventory = json::array();
  for (const auto& f : files) inventory.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return {{"manifest_version", manifest_version},
          {"tool_version", tool_version},
          {"scenario", scenario},
          {"mode", mode},
          {"scenario_hash", scenario_hash},
          {"master_seed", master_seed},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"files", inventory}};
}

RunManifest RunManifest::from_json(const json& doc) {
  using namespace json_util;
  expect_object(doc, "manifest");
  RunManifest m;
  m.manifest_version = require<int>(doc, "manifest_version", "manifest");
  if (m.manifest_version != kManifestVersion)
    throw ValidationError("unsupported manifest version " + std::to_string(m.manifest_version),
                          "manifest.manifest_version");
  m.tool_version = require<std::string>(doc, "tool_version", "manifest");
  m.scenario = require<std::string>(doc, "scenario", "manifest");
  m.mode = require<std::string>(doc, "mode", "manifest");
  m.scenario_hash = require<std::string>(doc, "scenario_hash", "manifest");
  m.master_seed = require<std::uint64_t>(doc, "master_seed", "manifest");
  m.started_at = require<std::string>(doc, "started_at", "manifest");
  m.finished_at = require<std::string>(doc, "finished_at", "manifest");
  const auto it = doc.find("files");
  if (it == doc.end()) throw ValidationError("missing required field", "manifest.files");
  expect_array(*it, "manifest.files");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto p = index_path("manifest.files", i);
    const auto& f = (*it)[i];
    expect_object(f, p);
    m.files.push_back({require<std::string>(f, "path", p), require<std::uintmax_t>(f, "bytes", p),
                       require<std::string>(f, "sha256", p)});
  }
  return m;
}

void write_results_csv(std::ostream& out, const scn::RunResult& result) {
  out << kResultsColumns << '\n';
  for (const auto& r : result.rows)
    out << csv_field(result.scenario) << ',' << csv_field(r.target_set) << ',' << csv_field(r.device) << ','
        << csv_field(r.metric) << ',' << fmt_num(r.value) << '\n';
}

json results_to_json(const scn::RunResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"target_set", r.target_set}, {"device", r.device}, {"metric", r.metric},
                    {"value", number_or_null(r.value)}});
  return {{"scenario", result.scenario}, {"rows", rows}, {"summary", result.summary}};
}

void write_heatmap_csv(std::ostream& out, const scn::HeatmapGrid& grid) {
  out << "y\\x";
  for (double x : grid.xs) out << ',' << fmt_num(x);
  out << '\n';
  for (std::size_t j = 0; j < grid.ys.size(); ++j) {
    out << fmt_num(grid.ys[j]);
    for (std::size_t i = 0; i < grid.xs.size(); ++i) out << ',' << fmt_num(grid.db[j * grid.xs.size() + i]);
    out << '\n';
  }
}

RunManifest execute(scn::ScenarioSpec spec, const fs::path& out_dir, const RunOptions& options) {
  if (options.seed) spec.seed = *options.seed;
  scn::validate(spec);
  RunManifest m;
  m.tool_version = tool_version();
  m.scenario = spec.name;
  m.mode = std::string(scn::to_string(spec.mode));
  m.scenario_hash = scenario_hash(spec);
  m.master_seed = spec.seed;
  m.started_at = utc_now();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  fs::remove(out_dir / "error.json", ec);

  const auto result = scn::run_scenario(spec, options.threads);

  emit(out_dir, "scenario.normalized.json", scn::to_json(spec).dump(2) + "\n", m.files);
  {
    const auto env = env::Environment::synthesize(spec.environment, derive_seed(spec.seed, "environment", 0));
    emit(out_dir, "environment.json", env::to_json(env).dump(2) + "\n", m.files);
  }
  if (options.format == Format::Csv) {
    std::ostringstream ss;
    write_results_csv(ss, result);
    emit(out_dir, "results.csv", ss.str(), m.files);
  } else {
    emit(out_dir, "results.json", results_to_json(result).dump(2) + "\n", m.files);
  }
  emit(out_dir, "summary.json", result.summary.dump(2) + "\n", m.files);
  if (result.heatmap) {
    std::ostringstream ss;
    write_heatmap_csv(ss, *result.heatmap);
    emit(out_dir, "heatmap.csv", ss.str(), m.files);
  }
  std::set<std::string> used;
  std::vector<opt::Trace> equal_length;
  for (const auto& t : result.traces) {
    std::string name = file_name_for(t.name);
    while (!used.insert(name).second) name += "_";
    std::ostringstream ss;
    opt::write_trace_csv(ss, t.trace);
    emit(out_dir, "traces/" + name + ".csv", ss.str(), m.files);
    if (equal_length.empty() || (t.trace.size() == equal_length.front().size() &&
                                 t.trace.back().best_config->size() == equal_length.front().back().best_config->size()))
      equal_length.push_back(t.trace);
  }
  if (!equal_length.empty())
    emit(out_dir, "convergence.json", opt::to_json(opt::convergence_stats(equal_length)).dump(2) + "\n", m.files);

  m.finished_at = utc_now();
  std::ofstream mf(out_dir / "manifest.json", std::ios::trunc);
  mf << m.to_json().dump(2) << '\n';
  if (!mf) throw std::runtime_error("cannot write manifest");
  return m;
}

std::vector<std::pair<ResultKey, double>> load_results(const fs::path& manifest_path) {
  const auto manifest = RunManifest::from_json(parse_json_text(read_file(manifest_path), "manifest"));
  const fs::path dir = manifest_path.parent_path();
  std::vector<std::pair<ResultKey, double>> out;
  for (const auto& f : manifest.files) {
    if (f.path == "results.csv") {
      std::istringstream in(read_file(dir / f.path));
      std::string line;
      std::getline(in, line);
      if (line != kResultsColumns) throw ValidationError("unexpected results header", f.path);
      std::size_t n = 1;
      while (std::getline(in, line)) {
        ++n;
        const auto cells = split_csv_line(line);
        if (cells.size() != 5) throw ValidationError("expected 5 columns", f.path + ":" + std::to_string(n));
        try {
          out.push_back({{cells[1], cells[2], cells[3]}, parse_value(cells[4])});
        } catch (const std::invalid_argument&) {
          throw ValidationError("bad value '" + cells[4] + "'", f.path + ":" + std::to_string(n));
        }
      }
      return out;
    }
    if (f.path == "results.json") {
      const auto doc = parse_json_text(read_file(dir / f.path), f.path);
      for (const auto& row : doc.at("rows"))
        out.push_back({{row.at("target_set"), row.at("device"), row.at("metric")},
                       row.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                 : row.at("value").get<double>()});
      return out;
    }
  }
  throw ValidationError("manifest lists no results file", manifest_path.string());
}

json compare_runs(const fs::path& manifest_a, const fs::path& manifest_b) {
  const auto a = load_results(manifest_a);
  const auto b = load_results(manifest_b);
  const auto shape = [](const auto& rows) {
    std::set<std::pair<std::string, std::string>> s;
    for (const auto& [k, v] : rows) s.insert({k.target_set, k.device});
    return s;
  };
  const auto sa = shape(a), sb = shape(b);
  if (sa != sb) {
    std::string detail;
    for (const auto& p : sa)
      if (!sb.count(p)) {
        detail = "(" + p.first + ", " + p.second + ") only in A";
        break;
      }
    if (detail.empty())
      for (const auto& p : sb)
        if (!sa.count(p)) {
          detail = "(" + p.first + ", " + p.second + ") only in B";
          break;
        }
    throw ShapeMismatch("runs cover different target sets or devices: " + detail);
  }
  const std::map<ResultKey, double> ma(a.begin(), a.end()), mb(b.begin(), b.end());

  json deltas = json::array(), only_a = json::array(), only_b = json::array(), regressions = json::array();
  for (const auto& [k, va] : ma) {
    const auto it = mb.find(k);
    if (it == mb.end()) {
      only_a.push_back({{"target_set", k.target_set}, {"device", k.device}, {"metric", k.metric}});
      continue;
    }
    const double vb = it->second;
    if (!same_value(va, vb))
      deltas.push_back({{"target_set", k.target_set}, {"device", k.device}, {"metric", k.metric},
                        {"a", number_or_null(va)}, {"b", number_or_null(vb)}, {"delta", number_or_null(vb - va)}});
    if (k.metric == "separation_db" && vb < va)
      regressions.push_back({{"target_set", k.target_set}, {"a", va}, {"b", vb}, {"delta", vb - va}});
  }
  for (const auto& [k, vb] : mb)
    if (!ma.count(k)) only_b.push_back({{"target_set", k.target_set}, {"device", k.device}, {"metric", k.metric}});

  const auto targets_of = [](const std::string& label) {
    std::set<std::string> out;
    std::size_t pos = 0;
    for (std::size_t next; (next = label.find('+', pos)) != std::string::npos; pos = next + 1)
      out.insert(label.substr(pos, next - pos));
    out.insert(label.substr(pos));
    return out;
  };
  // Per target-set row: every non-target JSR below the targets
  // (diagonal dominance), and targets disrupted with all non-targets
  // operational (selective jamming).
  const auto row_flags = [&](const std::map<ResultKey, double>& m, std::string_view metric, auto&& holds) {
    std::map<std::string, bool> rows;
    for (const auto& [k, v] : m) {
      if (k.metric != metric || k.device == "*") continue;
      auto& ok = rows.try_emplace(k.target_set, true).first->second;
      if (!holds(targets_of(k.target_set).count(k.device) > 0, v)) ok = false;
    }
    return rows;
  };
  const auto dominant = [](bool target, double v) { return target || v < 0.0; };
  const auto selective = [](bool target, double v) { return target ? v <= 5.0 : v >= 90.0; };
  const auto changes = [](const std::map<std::string, bool>& fa, const std::map<std::string, bool>& fb) {
    json list = json::array();
    std::size_t gained = 0, lost = 0;
    for (const auto& [row, in_a] : fa) {
      const auto it = fb.find(row);
      if (it == fb.end() || in_a == it->second) continue;
      gained += it->second;
      lost += in_a;
      list.push_back({{"target_set", row}, {"a", in_a}, {"b", it->second}});
    }
    return json{{"changes", list}, {"restored", gained}, {"lost", lost}};
  };
  const auto diagonal = changes(row_flags(ma, "normalized_jsr_db", dominant), row_flags(mb, "normalized_jsr_db", dominant));
  const auto selectivity = changes(row_flags(ma, "packet_rate", selective), row_flags(mb, "packet_rate", selective));
  return {{"a", manifest_a.string()},
          {"b", manifest_b.string()},
          {"identical", deltas.empty() && only_a.empty() && only_b.empty()},
          {"deltas", deltas},
          {"only_in_a", only_a},
          {"only_in_b", only_b},
          {"separation_regressions", regressions},
          {"diagonal_dominance", diagonal},
          {"selective_jamming", selectivity}};
}

json error_json(std::string_view kind, const std::string& message, const std::string& path) {
  json e = {{"error", std::string(kind)}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  return e;
}

}  // namespace risjam::io
