#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "risjam/run_output.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace risjam;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void write_output(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  f << doc.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
}

int report(std::string_view kind, const std::string& message, const std::string& path,
           const std::optional<fs::path>& error_dir, int code) {
  const auto doc = io::error_json(kind, message, path);
  std::cerr << doc.dump() << '\n';
  if (error_dir) {
    std::error_code ec;
    fs::create_directories(*error_dir, ec);
    std::ofstream f(*error_dir / "error.json", std::ios::trunc);
    if (f) f << doc.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-based spatially selective jamming simulator"};
  app.set_version_flag("--version", io::tool_version());
  app.require_subcommand(1);

  std::string scenario_path, out, out_dir = "out", format = "csv", manifest_a, manifest_b, env_spec_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t env_seed = 1;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "Run a scenario and write results, traces and a manifest");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Master seed (overrides the scenario)");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--format", format, "Results format")->check(CLI::IsMember({"csv", "json"}));

  auto* validate = app.add_subcommand("validate", "Check a scenario and print its normalized form");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  validate->add_option("--seed", seed, "Master seed (overrides the scenario)");
  validate->add_option("--out", out, "Write the normalized scenario here instead of stdout");

  auto* compare = app.add_subcommand("compare", "Diff the results of two runs");
  compare->add_option("manifest_a", manifest_a, "Manifest of run A")->required();
  compare->add_option("manifest_b", manifest_b, "Manifest of run B")->required();
  compare->add_option("--out", out, "Write the report here instead of stdout");

  auto* env_cmd = app.add_subcommand("env", "Environment utilities");
  env_cmd->require_subcommand(1);
  auto* synth = env_cmd->add_subcommand("synth", "Synthesize an environment and write it as JSON");
  synth->add_option("spec", env_spec_path, "Environment spec JSON (default: desk roster)");
  synth->add_option("--seed", env_seed, "Environment seed")->capture_default_str();
  synth->add_option("--out", out, "Write the environment here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), {}, std::nullopt, kExitValidation);
  }

  std::optional<fs::path> error_dir;
  try {
    if (run->parsed()) {
      error_dir = fs::path(out_dir);
      io::RunOptions options;
      options.seed = seed;
      options.threads = threads;
      options.format = io::format_from_string(format);
      const auto spec = io::parse_scenario(scenario_path);
      const auto manifest = io::execute(spec, out_dir, options);
      std::cout << manifest.to_json().dump(2) << '\n';
    } else if (validate->parsed()) {
      auto spec = io::parse_scenario(scenario_path);
      if (seed) spec.seed = *seed;
      write_output(scn::to_json(spec), out);
    } else if (compare->parsed()) {
      write_output(io::compare_runs(manifest_a, manifest_b), out);
    } else if (synth->parsed()) {
      env::EnvironmentSpec spec = scn::desk_environment();
      if (!env_spec_path.empty()) {
        std::ifstream in(env_spec_path);
        if (!in) throw ValidationError("cannot read file '" + env_spec_path + "'");
        json doc;
        try {
          doc = json::parse(in);
        } catch (const json::parse_error& e) {
          throw ValidationError(std::string("environment spec is not valid JSON: ") + e.what());
        }
        spec = env::spec_from_json(doc, "");
      }
      write_output(env::to_json(env::Environment::synthesize(spec, env_seed)), out);
    }
  } catch (const ValidationError& e) {
    const std::string_view kind = dynamic_cast<const io::ShapeMismatch*>(&e) ? "shape_mismatch" : "validation";
    return report(kind, e.message(), e.path(), error_dir, kExitValidation);
  } catch (const std::exception& e) {
    return report("runtime", e.what(), {}, error_dir, kExitRuntime);
  }
  return kExitOk;
}
