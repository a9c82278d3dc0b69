#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "risjam/scenario.hpp"

namespace risjam::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("risjam-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Desk roster on a 64-element surface with a short optimization; fast
/// enough for unit tests while exercising every code path.
inline scn::ScenarioSpec small_scenario(scn::Mode mode) {
  scn::ScenarioSpec s;
  s.name = "small";
  s.mode = mode;
  s.seed = 7;
  s.environment = scn::desk_environment();
  s.environment.ris_elements = 64;
  s.environment.scatterers = 64;
  s.optimizer.steps = 300;
  s.optimizer.params.population = 20;
  s.optimizer.params.reeval_period = 100;
  s.element_sweep.counts = {8, 16, 32, 64};
  s.element_sweep.seeds = 2;
  return s;
}

inline scn::ScenarioSpec validated(scn::ScenarioSpec s) {
  scn::validate(s);
  return s;
}

/// Scenario document for the small desk roster.
inline nlohmann::json small_scenario_doc(const std::string& mode, std::uint64_t seed = 5) {
  auto env = scn::desk_environment();
  env.ris_elements = 64;
  env.scatterers = 64;
  return {{"name", "tiny"},
          {"mode", mode},
          {"seed", seed},
          {"environment", env::spec_to_json(env)},
          {"optimizer", {{"population", 20}, {"steps", 200}, {"reeval_period", 100}}}};
}

}  // namespace risjam::test
