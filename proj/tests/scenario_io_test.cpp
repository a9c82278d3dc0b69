#include <gtest/gtest.h>

#include <string>

#include "risjam/run_output.hpp"
#include "risjam/scenario.hpp"

namespace risjam::scn {
namespace {

using nlohmann::json;

std::string error_of(const json& doc) {
  try {
    scenario_from_json(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

std::string path_of(const json& doc) {
  try {
    scenario_from_json(doc);
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<accepted>";
}

TEST(ScenarioFromJson, MinimalFileGetsDocumentedDefaults) {
  const auto s = scenario_from_json({{"mode", "jsr-matrix"}});
  EXPECT_EQ(s.optimizer.params.population, 100u);
  EXPECT_EQ(s.optimizer.steps, 10000u);
  EXPECT_EQ(s.optimizer.params.reeval_period, 1000u);
  EXPECT_DOUBLE_EQ(s.optimizer.params.weights.mean, 0.3);
  EXPECT_DOUBLE_EQ(s.optimizer.params.weights.extreme, 0.7);
  EXPECT_DOUBLE_EQ(s.environment.carrier_frequency_hz, 5.56e9);
  EXPECT_EQ(s.environment.ris_elements, 768);
  EXPECT_EQ(s.environment.scatterers, 256);
  EXPECT_EQ(s.environment.devices.size(), 11u);
  EXPECT_DOUBLE_EQ(s.jammer.sweep.step_db, 1.0);
  EXPECT_EQ(s.link.monitor_mcs, 6);
  // Each station on its own by default.
  ASSERT_EQ(s.target_sets.size(), 10u);
  EXPECT_EQ(s.target_sets.front(), std::vector<std::string>{"D1"});
}

TEST(ScenarioFromJson, TargetsEachAndHiddenAll) {
  const auto s = scenario_from_json({{"mode", "jsr-matrix"}, {"targets", "each"}, {"hidden", "all"}});
  EXPECT_EQ(s.target_sets.size(), 10u);
  EXPECT_EQ(s.hidden.size(), 10u);
  EXPECT_EQ(std::count(s.hidden.begin(), s.hidden.end(), "D0"), 0);
}

TEST(ScenarioFromJson, OverlappingTargetAndNontargetNamesTheDevice) {
  const auto msg = error_of({{"mode", "jsr-matrix"}, {"targets", {"D1", "D2"}}, {"nontargets", {"D0", "D2"}}});
  EXPECT_NE(msg.find("'D2'"), std::string::npos) << msg;
}

TEST(ScenarioFromJson, UnknownModeListsValidModes) {
  const auto msg = error_of({{"mode", "teleport"}});
  for (const auto& m : mode_names()) EXPECT_NE(msg.find(m), std::string::npos) << m;
  EXPECT_EQ(path_of({{"mode", "teleport"}}), "mode");
}

TEST(ScenarioFromJson, FieldPathDiagnostics) {
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"optimizer", {{"steps", "many"}}}}), "optimizer.steps");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"optimizer", {{"speed", 1}}}}), "optimizer.speed");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"bogus", 1}}), "bogus");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"optimizer", {{"weights", {{"mean", 0.5}}}}}}), "optimizer.weights");
  EXPECT_EQ(path_of({{"targets", {"D1"}}}), "mode");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"targets", {"D99"}}}), "target_sets[0][0]");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"targets", {"D0"}}}), "target_sets[0][0]");
}

TEST(ScenarioFromJson, MissingPositionIsRejected) {
  const json env = {{"devices", {{{"id", "AP"}, {"role", "ap"}, {"position", {0, 0, 0}}}, {{"id", "S"}, {"role", "station"}}}}};
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"environment", env}}), "environment.devices[1].position");
}

TEST(ScenarioFromJson, RosterChecks) {
  const json no_ap = {{"devices", {{{"id", "S"}, {"role", "station"}, {"position", {1, 0, 0}}}}}};
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"environment", no_ap}}), "environment.devices");
  const json dup = {{"ris_position", {0, 0, 3}},
                    {"devices",
                     {{{"id", "A"}, {"role", "ap"}, {"position", {0, 0, 0}}},
                      {{"id", "S"}, {"role", "station"}, {"position", {1, 0, 0}}},
                      {{"id", "S"}, {"role", "station"}, {"position", {2, 0, 0}}}}}};
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"environment", dup}}), "environment.devices[2].id");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"environment", {{"scatterers", 8}}}}), "environment.scatterers");
}

TEST(ScenarioFromJson, ModeSpecificChecks) {
  EXPECT_EQ(path_of({{"mode", "heatmap"}, {"targets", {"D1", "D2"}}}), "target_sets");
  EXPECT_EQ(path_of({{"mode", "heatmap"}, {"heatmap", {{"x_range_m", {0.1, 0.3}}}}}), "heatmap");
  EXPECT_EQ(path_of({{"mode", "element-sweep"}, {"element_sweep", {{"counts", {16, 1000}}}}}), "element_sweep.counts[1]");
  EXPECT_EQ(path_of({{"mode", "element-sweep"}, {"element_sweep", {{"counts", {32, 16}}}}}), "element_sweep.counts[1]");
  EXPECT_EQ(path_of({{"mode", "exclusion"}}), "excluded");
  EXPECT_EQ(path_of({{"mode", "directional-baseline"}, {"directional", {{"beamwidth_deg", 0}}}}), "directional.beamwidth_deg");
  EXPECT_EQ(path_of({{"mode", "perturbation"}, {"perturbation", {{"events", {{{"time_s", 1}, {"fraction", 2}}}}}}}),
            "perturbation.events[0].fraction");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"jammer", {{"sweep", {{"step_db", 0}}}}}}), "jammer.sweep.step_db");
  EXPECT_EQ(path_of({{"mode", "jsr-matrix"}, {"hidden", {"D0"}}}), "hidden[0]");
}

TEST(ScenarioFromJson, ExclusionDerivesTargets) {
  const auto s = scenario_from_json({{"mode", "exclusion"}, {"excluded", "D7"}});
  ASSERT_EQ(s.target_sets.size(), 1u);
  EXPECT_EQ(s.target_sets[0].size(), 9u);
  EXPECT_EQ(std::count(s.target_sets[0].begin(), s.target_sets[0].end(), "D7"), 0);
}

TEST(ScenarioFromJson, NormalizedEchoRoundTrips) {
  for (const json& doc : {json{{"mode", "jsr-matrix"}, {"seed", 3}},
                          json{{"mode", "throughput"}, {"targets", {"D1", "D2"}}, {"jammer", {{"power_dbm", 12.5}}}},
                          json{{"mode", "perturbation"},
                               {"perturbation",
                                {{"events", {{{"time_s", 1}, {"fraction", 0.1}, {"relocate", {{"device", "D2"}, {"position", {1.8, 2.4, 0}}}}}}},
                                 {"reoptimize", true}}}},
                          json{{"mode", "directional-baseline"}, {"directional", {{"attacker_position", {0.5, 0.5, 2}}}}},
                          json{{"mode", "jsr-matrix"}, {"hidden", "all"}}}) {
    const auto spec = scenario_from_json(doc);
    const auto echo = to_json(spec);
    const auto again = scenario_from_json(echo);
    EXPECT_EQ(again, spec) << doc.dump();
    EXPECT_EQ(to_json(again), echo);
  }
}

TEST(Modes, NamesRoundTrip) {
  for (const auto& m : mode_names()) EXPECT_EQ(std::string(to_string(mode_from_string(m))), m);
  EXPECT_EQ(mode_names().size(), 9u);
}

TEST(SweepRange, InclusivePoints) {
  const SweepRange r{-2, 2, 1};
  EXPECT_EQ(r.points(), (std::vector<double>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(SweepRange{}.points().size(), 81u);
}

TEST(ParseScenario, FileErrorsAreValidationErrors) {
  EXPECT_THROW(io::parse_scenario("/nonexistent/scenario.json"), ValidationError);
  EXPECT_THROW(io::parse_scenario_text("{ not json"), ValidationError);
  EXPECT_NO_THROW(io::parse_scenario(std::string(RISJAM_SCENARIO_DIR) + "/desk-single.json"));
}

TEST(ParseScenario, EveryShippedScenarioValidates) {
  for (const auto& entry : std::filesystem::directory_iterator(RISJAM_SCENARIO_DIR))
    EXPECT_NO_THROW(io::parse_scenario(entry.path())) << entry.path();
}

}  // namespace
}  // namespace risjam::scn
