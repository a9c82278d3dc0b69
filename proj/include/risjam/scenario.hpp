#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "risjam/channel_env.hpp"
#include "risjam/link_model.hpp"
#include "risjam/measurement.hpp"
#include "risjam/optimizer.hpp"
#include "risjam/ris.hpp"

namespace risjam::scn {

enum class Mode {
  PacketRate,
  Throughput,
  JsrMatrix,
  Heatmap,
  ElementSweep,
  Displacement,
  Exclusion,
  DirectionalBaseline,
  Perturbation,
};

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);  // ValidationError listing valid modes
const std::vector<std::string>& mode_names();

struct SweepRange {
  double start_dbm = -40.0;
  double stop_dbm = 40.0;
  double step_db = 1.0;

  std::vector<double> points() const;
  bool operator==(const SweepRange&) const = default;
};

struct JammerSpec {
  std::optional<double> power_dbm;  // empty: just above the targets' disruption knee
  double margin_db = 3.0;
  SweepRange sweep;
  bool operator==(const JammerSpec&) const = default;
};

struct OptimizerSpec {
  opt::OptimizerParams params;
  std::size_t steps = 10000;
  std::size_t runs = 1;  // independent runs per target set (different seeds)
  bool operator==(const OptimizerSpec&) const = default;
};

struct ThroughputSpec {
  double offered_load_mbps = 30.0;
  std::size_t windows = 200;
  double operational_fraction = 0.7;  // of the unjammed baseline
  bool operator==(const ThroughputSpec&) const = default;
};

struct HeatmapSpec {
  double x_min_m = -0.37, x_max_m = 0.38;  // offsets from the target
  double y_min_m = -0.25, y_max_m = 0.25;
  double step_m = 0.01;
  double exclusion_radius_m = 0.06;
  bool operator==(const HeatmapSpec&) const = default;
};

struct DisplacementSpec {
  std::string device = "D8";  // where the antenna pair is placed
  double gap_m = 0.0;         // initial spacing of the pair along x
  double step_m = 0.004;
  double max_m = 0.06;
  bool operator==(const DisplacementSpec&) const = default;
};

struct ElementSweepSpec {
  std::vector<std::size_t> counts{16, 32, 64, 128, 256, 512, 768};
  std::size_t seeds = 5;
  bool operator==(const ElementSweepSpec&) const = default;
};

struct DirectionalSpec {
  double gain_dbi = 19.0;
  double beamwidth_deg = 20.0;  // full width between the -3 dB points
  double front_to_back_db = 25.0;
  double diffuse_db = -10.0;  // diffuse multipath power relative to boresight gain
  std::optional<Position> attacker_position;  // defaults to the RIS position
  bool operator==(const DirectionalSpec&) const = default;
};

struct Relocation {
  std::string device;
  Position position;
  bool operator==(const Relocation&) const = default;
};

struct PerturbationEventSpec {
  double time_s = 0.0;
  double fraction = 0.0;
  std::optional<Relocation> relocate;
  bool operator==(const PerturbationEventSpec&) const = default;
};

struct PerturbationSpec {
  std::vector<PerturbationEventSpec> events;
  bool reoptimize = false;  // renew the configuration after the last event
  bool operator==(const PerturbationSpec&) const = default;
};

struct ScenarioSpec {
  std::string name = "scenario";
  Mode mode = Mode::JsrMatrix;
  std::uint64_t seed = 1;
  env::EnvironmentSpec environment;
  std::vector<std::vector<std::string>> target_sets;
  std::vector<std::string> nontargets;  // empty: every device outside the target set
  std::vector<std::string> hidden;      // never transmit; ignored inside a device's own target set
  std::string excluded;                 // exclusion mode
  std::size_t random_configs = 0;       // jsr-matrix: also evaluate random configurations
  bool split_reference = false;         // multi-target: also optimize each target alone
  link::LinkBudget budget;
  meas::OracleOptions measurement;
  JammerSpec jammer;
  OptimizerSpec optimizer;
  link::McsTable mcs;
  link::LinkParams link;
  ThroughputSpec throughput;
  HeatmapSpec heatmap;
  DisplacementSpec displacement;
  ElementSweepSpec element_sweep;
  DirectionalSpec directional;
  PerturbationSpec perturbation;

  bool operator==(const ScenarioSpec&) const = default;
};

/// Desk-scale office: AP plus ten stations in four clusters, RIS on the
/// ceiling.
env::EnvironmentSpec desk_environment();

/// Fills derived defaults (target sets, non-targets) and checks every
/// cross-field constraint. Throws ValidationError.
void validate(ScenarioSpec& spec);

ScenarioSpec scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string target_set;
  std::string device;
  std::string metric;
  double value;
};

struct NamedTrace {
  std::string name;
  opt::Trace trace;
};

struct HeatmapGrid {
  std::vector<double> xs;  // absolute coordinates
  std::vector<double> ys;
  std::vector<double> db;  // row-major in y
  double mean_outside_db;
  double max_outside_db;
};

struct RunResult {
  std::string scenario;
  std::vector<ResultRow> rows;
  std::vector<NamedTrace> traces;
  std::optional<HeatmapGrid> heatmap;
  nlohmann::json summary = nlohmann::json::object();

  void add(std::string target_set, std::string device, std::string metric, double value) {
    rows.push_back({std::move(target_set), std::move(device), std::move(metric), value});
  }
};

/// Per-device evaluation of one configuration at one jammer power.
struct DeviceEval {
  std::string device;
  double attacker_rssi_dbm;  // noise-free, attacker side
  double ap_rssi_dbm;        // legitimate signal at the device
  double jam_gain_db;        // jammer-to-device gain including coupling loss
  double jsr_db;
  double normalized_jsr_db;
  double packet_rate;
  double disruption_power_dbm;  // analytic power at which the device drops to <= 5 pkt/s
};

struct TargetSetEval {
  std::vector<std::string> targets;
  ris::RisConfig config;
  double best_cost = 0.0;
  double jammer_dbm = 0.0;
  std::vector<DeviceEval> devices;  // stations only, roster order
  double target_knee_dbm = 0.0;     // sweep grid power fully disrupting every target
  double nontarget_knee_dbm = 0.0;  // first sweep power disrupting any non-target
  double margin_db = 0.0;
  double separation_db = 0.0;       // weakest target minus strongest non-target, attacker side
};

/// Shared state of one scenario execution: the synthesized environment and
/// derived seeds.
class Harness {
 public:
  explicit Harness(ScenarioSpec spec);

  const ScenarioSpec& spec() const { return spec_; }
  const env::Environment& environment() const { return env_; }
  std::vector<std::string> stations() const;  // non-AP devices in roster order
  std::vector<std::string> nontargets_for(const std::vector<std::string>& targets) const;
  std::vector<std::string> visible_nontargets(const std::vector<std::string>& targets) const;

  opt::OptimizationRun optimize(const env::Environment& env, const std::vector<std::string>& targets,
                                const std::vector<std::string>& nontargets,
                                const meas::ElementSubset& subset, std::uint64_t stream) const;
  opt::OptimizationRun optimize(const std::vector<std::string>& targets, std::uint64_t stream) const;

  /// Evaluates every station under `config` (full length) at `jammer_dbm`.
  /// Disruption knees refer to `knee_mcs` (default: the monitor MCS).
  TargetSetEval evaluate(const env::Environment& env, const std::vector<std::string>& targets,
                         const ris::RisConfig& config, std::optional<double> jammer_dbm,
                         int knee_mcs = -1) const;

  /// Completes an evaluation whose per-device gains and RSSI are filled in:
  /// jammer power, JSR, packet rates, knees, margin and separation.
  /// `extra_nontarget_dbm` is attacker-side power of a non-station
  /// non-target (the AP) that counts toward the separation.
  void finish(const env::Environment& env, TargetSetEval& eval, std::optional<double> jammer_dbm,
              int knee_mcs, std::optional<double> extra_nontarget_dbm) const;

  /// Disruption power of a device whose jammer-to-device gain is `gain_db`.
  double disruption_power(double ap_rssi_dbm, double gain_db, int mcs) const;
  double snap_up(double power_dbm) const;  // to the sweep grid

  std::uint64_t seed_for(std::string_view stream, std::uint64_t index) const;

 private:
  ScenarioSpec spec_;
  env::Environment env_;
};

std::string target_set_label(const std::vector<std::string>& targets);

// Scenario operations. Each returns a complete RunResult.
RunResult run_single_target(const ScenarioSpec& spec, unsigned threads = 1);
RunResult run_multi_target(const ScenarioSpec& spec, unsigned threads = 1);
RunResult run_jsr_matrix(const ScenarioSpec& spec, unsigned threads = 1);
RunResult power_sweep(const ScenarioSpec& spec, unsigned threads = 1);
RunResult run_throughput(const ScenarioSpec& spec, unsigned threads = 1);
RunResult run_exclusion(const ScenarioSpec& spec);
RunResult heatmap_scan(const ScenarioSpec& spec);
RunResult displacement_scan(const ScenarioSpec& spec);
RunResult element_sweep(const ScenarioSpec& spec, unsigned threads = 1);
RunResult hidden_device_eval(const ScenarioSpec& spec, unsigned threads = 1);
RunResult directional_baseline(const ScenarioSpec& spec, unsigned threads = 1);
RunResult perturbation_run(const ScenarioSpec& spec, unsigned threads = 1);

/// Dispatches on the scenario mode.
RunResult run_scenario(const ScenarioSpec& spec, unsigned threads = 1);

/// Directional antenna gain in dBi at `off_axis_deg` from boresight.
double directional_gain_dbi(const DirectionalSpec& antenna, double off_axis_deg);

}  // namespace risjam::scn
