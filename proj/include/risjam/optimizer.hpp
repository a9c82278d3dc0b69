#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "risjam/ris.hpp"
#include "risjam/rng.hpp"

namespace risjam::opt {

struct CostWeights {
  double mean = 0.3;
  double extreme = 0.7;

  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

/// Signed squared difference between the target aggregate
/// (w_mean * mean + w_extreme * min) and the non-target aggregate
/// (w_mean * mean + w_extreme * max). Higher is better. An empty non-target
/// list aggregates to `empty_nontarget_dbm`.
double aggregate_cost(std::span<const double> targets_dbm, std::span<const double> nontargets_dbm,
                      const CostWeights& weights = {}, double empty_nontarget_dbm = -95.0);

/// a_T - a_N recovered from a cost value.
double cost_to_db(double cost);

/// RSSI observed by the attacker for one configuration. Hidden devices are
/// never part of either list.
struct Measurement {
  std::vector<double> targets_dbm;
  std::vector<double> nontargets_dbm;
};

using MeasurementOracle = std::function<Measurement(const ris::RisConfig&)>;

struct OptimizerParams {
  std::size_t population = 100;
  std::size_t reeval_period = 1000;  // 0 disables re-evaluation
  double exploration_floor = 0.02;
  CostWeights weights;
  double empty_nontarget_dbm = -95.0;

  void validate() const;
  bool operator==(const OptimizerParams&) const = default;
};

struct TableEntry {
  ris::RisConfig config;
  double cost;
};

struct TraceRecord {
  std::size_t step;
  double best_cost;
  std::shared_ptr<const ris::RisConfig> best_config;
  double worst_cost;
  bool reevaluated;
};

using Trace = std::vector<TraceRecord>;

/// Sorted table of candidate configurations. Each step draws a candidate
/// element-wise from rank-weighted bit frequencies of the table and lets it
/// replace the worst entry when it scores at least as well.
class OptimizerState {
 public:
  static OptimizerState initialize(const OptimizerParams& params, std::size_t length,
                                   const MeasurementOracle& oracle, std::uint64_t seed);

  /// One step. If the oracle throws, the state is left untouched.
  void step(const MeasurementOracle& oracle);

  const std::vector<TableEntry>& table() const { return table_; }
  const TableEntry& best() const { return table_.front(); }
  const TableEntry& worst() const { return table_.back(); }
  std::size_t steps_taken() const { return steps_; }
  std::size_t length() const { return length_; }
  const OptimizerParams& params() const { return params_; }
  bool last_step_reevaluated() const { return last_reevaluated_; }

  /// Probability of bit 1 per element, clipped to the exploration floor.
  std::vector<double> element_probabilities() const;

 private:
  OptimizerState(const OptimizerParams& params, std::size_t length, std::uint64_t seed)
      : params_(params), length_(length), rng_(seed) {}

  double evaluate(const MeasurementOracle& oracle, const ris::RisConfig& c) const;
  bool contains(const ris::RisConfig& c) const;

  OptimizerParams params_;
  std::size_t length_;
  std::vector<TableEntry> table_;
  std::size_t steps_ = 0;
  Rng rng_;
  bool last_reevaluated_ = false;
};

inline OptimizerState optimizer_init(const OptimizerParams& params, std::size_t length,
                                     const MeasurementOracle& oracle, std::uint64_t seed) {
  return OptimizerState::initialize(params, length, oracle, seed);
}

inline OptimizerState optimizer_step(OptimizerState state, const MeasurementOracle& oracle) {
  state.step(oracle);
  return state;
}

struct OptimizationRun {
  ris::RisConfig best;
  double best_cost;
  Trace trace;  // record 0 is the initialized table, then one per step
};

OptimizationRun run_optimizer(const OptimizerParams& params, std::size_t steps, std::size_t length,
                              const MeasurementOracle& oracle, std::uint64_t seed);

struct BruteForceResult {
  ris::RisConfig config;
  double cost;
};

/// Exhaustive argmax over all 2^L configurations; ties go to the
/// lexicographically smallest bit string.
BruteForceResult brute_force_best(std::size_t length, const MeasurementOracle& oracle,
                                  const CostWeights& weights = {},
                                  double empty_nontarget_dbm = -95.0);

struct ConvergenceStats {
  std::vector<std::size_t> steps;
  std::vector<double> mean_distance;
  std::vector<double> p5_distance;
  std::vector<double> p95_distance;
  std::vector<double> mean_cost;
  std::vector<double> p5_cost;
  std::vector<double> p95_cost;
};

/// Hamming distance of every step's best configuration to the run's final
/// configuration, aggregated across runs of equal length.
ConvergenceStats convergence_stats(std::span<const Trace> traces);
inline ConvergenceStats convergence_stats(const Trace& trace) {
  return convergence_stats(std::span<const Trace>(&trace, 1));
}

/// Linear-interpolated percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

void write_trace_csv(std::ostream& out, const Trace& trace);
nlohmann::json to_json(const ConvergenceStats& stats);

}  // namespace risjam::opt
