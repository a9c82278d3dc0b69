#include "risjam/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "risjam/format.hpp"
#include "risjam/types.hpp"

namespace risjam::opt {

void CostWeights::validate() const {
  if (!(mean >= 0.0) || !(extreme >= 0.0) || std::abs(mean + extreme - 1.0) > 1e-9)
    throw ValidationError("cost weights must be non-negative and sum to 1", "weights");
}

double aggregate_cost(std::span<const double> targets_dbm, std::span<const double> nontargets_dbm,
                      const CostWeights& weights, double empty_nontarget_dbm) {
  if (targets_dbm.empty()) throw std::invalid_argument("cost needs at least one target RSSI");
  const auto mean = [](std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double a_t = weights.mean * mean(targets_dbm) +
                     weights.extreme * *std::min_element(targets_dbm.begin(), targets_dbm.end());
  const double a_n =
      nontargets_dbm.empty()
          ? empty_nontarget_dbm
          : weights.mean * mean(nontargets_dbm) +
                weights.extreme * *std::max_element(nontargets_dbm.begin(), nontargets_dbm.end());
  const double diff = a_t - a_n;
  return diff >= 0.0 ? diff * diff : -diff * diff;
}

double cost_to_db(double cost) { return cost >= 0.0 ? std::sqrt(cost) : -std::sqrt(-cost); }

void OptimizerParams::validate() const {
  if (population < 2) throw ValidationError("population must be at least 2", "population");
  if (!(exploration_floor > 0.0 && exploration_floor < 0.5))
    throw ValidationError("exploration floor must lie in (0, 0.5)", "exploration_floor");
  weights.validate();
}

double OptimizerState::evaluate(const MeasurementOracle& oracle, const ris::RisConfig& c) const {
  const Measurement m = oracle(c);
  return aggregate_cost(m.targets_dbm, m.nontargets_dbm, params_.weights,
                        params_.empty_nontarget_dbm);
}

bool OptimizerState::contains(const ris::RisConfig& c) const {
  return std::any_of(table_.begin(), table_.end(), [&](const TableEntry& e) {
    return std::memcmp(e.config.bits().data(), c.bits().data(), length_) == 0;
  });
}

namespace {

void sort_table(std::vector<TableEntry>& table) {
  std::stable_sort(table.begin(), table.end(),
                   [](const TableEntry& a, const TableEntry& b) { return a.cost > b.cost; });
}

}  // namespace

OptimizerState OptimizerState::initialize(const OptimizerParams& params, std::size_t length,
                                          const MeasurementOracle& oracle, std::uint64_t seed) {
  params.validate();
  if (length == 0) throw std::invalid_argument("configuration length must be at least 1");
  OptimizerState s(params, length, seed);
  s.table_.reserve(params.population);
  for (std::size_t i = 0; i < params.population; ++i) {
    ris::RisConfig c(length);
    for (std::size_t l = 0; l < length; ++l) c.set(l, s.rng_.next_u64() >> 63);
    const double cost = s.evaluate(oracle, c);
    s.table_.push_back({std::move(c), cost});
  }
  sort_table(s.table_);
  return s;
}

namespace {

std::vector<double> rank_weighted_probabilities(const std::vector<TableEntry>& table,
                                                std::size_t length, double floor) {
  const std::size_t b = table.size();
  std::vector<double> ones(length, 0.0);
  double total = 0.0;
  for (std::size_t rank = 0; rank < b; ++rank) {
    const double w = static_cast<double>(b - rank);
    total += w;
    const std::uint8_t* bits = table[rank].config.bits().data();
    double* acc = ones.data();
    for (std::size_t l = 0; l < length; ++l) acc[l] += w * bits[l];
  }
  for (auto& p : ones) p = std::clamp(p / total, floor, 1.0 - floor);
  return ones;
}

}  // namespace

std::vector<double> OptimizerState::element_probabilities() const {
  return rank_weighted_probabilities(table_, length_, params_.exploration_floor);
}

void OptimizerState::step(const MeasurementOracle& oracle) {
  Rng rng = rng_;
  const bool reevaluate = params_.reeval_period > 0 && steps_ > 0 &&
                          steps_ % params_.reeval_period == 0;
  std::vector<TableEntry> remeasured;
  if (reevaluate) {
    remeasured = table_;
    for (auto& e : remeasured) e.cost = evaluate(oracle, e.config);
    sort_table(remeasured);
  }
  const std::vector<TableEntry>& current = reevaluate ? remeasured : table_;

  const auto p = rank_weighted_probabilities(current, length_, params_.exploration_floor);
  ris::RisConfig candidate(length_);
  for (std::size_t l = 0; l < length_; ++l) candidate.set(l, rng.bernoulli(p[l]));
  const double cost = evaluate(oracle, candidate);

  // Nothing below can throw except allocation; commit.
  if (reevaluate) table_ = std::move(remeasured);
  rng_ = rng;
  ++steps_;
  last_reevaluated_ = reevaluate;
  // Ties favour the newcomer. Exact duplicates are not admitted so the
  // table cannot collapse onto copies of one configuration.
  if (cost >= table_.back().cost && !contains(candidate)) {
    table_.pop_back();
    auto pos = std::upper_bound(table_.begin(), table_.end(), cost,
                                [](double c, const TableEntry& e) { return c > e.cost; });
    table_.insert(pos, TableEntry{std::move(candidate), cost});
  }
}

OptimizationRun run_optimizer(const OptimizerParams& params, std::size_t steps, std::size_t length,
                              const MeasurementOracle& oracle, std::uint64_t seed) {
  OptimizerState state = OptimizerState::initialize(params, length, oracle, seed);
  OptimizationRun run;
  run.trace.reserve(steps + 1);
  auto best = std::make_shared<const ris::RisConfig>(state.best().config);
  run.trace.push_back({0, state.best().cost, best, state.worst().cost, false});
  for (std::size_t s = 1; s <= steps; ++s) {
    state.step(oracle);
    if (state.best().config != *best) best = std::make_shared<const ris::RisConfig>(state.best().config);
    run.trace.push_back({s, state.best().cost, best, state.worst().cost,
                         state.last_step_reevaluated()});
  }
  run.best = state.best().config;
  run.best_cost = state.best().cost;
  return run;
}

BruteForceResult brute_force_best(std::size_t length, const MeasurementOracle& oracle,
                                  const CostWeights& weights, double empty_nontarget_dbm) {
  if (length > ris::kMaxEnumerationLength)
    throw std::invalid_argument("brute force supports at most 20 elements");
  BruteForceResult best{ris::RisConfig(length), 0.0};
  bool first = true;
  for (const auto& c : ris::enumerate_configs(length)) {
    const Measurement m = oracle(c);
    const double cost = aggregate_cost(m.targets_dbm, m.nontargets_dbm, weights, empty_nontarget_dbm);
    if (first || cost > best.cost) {
      best = {c, cost};
      first = false;
    }
  }
  return best;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ConvergenceStats convergence_stats(std::span<const Trace> traces) {
  if (traces.empty() || traces.front().empty())
    throw std::invalid_argument("convergence statistics need a non-empty trace");
  const std::size_t n = traces.front().size();
  for (const auto& t : traces)
    if (t.size() != n) throw std::invalid_argument("traces differ in length");

  ConvergenceStats s;
  std::vector<double> dist(traces.size());
  std::vector<double> cost(traces.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const auto& rec = traces[r][i];
      dist[r] = static_cast<double>(ris::hamming_distance(*rec.best_config, *traces[r].back().best_config));
      cost[r] = rec.best_cost;
    }
    s.steps.push_back(traces.front()[i].step);
    s.mean_distance.push_back(std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(dist.size()));
    s.p5_distance.push_back(percentile(dist, 5.0));
    s.p95_distance.push_back(percentile(dist, 95.0));
    s.mean_cost.push_back(std::accumulate(cost.begin(), cost.end(), 0.0) / static_cast<double>(cost.size()));
    s.p5_cost.push_back(percentile(cost, 5.0));
    s.p95_cost.push_back(percentile(cost, 95.0));
  }
  return s;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "step,best_cost,best_config_hex,table_worst_cost\n";
  for (const auto& r : trace)
    out << r.step << ',' << fmt_num(r.best_cost) << ',' << r.best_config->to_hex() << ','
        << fmt_num(r.worst_cost) << '\n';
}

nlohmann::json to_json(const ConvergenceStats& s) {
  return {{"steps", s.steps},
          {"mean_hamming_distance", s.mean_distance},
          {"p5_hamming_distance", s.p5_distance},
          {"p95_hamming_distance", s.p95_distance},
          {"mean_best_cost", s.mean_cost},
          {"p5_best_cost", s.p5_cost},
          {"p95_best_cost", s.p95_cost}};
}

}  // namespace risjam::opt
