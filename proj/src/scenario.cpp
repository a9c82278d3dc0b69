#include "risjam/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "risjam/format.hpp"

namespace risjam::scn {

namespace {

using nlohmann::json;

constexpr double kDisruptedRate = 5.0;
constexpr double kOperationalRate = 90.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(0..n-1) on up to `threads` workers. Results must be written by
// index so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1u, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (!error) error = std::current_exception();
            next.store(n);
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

bool contains(const std::vector<std::string>& v, const std::string& id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

std::string qualified(std::string_view metric, std::string_view key, double value) {
  return std::string(metric) + "[" + std::string(key) + "=" + fmt_num(value) + "]";
}

ScenarioSpec validated(ScenarioSpec spec) {
  validate(spec);
  return spec;
}

double median(std::vector<double> v) { return opt::percentile(std::move(v), 50.0); }

double mean(const std::vector<double>& v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : kNaN;
}

RunResult make_result(const ScenarioSpec& spec) {
  RunResult r;
  r.scenario = spec.name;
  r.summary["mode"] = std::string(to_string(spec.mode));
  return r;
}

// One optimized target set.
struct SetRun {
  TargetSetEval eval;
  std::vector<NamedTrace> traces;
};

std::uint64_t run_stream(std::size_t set, std::size_t run) {
  return (static_cast<std::uint64_t>(run) << 32) | set;
}

SetRun solve(const Harness& h, std::size_t k, int knee_mcs = -1) {
  const auto& spec = h.spec();
  const auto& targets = spec.target_sets.at(k);
  const auto label = target_set_label(targets);
  const auto subset = meas::ElementSubset::all(h.environment().ris_elements());
  const auto visible = h.visible_nontargets(targets);
  SetRun out;
  std::optional<opt::OptimizationRun> best;
  for (std::size_t r = 0; r < spec.optimizer.runs; ++r) {
    auto run = h.optimize(h.environment(), targets, visible, subset, run_stream(k, r));
    out.traces.push_back({spec.optimizer.runs > 1 ? label + "#" + std::to_string(r) : label, run.trace});
    if (!best || run.best_cost > best->best_cost) best = std::move(run);
  }
  out.eval = h.evaluate(h.environment(), targets, best->best, spec.jammer.power_dbm, knee_mcs);
  out.eval.best_cost = best->best_cost;
  return out;
}

std::vector<SetRun> solve_all(const Harness& h, unsigned threads, int knee_mcs = -1) {
  std::vector<SetRun> runs(h.spec().target_sets.size());
  parallel_for(runs.size(), threads, [&](std::size_t k) { runs[k] = solve(h, k, knee_mcs); });
  return runs;
}

void add_eval_rows(RunResult& r, const TargetSetEval& ev, const std::string& prefix = {}) {
  const auto label = target_set_label(ev.targets);
  for (const auto& d : ev.devices) {
    r.add(label, d.device, prefix + "attacker_rssi_dbm", d.attacker_rssi_dbm);
    r.add(label, d.device, prefix + "ap_rssi_dbm", d.ap_rssi_dbm);
    r.add(label, d.device, prefix + "jam_gain_db", d.jam_gain_db);
    r.add(label, d.device, prefix + "jsr_db", d.jsr_db);
    r.add(label, d.device, prefix + "normalized_jsr_db", d.normalized_jsr_db);
    r.add(label, d.device, prefix + "packet_rate", d.packet_rate);
    r.add(label, d.device, prefix + "disruption_power_dbm", d.disruption_power_dbm);
  }
  r.add(label, "*", prefix + "jammer_dbm", ev.jammer_dbm);
  r.add(label, "*", prefix + "target_knee_dbm", ev.target_knee_dbm);
  r.add(label, "*", prefix + "nontarget_knee_dbm", ev.nontarget_knee_dbm);
  r.add(label, "*", prefix + "margin_db", ev.margin_db);
  r.add(label, "*", prefix + "separation_db", ev.separation_db);
}

json eval_summary(const TargetSetEval& ev) {
  json disrupted = json::array(), operational = json::array();
  for (const auto& d : ev.devices) {
    if (d.packet_rate <= kDisruptedRate) disrupted.push_back(d.device);
    if (d.packet_rate >= kOperationalRate) operational.push_back(d.device);
  }
  return {{"target_set", target_set_label(ev.targets)},
          {"targets", ev.targets},
          {"config_hex", ev.config.to_hex()},
          {"best_cost", ev.best_cost},
          {"jammer_dbm", ev.jammer_dbm},
          {"target_knee_dbm", ev.target_knee_dbm},
          {"nontarget_knee_dbm", ev.nontarget_knee_dbm},
          {"margin_db", ev.margin_db},
          {"separation_db", ev.separation_db},
          {"disrupted", disrupted},
          {"operational", operational}};
}

void add_sets(RunResult& r, std::vector<SetRun>& runs) {
  json sets = json::array();
  for (auto& run : runs) {
    add_eval_rows(r, run.eval);
    sets.push_back(eval_summary(run.eval));
    for (auto& t : run.traces) r.traces.push_back(std::move(t));
  }
  r.summary["target_sets"] = std::move(sets);
}

// Non-target normalized JSR statistics over single-target rows.
void add_selectivity(RunResult& r, const std::vector<SetRun>& runs) {
  std::size_t pairs = 0, below16 = 0, below20 = 0, dominant_rows = 0, rows = 0;
  for (const auto& run : runs) {
    if (run.eval.targets.size() != 1) continue;
    ++rows;
    bool dominant = true;
    for (const auto& d : run.eval.devices) {
      if (contains(run.eval.targets, d.device)) continue;
      ++pairs;
      below16 += d.normalized_jsr_db <= -16.0;
      below20 += d.normalized_jsr_db <= -20.0;
      dominant = dominant && d.normalized_jsr_db < 0.0;
    }
    dominant_rows += dominant;
  }
  if (rows == 0) return;
  const auto frac = [](std::size_t a, std::size_t b) { return b ? double(a) / double(b) : kNaN; };
  r.summary["selectivity"] = {{"pairs", pairs},
                              {"fraction_le_minus16_db", frac(below16, pairs)},
                              {"fraction_le_minus20_db", frac(below20, pairs)},
                              {"diagonal_dominant_rows", dominant_rows},
                              {"rows", rows}};
  r.add("*", "*", "fraction_nontarget_le_minus16_db", frac(below16, pairs));
  r.add("*", "*", "fraction_nontarget_le_minus20_db", frac(below20, pairs));
  r.add("*", "*", "diagonal_dominant_fraction", frac(dominant_rows, rows));
}

void add_random_baseline(const Harness& h, RunResult& r) {
  const auto& spec = h.spec();
  if (spec.random_configs == 0) return;
  const auto stations = h.stations();
  std::size_t cases = 0, exceed = 0;
  std::vector<double> spreads;
  for (std::size_t i = 0; i < spec.random_configs; ++i) {
    const auto cfg = ris::random_config(h.environment().ris_elements(), h.seed_for("random-config", i));
    const auto ev = h.evaluate(h.environment(), {stations.front()}, cfg, spec.jammer.power_dbm);
    std::vector<double> rssi;
    for (const auto& d : ev.devices) rssi.push_back(d.attacker_rssi_dbm);
    const double med = median(rssi);
    const std::string label = "random[" + std::to_string(i) + "]";
    for (const auto& d : ev.devices) {
      r.add(label, d.device, "attacker_rssi_dbm", d.attacker_rssi_dbm);
      r.add(label, d.device, "packet_rate", d.packet_rate);
      ++cases;
      exceed += d.attacker_rssi_dbm - med > 6.0;
    }
    const double spread = *std::max_element(rssi.begin(), rssi.end()) - med;
    r.add(label, "*", "max_minus_median_db", spread);
    spreads.push_back(spread);
  }
  const double fraction = double(exceed) / double(cases);
  r.add("random", "*", "exceedance_fraction", fraction);
  r.summary["random_baseline"] = {{"configs", spec.random_configs},
                                  {"exceedance_fraction", fraction},
                                  {"median_max_minus_median_db", median(spreads)}};
}

void add_split_reference(const Harness& h, RunResult& r, const std::vector<SetRun>& runs,
                         unsigned threads) {
  struct Job {
    std::size_t set;
    std::size_t index;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < runs.size(); ++k)
    if (runs[k].eval.targets.size() > 1)
      for (std::size_t i = 0; i < runs[k].eval.targets.size(); ++i) jobs.push_back({k, i});
  if (jobs.empty()) return;
  const auto subset = meas::ElementSubset::all(h.environment().ris_elements());
  std::vector<double> single_gain(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const auto& target = runs[jobs[j].set].eval.targets[jobs[j].index];
    const std::vector<std::string> alone{target};
    const auto run = h.optimize(h.environment(), alone, h.visible_nontargets(alone), subset,
                                (std::uint64_t{1} << 48) | (jobs[j].set << 16) | jobs[j].index);
    const auto ev = h.evaluate(h.environment(), alone, run.best, std::nullopt);
    for (const auto& d : ev.devices)
      if (d.device == target) single_gain[j] = d.jam_gain_db;
  });
  json report = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& ev = runs[k].eval;
    if (ev.targets.size() < 2) continue;
    std::vector<double> losses;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].set != k) continue;
      const auto& target = ev.targets[jobs[j].index];
      const auto it = std::find_if(ev.devices.begin(), ev.devices.end(),
                                   [&](const auto& d) { return d.device == target; });
      const double loss = it->jam_gain_db - single_gain[j];
      r.add(target_set_label(ev.targets), target, "single_target_gain_db", single_gain[j]);
      r.add(target_set_label(ev.targets), target, "split_loss_db", loss);
      losses.push_back(loss);
    }
    const double expected = -10.0 * std::log10(static_cast<double>(ev.targets.size()));
    r.add(target_set_label(ev.targets), "*", "mean_split_loss_db", mean(losses));
    report.push_back({{"target_set", target_set_label(ev.targets)},
                      {"targets", ev.targets.size()},
                      {"mean_split_loss_db", mean(losses)},
                      {"ideal_split_loss_db", expected}});
  }
  r.summary["power_split"] = std::move(report);
}

RunResult matrix_run(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  auto runs = solve_all(h, threads);
  RunResult r = make_result(h.spec());
  add_sets(r, runs);
  add_selectivity(r, runs);
  if (h.spec().split_reference) add_split_reference(h, r, runs, threads);
  add_random_baseline(h, r);
  return r;
}

const env::DeviceSpec& device_spec(const env::Environment& env, const std::string& id) {
  return env.device(env.device_index(id));
}

}  // namespace

// ---------------------------------------------------------------------------
// Harness

Harness::Harness(ScenarioSpec spec)
    : spec_(validated(std::move(spec))),
      env_(env::Environment::synthesize(spec_.environment, derive_seed(spec_.seed, "environment", 0))) {}

std::uint64_t Harness::seed_for(std::string_view stream, std::uint64_t index) const {
  return derive_seed(spec_.seed, stream, index);
}

std::vector<std::string> Harness::stations() const {
  std::vector<std::string> out;
  for (const auto& d : env_.spec().devices)
    if (d.role == env::DeviceRole::Station) out.push_back(d.id);
  return out;
}

std::vector<std::string> Harness::nontargets_for(const std::vector<std::string>& targets) const {
  std::vector<std::string> out;
  if (!spec_.nontargets.empty()) {
    for (const auto& id : spec_.nontargets)
      if (!contains(targets, id)) out.push_back(id);
    return out;
  }
  for (const auto& d : env_.spec().devices)
    if (!contains(targets, d.id)) out.push_back(d.id);
  return out;
}

std::vector<std::string> Harness::visible_nontargets(const std::vector<std::string>& targets) const {
  std::vector<std::string> out;
  for (const auto& id : nontargets_for(targets))
    if (!contains(spec_.hidden, id)) out.push_back(id);
  return out;
}

opt::OptimizationRun Harness::optimize(const env::Environment& env, const std::vector<std::string>& targets,
                                       const std::vector<std::string>& nontargets,
                                       const meas::ElementSubset& subset, std::uint64_t stream) const {
  meas::OracleOptions options = spec_.measurement;
  options.tx_power_dbm = spec_.budget.device_tx_dbm;
  options.coupling_loss_db = spec_.budget.ris_insertion_loss_db;
  meas::RssiOracle oracle(env, targets, nontargets, options, seed_for("measurement", stream), subset);
  auto run = opt::run_optimizer(spec_.optimizer.params, spec_.optimizer.steps, subset.size(),
                                oracle.callable(), seed_for("optimizer", stream));
  run.best = subset.expand(run.best);
  return run;
}

opt::OptimizationRun Harness::optimize(const std::vector<std::string>& targets, std::uint64_t stream) const {
  return optimize(env_, targets, visible_nontargets(targets), meas::ElementSubset::all(env_.ris_elements()),
                  stream);
}

double Harness::disruption_power(double ap_rssi_dbm, double gain_db, int mcs) const {
  const auto& link = spec_.link;
  const double sjnr = spec_.mcs.threshold(mcs) +
                      link.slope_db * std::log(kDisruptedRate / (link.packets_per_second - kDisruptedRate));
  const double needed = db_to_linear(ap_rssi_dbm - sjnr) - db_to_linear(env_.spec().noise_floor_dbm);
  if (needed <= 0.0) return -std::numeric_limits<double>::infinity();
  return linear_to_db(needed) - gain_db;
}

double Harness::snap_up(double power_dbm) const {
  const auto& sw = spec_.jammer.sweep;
  if (!(power_dbm > sw.start_dbm)) return sw.start_dbm;
  const double k = std::ceil((power_dbm - sw.start_dbm) / sw.step_db - 1e-9);
  const double v = sw.start_dbm + k * sw.step_db;
  return v > sw.stop_dbm + 1e-9 ? sw.stop_dbm + sw.step_db : v;  // censored above the range
}

TargetSetEval Harness::evaluate(const env::Environment& env, const std::vector<std::string>& targets,
                                const ris::RisConfig& config, std::optional<double> jammer_dbm,
                                int knee_mcs) const {
  if (config.size() != env.ris_elements())
    throw std::invalid_argument("configuration length does not match the RIS size");
  const auto& b = spec_.budget;
  const std::size_t ap = env.access_point().value();
  const auto& ap_id = env.device(ap).id;
  TargetSetEval ev;
  ev.targets = targets;
  ev.config = config;
  for (std::size_t i = 0; i < env.device_count(); ++i) {
    const auto& dev = env.device(i);
    if (dev.role != env::DeviceRole::Station) continue;
    const env::Receiver rx{i};
    const ComplexGain jam = ris::compose_channel(config, env.ris_subchannels(dev.position, rx));
    const ComplexGain sig = env.direct_channel(ap_id, dev.position, rx);
    DeviceEval d{};
    d.device = dev.id;
    d.jam_gain_db = power_db(jam) - b.ris_insertion_loss_db;
    d.attacker_rssi_dbm = b.device_tx_dbm + d.jam_gain_db;
    d.ap_rssi_dbm = b.ap_tx_dbm + power_db(sig);
    ev.devices.push_back(std::move(d));
  }
  std::optional<double> ap_side;
  if (contains(nontargets_for(targets), ap_id)) {
    const ComplexGain g =
        ris::compose_channel(config, env.ris_subchannels(env.device(ap).position, env::Receiver{ap}));
    ap_side = b.device_tx_dbm + power_db(g) - b.ris_insertion_loss_db;
  }
  finish(env, ev, jammer_dbm, knee_mcs, ap_side);
  return ev;
}

void Harness::finish(const env::Environment& env, TargetSetEval& ev, std::optional<double> jammer_dbm,
                     int knee_mcs, std::optional<double> extra_nontarget_dbm) const {
  const int mcs = knee_mcs < 0 ? spec_.link.monitor_mcs : knee_mcs;
  const double noise = env.spec().noise_floor_dbm;
  const double inf = std::numeric_limits<double>::infinity();
  double target_knee = -inf, nontarget_knee = inf, weakest_target = inf, strongest_other = -inf;
  bool any_nontarget = false;
  for (auto& d : ev.devices) {
    d.disruption_power_dbm = disruption_power(d.ap_rssi_dbm, d.jam_gain_db, mcs);
    const double knee = snap_up(d.disruption_power_dbm);
    if (contains(ev.targets, d.device)) {
      target_knee = std::max(target_knee, knee);
      weakest_target = std::min(weakest_target, d.attacker_rssi_dbm);
    } else {
      any_nontarget = true;
      nontarget_knee = std::min(nontarget_knee, knee);
      strongest_other = std::max(strongest_other, d.attacker_rssi_dbm);
    }
  }
  if (extra_nontarget_dbm) strongest_other = std::max(strongest_other, *extra_nontarget_dbm);
  ev.target_knee_dbm = target_knee;
  ev.nontarget_knee_dbm = any_nontarget ? nontarget_knee : kNaN;
  ev.margin_db = any_nontarget ? nontarget_knee - target_knee : kNaN;
  ev.separation_db = std::isfinite(strongest_other) ? weakest_target - strongest_other : kNaN;
  ev.jammer_dbm = jammer_dbm ? *jammer_dbm : target_knee + spec_.jammer.margin_db;

  double reference = inf;
  for (auto& d : ev.devices) {
    d.jsr_db = ev.jammer_dbm + d.jam_gain_db - d.ap_rssi_dbm;
    const double sjnr = link::sjnr_db(d.ap_rssi_dbm, ev.jammer_dbm + d.jam_gain_db, noise);
    d.packet_rate = spec_.link.packets_per_second *
                    link::packet_success_prob(sjnr, spec_.link.monitor_mcs, spec_.mcs, spec_.link.slope_db);
    if (contains(ev.targets, d.device)) reference = std::min(reference, d.jsr_db);
  }
  for (auto& d : ev.devices) d.normalized_jsr_db = d.jsr_db - reference;
}

std::string target_set_label(const std::vector<std::string>& targets) {
  std::string out;
  for (const auto& t : targets) out += (out.empty() ? "" : "+") + t;
  return out;
}

// ---------------------------------------------------------------------------
// Scenario operations

RunResult run_single_target(const ScenarioSpec& spec, unsigned threads) {
  for (std::size_t k = 0; k < spec.target_sets.size(); ++k)
    if (spec.target_sets[k].size() != 1)
      throw ValidationError("single-target runs need exactly one target per set",
                            "target_sets[" + std::to_string(k) + "]");
  return matrix_run(spec, threads);
}

RunResult run_multi_target(const ScenarioSpec& spec, unsigned threads) {
  for (std::size_t k = 0; k < spec.target_sets.size(); ++k)
    if (spec.target_sets[k].size() < 2)
      throw ValidationError("multi-target runs need at least two targets per set",
                            "target_sets[" + std::to_string(k) + "]");
  return matrix_run(spec, threads);
}

RunResult run_jsr_matrix(const ScenarioSpec& spec, unsigned threads) {
  if (!spec.hidden.empty()) return hidden_device_eval(spec, threads);
  return matrix_run(spec, threads);
}

RunResult power_sweep(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  auto runs = solve_all(h, threads);
  RunResult r = make_result(h.spec());
  const auto& link = h.spec().link;
  const double noise = h.environment().spec().noise_floor_dbm;
  const auto grid = h.spec().jammer.sweep.points();
  std::vector<double> margins;
  for (const auto& run : runs) {
    const auto label = target_set_label(run.eval.targets);
    for (double p : grid)
      for (const auto& d : run.eval.devices) {
        const double sjnr = link::sjnr_db(d.ap_rssi_dbm, p + d.jam_gain_db, noise);
        r.add(label, d.device, qualified("packet_rate", "jammer_dbm", p),
              link.packets_per_second *
                  link::packet_success_prob(sjnr, link.monitor_mcs, h.spec().mcs, link.slope_db));
      }
    if (std::isfinite(run.eval.margin_db)) margins.push_back(run.eval.margin_db);
  }
  add_sets(r, runs);
  r.summary["sweep"] = {{"points", grid.size()},
                        {"median_margin_db", margins.empty() ? kNaN : median(margins)}};
  if (!margins.empty()) r.add("*", "*", "median_margin_db", median(margins));
  return r;
}

RunResult run_throughput(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  // Rate adaptation falls back to the most robust MCS, so that is the one
  // the jammer has to overcome.
  auto runs = solve_all(h, threads, 0);
  RunResult r = make_result(h.spec());
  const auto& s = h.spec();
  const double noise = h.environment().spec().noise_floor_dbm;
  json report = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& ev = runs[k].eval;
    const auto label = target_set_label(ev.targets);
    double worst_target = 0.0;
    std::size_t nontargets = 0, kept = 0;
    for (std::size_t i = 0; i < ev.devices.size(); ++i) {
      const auto& d = ev.devices[i];
      const std::uint64_t stream = (static_cast<std::uint64_t>(k) << 16) | i;
      Rng jam_rng(h.seed_for("link", stream));
      Rng base_rng(h.seed_for("link-baseline", stream));
      const double jammed_sjnr = link::sjnr_db(d.ap_rssi_dbm, ev.jammer_dbm + d.jam_gain_db, noise);
      const double clean_sjnr = d.ap_rssi_dbm - noise;
      const auto jammed = link::simulate_adaptive_link(jammed_sjnr, s.throughput.offered_load_mbps,
                                                       s.throughput.windows, s.mcs, s.link, jam_rng);
      const auto clean = link::simulate_adaptive_link(clean_sjnr, s.throughput.offered_load_mbps,
                                                      s.throughput.windows, s.mcs, s.link, base_rng);
      const double ratio = jammed.mean_throughput_mbps / clean.mean_throughput_mbps;
      r.add(label, d.device, "throughput_mbps", jammed.mean_throughput_mbps);
      r.add(label, d.device, "baseline_throughput_mbps", clean.mean_throughput_mbps);
      r.add(label, d.device, "throughput_ratio", ratio);
      r.add(label, d.device, "final_mcs", jammed.final_mcs);
      if (contains(ev.targets, d.device)) {
        worst_target = std::max(worst_target, jammed.mean_throughput_mbps);
      } else {
        ++nontargets;
        kept += ratio >= s.throughput.operational_fraction;
      }
    }
    const double kept_fraction = nontargets ? double(kept) / double(nontargets) : kNaN;
    r.add(label, "*", "max_target_throughput_mbps", worst_target);
    r.add(label, "*", "nontarget_operational_fraction", kept_fraction);
    report.push_back({{"target_set", label},
                      {"max_target_throughput_mbps", worst_target},
                      {"nontarget_operational_fraction", kept_fraction}});
  }
  add_sets(r, runs);
  r.summary["throughput"] = std::move(report);
  return r;
}

RunResult run_exclusion(const ScenarioSpec& spec) {
  const Harness h(spec);
  auto runs = solve_all(h, 1);
  RunResult r = make_result(h.spec());
  const auto& ev = runs.front().eval;
  const auto label = target_set_label(ev.targets);
  double excluded_rate = kNaN;
  json resisting = json::array();
  std::size_t disrupted = 0;
  for (const auto& d : ev.devices) {
    if (d.device == h.spec().excluded) {
      excluded_rate = d.packet_rate;
    } else if (d.packet_rate <= kDisruptedRate) {
      ++disrupted;
    } else {
      resisting.push_back(d.device);
    }
  }
  r.add(label, h.spec().excluded, "excluded_packet_rate", excluded_rate);
  r.add(label, "*", "disrupted_targets", static_cast<double>(disrupted));
  r.summary["exclusion"] = {{"excluded", h.spec().excluded},
                            {"excluded_packet_rate", excluded_rate},
                            {"excluded_operational", excluded_rate >= kOperationalRate},
                            {"disrupted_targets", disrupted},
                            {"targets", ev.targets.size()},
                            {"resisting_targets", resisting}};
  add_sets(r, runs);
  return r;
}

RunResult heatmap_scan(const ScenarioSpec& spec) {
  const Harness h(spec);
  auto runs = solve_all(h, 1);
  const auto& ev = runs.front().eval;
  const auto& env = h.environment();
  const auto& hs = h.spec().heatmap;
  const auto& target = device_spec(env, ev.targets.front());

  const auto axis = [&](double lo, double hi, double origin) {
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / hs.step_m)) + 1;
    std::vector<double> offsets(n), coords(n);
    for (std::size_t i = 0; i < n; ++i) {
      offsets[i] = lo + static_cast<double>(i) * hs.step_m;
      coords[i] = origin + offsets[i];
    }
    return std::pair{offsets, coords};
  };
  const auto [dx, xs] = axis(hs.x_min_m, hs.x_max_m, target.position.x);
  const auto [dy, ys] = axis(hs.y_min_m, hs.y_max_m, target.position.y);
  const auto coeffs = ev.config.coefficients();
  const auto field = env.ris_field_grid(coeffs, xs, ys, target.position.z,
                                        env::Receiver{env.device_index(target.id)});
  const auto ix0 = static_cast<std::size_t>(std::llround(-hs.x_min_m / hs.step_m));
  const auto iy0 = static_cast<std::size_t>(std::llround(-hs.y_min_m / hs.step_m));
  const double focus = power_db(field[iy0 * xs.size() + ix0]);

  HeatmapGrid grid{xs, ys, {}, 0.0, -std::numeric_limits<double>::infinity()};
  grid.db.reserve(field.size());
  double sum = 0.0;
  std::size_t outside = 0;
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double v = power_db(field[j * xs.size() + i]) - focus;
      grid.db.push_back(v);
      if (std::hypot(dx[i], dy[j]) > hs.exclusion_radius_m + 1e-12) {
        sum += v;
        ++outside;
        grid.max_outside_db = std::max(grid.max_outside_db, v);
      }
    }
  grid.mean_outside_db = outside ? sum / static_cast<double>(outside) : kNaN;
  if (!outside) grid.max_outside_db = kNaN;

  RunResult r = make_result(h.spec());
  const auto label = target_set_label(ev.targets);
  r.add(label, target.id, "mean_attenuation_db", -grid.mean_outside_db);
  r.add(label, target.id, "min_attenuation_db", -grid.max_outside_db);
  r.summary["heatmap"] = {{"columns", xs.size()},
                          {"rows", ys.size()},
                          {"cells", grid.db.size()},
                          {"mean_attenuation_db", -grid.mean_outside_db},
                          {"min_attenuation_db", -grid.max_outside_db},
                          {"exclusion_radius_m", hs.exclusion_radius_m}};
  r.heatmap = std::move(grid);
  add_sets(r, runs);
  return r;
}

RunResult displacement_scan(const ScenarioSpec& spec) {
  ScenarioSpec s = validated(spec);
  const DisplacementSpec ds = s.displacement;
  const auto base_it = std::find_if(s.environment.devices.begin(), s.environment.devices.end(),
                                    [&](const auto& d) { return d.id == ds.device; });
  const Position p1 = base_it->position;
  const Position p2 = p1 + Position{ds.gap_m, 0.0, 0.0};
  s.environment.devices.push_back({"antenna1", p1, env::DeviceRole::Station});
  s.environment.devices.push_back({"antenna2", p2, env::DeviceRole::Station});
  s.target_sets = {{"antenna1"}};
  s.nontargets = {"antenna2"};
  s.measurement.sigma_db = 0.0;
  s.measurement.quantize = false;
  const Harness h(std::move(s));
  const auto& env = h.environment();

  const std::vector<std::string> targets{"antenna1"}, nontargets{"antenna2"};
  auto run = h.optimize(env, targets, nontargets, meas::ElementSubset::all(env.ris_elements()), 0);
  const auto& b = h.spec().budget;
  const auto power = [&](const std::string& id, const Position& p) {
    const env::Receiver rx{env.device_index(id)};
    return b.device_tx_dbm - b.ris_insertion_loss_db +
           power_db(ris::compose_channel(run.best, env.ris_subchannels(p, rx)));
  };

  RunResult r = make_result(h.spec());
  const std::string label = "antenna1";
  const double k = env.wavenumber();
  const double fixed0 = power("antenna1", p1), moved0 = power("antenna2", p2);
  double fixed_change = 0.0, peak_rise = -std::numeric_limits<double>::infinity(), peak_at = 0.0;
  const auto n = static_cast<std::size_t>(std::floor(ds.max_m / ds.step_m + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double d = static_cast<double>(i) * ds.step_m;
    const double fixed = power("antenna1", p1);
    const double moved = power("antenna2", p2 + Position{d, 0.0, 0.0});
    r.add(label, "antenna1", qualified("power_dbm", "displacement_m", d), fixed);
    r.add(label, "antenna2", qualified("power_dbm", "displacement_m", d), moved);
    r.add(label, "antenna2", qualified("relative_power_db", "displacement_m", d), moved - moved0);
    r.add(label, "*", qualified("bessel_correlation", "displacement_m", d), std::abs(std::cyl_bessel_j(0.0, k * d)));
    fixed_change = std::max(fixed_change, std::abs(fixed - fixed0));
    if (moved - moved0 > peak_rise) {
      peak_rise = moved - moved0;
      peak_at = d;
    }
  }
  r.add(label, "*", "initial_separation_db", fixed0 - moved0);
  r.add(label, "antenna1", "max_fixed_change_db", fixed_change);
  r.add(label, "antenna2", "max_rise_db", peak_rise);
  r.traces.push_back({label, std::move(run.trace)});
  r.summary["displacement"] = {{"device", ds.device},
                               {"gap_m", ds.gap_m},
                               {"initial_separation_db", fixed0 - moved0},
                               {"max_fixed_change_db", fixed_change},
                               {"max_rise_db", peak_rise},
                               {"max_rise_at_m", peak_at},
                               {"bessel_first_zero_m", 2.404825557695773 / k}};
  return r;
}

RunResult element_sweep(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  const auto& es = h.spec().element_sweep;
  const auto& targets = h.spec().target_sets.front();
  const auto visible = h.visible_nontargets(targets);
  const std::size_t jobs = es.counts.size() * es.seeds;
  std::vector<double> separation(jobs);
  parallel_for(jobs, threads, [&](std::size_t j) {
    const std::size_t count = es.counts[j / es.seeds];
    const auto subset = meas::ElementSubset::random(h.environment().ris_elements(), count, h.seed_for("subset", j));
    const auto run = h.optimize(h.environment(), targets, visible, subset, (std::uint64_t{1} << 40) | j);
    separation[j] = h.evaluate(h.environment(), targets, run.best, h.spec().jammer.power_dbm).separation_db;
  });
  RunResult r = make_result(h.spec());
  const auto label = target_set_label(targets);
  std::vector<double> counts, means, all_counts;
  json per_count = json::array();
  for (std::size_t c = 0; c < es.counts.size(); ++c) {
    const auto count = static_cast<double>(es.counts[c]);
    std::vector<double> values;
    for (std::size_t s = 0; s < es.seeds; ++s) {
      const double v = separation[c * es.seeds + s];
      r.add(label, "*", "separation_db[elements=" + fmt_num(count) + ",seed=" + std::to_string(s) + "]", v);
      values.push_back(v);
      all_counts.push_back(count);
    }
    r.add(label, "*", qualified("mean_separation_db", "elements", count), mean(values));
    counts.push_back(count);
    means.push_back(mean(values));
    per_count.push_back({{"elements", es.counts[c]}, {"mean_separation_db", mean(values)}, {"separation_db", values}});
  }
  const double rho_means = spearman(counts, means);
  const double rho_all = spearman(all_counts, separation);
  r.add(label, "*", "spearman_mean", rho_means);
  r.add(label, "*", "spearman_all", rho_all);
  r.summary["element_sweep"] = {{"counts", per_count}, {"spearman_mean", rho_means}, {"spearman_all", rho_all}};
  return r;
}

RunResult hidden_device_eval(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  const auto& env = h.environment();
  const auto& sets = h.spec().target_sets;
  const auto subset = meas::ElementSubset::all(env.ris_elements());
  struct Outcome {
    SetRun post;
    TargetSetEval pre;
    TargetSetEval visible;
  };
  std::vector<Outcome> out(sets.size());
  parallel_for(sets.size(), threads, [&](std::size_t k) {
    out[k].post = solve(h, k);
    const auto& targets = sets[k];
    const auto pre_cfg = ris::random_config(env.ris_elements(), h.seed_for("pre-config", k));
    out[k].pre = h.evaluate(env, targets, pre_cfg, out[k].post.eval.jammer_dbm);
    const auto seen = h.optimize(env, targets, h.nontargets_for(targets), subset, (std::uint64_t{1} << 44) | k);
    out[k].visible = h.evaluate(env, targets, seen.best, out[k].post.eval.jammer_dbm);
  });

  RunResult r = make_result(h.spec());
  std::size_t hidden_pairs = 0, post_below = 0, pre_above = 0, higher_than_visible = 0;
  std::vector<double> post_hidden, visible_hidden;
  for (auto& o : out) {
    const auto label = target_set_label(o.post.eval.targets);
    for (std::size_t i = 0; i < o.post.eval.devices.size(); ++i) {
      const auto& d = o.post.eval.devices[i];
      r.add(label, d.device, "pre_jsr_db", o.pre.devices[i].jsr_db);
      r.add(label, d.device, "pre_normalized_jsr_db", o.pre.devices[i].normalized_jsr_db);
      r.add(label, d.device, "visible_normalized_jsr_db", o.visible.devices[i].normalized_jsr_db);
      if (contains(o.post.eval.targets, d.device) || !contains(h.spec().hidden, d.device)) continue;
      ++hidden_pairs;
      post_below += d.normalized_jsr_db < 0.0;
      pre_above += o.pre.devices[i].normalized_jsr_db >= 0.0;
      higher_than_visible += d.normalized_jsr_db > o.visible.devices[i].normalized_jsr_db;
      post_hidden.push_back(d.normalized_jsr_db);
      visible_hidden.push_back(o.visible.devices[i].normalized_jsr_db);
    }
  }
  std::vector<SetRun> runs;
  for (auto& o : out) runs.push_back(std::move(o.post));
  add_sets(r, runs);
  add_selectivity(r, runs);
  const auto frac = [&](std::size_t a) { return hidden_pairs ? double(a) / double(hidden_pairs) : kNaN; };
  r.add("*", "*", "hidden_post_below_target_fraction", frac(post_below));
  r.add("*", "*", "hidden_pre_at_or_above_target_fraction", frac(pre_above));
  r.add("*", "*", "hidden_higher_than_visible_fraction", frac(higher_than_visible));
  r.add("*", "*", "hidden_mean_normalized_jsr_db", mean(post_hidden));
  r.add("*", "*", "visible_mean_normalized_jsr_db", mean(visible_hidden));
  r.summary["hidden"] = {{"pairs", hidden_pairs},
                         {"post_below_target_fraction", frac(post_below)},
                         {"pre_at_or_above_target_fraction", frac(pre_above)},
                         {"higher_than_visible_fraction", frac(higher_than_visible)},
                         {"hidden_mean_normalized_jsr_db", mean(post_hidden)},
                         {"visible_mean_normalized_jsr_db", mean(visible_hidden)}};
  return r;
}

double directional_gain_dbi(const DirectionalSpec& antenna, double off_axis_deg) {
  const double ratio = off_axis_deg / antenna.beamwidth_deg;
  return antenna.gain_dbi - std::min(12.0 * ratio * ratio, antenna.front_to_back_db);
}

RunResult directional_baseline(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  const auto& env = h.environment();
  const auto& ds = h.spec().directional;
  const auto& b = h.spec().budget;
  const Position origin = ds.attacker_position.value_or(env.spec().ris_position);
  auto runs = solve_all(h, threads);

  const auto angle_deg = [](const Position& u, const Position& v) {
    const double dot = u.x * v.x + u.y * v.y + u.z * v.z;
    const double c = dot / (distance(u, {}) * distance(v, {}));
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  };
  const double diffuse = std::sqrt(db_to_linear(ds.gain_dbi + ds.diffuse_db));
  const auto gain_db = [&](const Position& boresight, std::size_t device) {
    const Position p = env.device(device).position;
    const double dist = distance(origin, p);
    const double g = directional_gain_dbi(ds, angle_deg(boresight, p - origin));
    const ComplexGain los = std::sqrt(db_to_linear(g)) * std::polar(1.0, -env.wavenumber() * dist);
    const ComplexGain scatter = diffuse * env.ensemble_field(env.attacker_ensemble(), p, env::Receiver{device});
    return power_db(std::sqrt(env.path_loss(dist)) * (los + scatter));
  };

  RunResult r = make_result(h.spec());
  json report = json::array();
  std::vector<double> advantages;
  for (const auto& run : runs) {
    const auto& targets = run.eval.targets;
    Position aim{};
    for (const auto& t : targets) {
      const auto& p = device_spec(env, t).position;
      aim = aim + Position{p.x / double(targets.size()), p.y / double(targets.size()), p.z / double(targets.size())};
    }
    const Position boresight = aim - origin;
    TargetSetEval dir;
    dir.targets = targets;
    dir.config = run.eval.config;
    for (const auto& d : run.eval.devices) {
      DeviceEval e = d;
      e.jam_gain_db = gain_db(boresight, env.device_index(d.device));
      e.attacker_rssi_dbm = b.device_tx_dbm + e.jam_gain_db;
      dir.devices.push_back(std::move(e));
    }
    std::optional<double> ap_side;
    const auto ap = env.access_point().value();
    if (contains(h.nontargets_for(targets), env.device(ap).id)) ap_side = b.device_tx_dbm + gain_db(boresight, ap);
    h.finish(env, dir, h.spec().jammer.power_dbm, -1, ap_side);
    add_eval_rows(r, dir, "directional.");
    const double advantage = run.eval.margin_db - dir.margin_db;
    r.add(target_set_label(targets), "*", "margin_advantage_db", advantage);
    if (std::isfinite(advantage)) advantages.push_back(advantage);
    report.push_back({{"target_set", target_set_label(targets)},
                      {"ris_margin_db", run.eval.margin_db},
                      {"directional_margin_db", dir.margin_db},
                      {"margin_advantage_db", advantage},
                      {"directional_separation_db", dir.separation_db}});
  }
  add_sets(r, runs);
  if (!advantages.empty()) r.add("*", "*", "median_margin_advantage_db", median(advantages));
  r.summary["directional"] = {{"sets", std::move(report)},
                              {"median_margin_advantage_db", advantages.empty() ? kNaN : median(advantages)}};
  return r;
}

RunResult perturbation_run(const ScenarioSpec& spec, unsigned threads) {
  const Harness h(spec);
  auto runs = solve_all(h, threads);
  RunResult r = make_result(h.spec());
  const auto disrupted = [](const TargetSetEval& ev) {
    return std::all_of(ev.devices.begin(), ev.devices.end(), [&](const auto& d) {
      return !contains(ev.targets, d.device) || d.packet_rate <= kDisruptedRate;
    });
  };
  for (const auto& run : runs) add_eval_rows(r, run.eval, "initial.");

  // The environment evolves once; every target set keeps its configuration
  // and jammer power.
  env::Environment env = h.environment();
  const auto& events = h.spec().perturbation.events;
  std::vector<json> timelines(runs.size(), json::array());
  for (std::size_t k = 0; k < runs.size(); ++k)
    timelines[k].push_back({{"time_s", 0.0},
                            {"separation_db", runs[k].eval.separation_db},
                            {"targets_disrupted", disrupted(runs[k].eval)}});
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.fraction > 0.0) env = env.perturb(e.fraction, h.seed_for("perturbation", i));
    if (e.relocate) env = env.with_device_position(e.relocate->device, e.relocate->position);
    std::vector<TargetSetEval> at(runs.size());
    parallel_for(runs.size(), threads, [&](std::size_t k) {
      const auto& base = runs[k].eval;
      at[k] = h.evaluate(env, base.targets, base.config, base.jammer_dbm);
    });
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto label = target_set_label(at[k].targets);
      for (const auto& d : at[k].devices) r.add(label, d.device, qualified("packet_rate", "t", e.time_s), d.packet_rate);
      r.add(label, "*", qualified("separation_db", "t", e.time_s), at[k].separation_db);
      r.add(label, "*", qualified("targets_disrupted", "t", e.time_s), disrupted(at[k]) ? 1.0 : 0.0);
      timelines[k].push_back({{"time_s", e.time_s},
                              {"fraction", e.fraction},
                              {"separation_db", at[k].separation_db},
                              {"targets_disrupted", disrupted(at[k])}});
    }
  }

  // Final state: the stale configuration, or a renewed one.
  const bool renew = h.spec().perturbation.reoptimize;
  std::vector<SetRun> finals(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t k) {
    const auto& base = runs[k].eval;
    if (!renew) {
      finals[k].eval = h.evaluate(env, base.targets, base.config, base.jammer_dbm);
      finals[k].eval.best_cost = base.best_cost;
      return;
    }
    auto renewed = h.optimize(env, base.targets, h.visible_nontargets(base.targets),
                              meas::ElementSubset::all(env.ris_elements()), (std::uint64_t{1} << 36) | k);
    finals[k].eval = h.evaluate(env, base.targets, renewed.best, h.spec().jammer.power_dbm);
    finals[k].eval.best_cost = renewed.best_cost;
    finals[k].traces.push_back({target_set_label(base.targets) + ".renewed", std::move(renewed.trace)});
  });

  json report = json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& before = runs[k].eval;
    const auto& after = finals[k].eval;
    report.push_back({{"target_set", target_set_label(before.targets)},
                      {"timeline", timelines[k]},
                      {"initial_separation_db", before.separation_db},
                      {"final_separation_db", after.separation_db},
                      {"separation_ratio", after.separation_db / before.separation_db},
                      {"final_targets_disrupted", disrupted(after)}});
    for (auto& t : runs[k].traces) r.traces.push_back(std::move(t));
  }
  add_sets(r, finals);
  add_selectivity(r, finals);
  r.summary["perturbation"] = {{"renewed", renew}, {"sets", std::move(report)}};
  return r;
}

RunResult run_scenario(const ScenarioSpec& spec, unsigned threads) {
  switch (spec.mode) {
    case Mode::PacketRate: return power_sweep(spec, threads);
    case Mode::Throughput: return run_throughput(spec, threads);
    case Mode::JsrMatrix: return run_jsr_matrix(spec, threads);
    case Mode::Heatmap: return heatmap_scan(spec);
    case Mode::ElementSweep: return element_sweep(spec, threads);
    case Mode::Displacement: return displacement_scan(spec);
    case Mode::Exclusion: return run_exclusion(spec);
    case Mode::DirectionalBaseline: return directional_baseline(spec, threads);
    case Mode::Perturbation: return perturbation_run(spec, threads);
  }
  throw std::logic_error("unhandled scenario mode");
}

}  // namespace risjam::scn
