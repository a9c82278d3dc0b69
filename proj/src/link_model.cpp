#include "risjam/link_model.hpp"

#include <algorithm>
#include <cmath>

#include "risjam/json_util.hpp"

namespace risjam::link {

void McsTable::validate() const {
  for (int m = 1; m < kMcsCount; ++m)
    if (!(threshold(m) > threshold(m - 1)))
      throw ValidationError("SJNR thresholds must be strictly increasing", "mcs_table.sjnr_threshold_db");
  if (std::abs(threshold(kMcsCount - 1) - threshold(0) - 18.0) > 1e-9)
    throw ValidationError("threshold span between MCS 0 and MCS 7 must be 18 dB",
                          "mcs_table.sjnr_threshold_db");
  for (int m = 0; m < kMcsCount; ++m)
    if (!(rate(m) > 0.0)) throw ValidationError("data rates must be positive", "mcs_table.data_rate_mbps");
  if (std::abs(rate(kMcsCount - 1) / rate(0) - 10.0) > 1e-9)
    throw ValidationError("MCS 7 must carry 10x the MCS 0 data rate", "mcs_table.data_rate_mbps");
}

McsTable McsTable::from_json(const nlohmann::json& doc, const std::string& path) {
  using namespace json_util;
  expect_object(doc, path);
  reject_unknown_keys(doc, {"sjnr_threshold_db", "data_rate_mbps"}, path);
  McsTable t;
  const auto load = [&](std::string_view key, std::array<double, kMcsCount>& out) {
    if (!doc.contains(key)) return;
    const auto& arr = doc[std::string(key)];
    const std::string p = join(path, key);
    if (!arr.is_array() || arr.size() != kMcsCount)
      throw ValidationError("expected an array of 8 numbers", p);
    for (std::size_t i = 0; i < kMcsCount; ++i) out[i] = as<double>(arr[i], index_path(p, i));
  };
  load("sjnr_threshold_db", t.sjnr_threshold_db);
  load("data_rate_mbps", t.data_rate_mbps);
  t.validate();
  return t;
}

nlohmann::json McsTable::to_json() const {
  return {{"sjnr_threshold_db", sjnr_threshold_db}, {"data_rate_mbps", data_rate_mbps}};
}

void LinkParams::validate() const {
  if (!(slope_db > 0.0)) throw ValidationError("must be positive", "link.slope_db");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ValidationError("must lie in (0, 1]", "link.efficiency");
  if (window == 0) throw ValidationError("must be at least 1", "link.window");
  if (monitor_mcs < 0 || monitor_mcs >= kMcsCount) throw ValidationError("must lie in 0..7", "link.monitor_mcs");
  if (!(downgrade_below < upgrade_above)) throw ValidationError("thresholds out of order", "link");
}

double jsr_db(ComplexGain jam_gain, ComplexGain sig_gain, double jam_power_dbm, double sig_power_dbm) {
  if (std::abs(sig_gain) == 0.0) throw std::domain_error("JSR undefined for a zero signal gain");
  return (jam_power_dbm + 20.0 * std::log10(std::abs(jam_gain))) -
         (sig_power_dbm + 20.0 * std::log10(std::abs(sig_gain)));
}

double sjnr_db(double sig_dbm, double jam_dbm, double noise_dbm) {
  return sig_dbm - 10.0 * std::log10(db_to_linear(jam_dbm) + db_to_linear(noise_dbm));
}

double packet_success_prob(double sjnr, int mcs, const McsTable& table, double slope_db) {
  if (mcs < 0 || mcs >= kMcsCount) throw std::out_of_range("MCS index out of range");
  return 1.0 / (1.0 + std::exp(-(sjnr - table.threshold(mcs)) / slope_db));
}

LinkState rate_adapt_step(LinkState state, const LinkParams& params) {
  if (state.window.empty()) throw std::invalid_argument("rate adaptation needs a non-empty window");
  const auto successes = std::count(state.window.begin(), state.window.end(), true);
  const double rate = static_cast<double>(successes) / static_cast<double>(state.window.size());
  if (rate < params.downgrade_below) {
    state.mcs = std::max(0, state.mcs - 1);
    state.good_windows = 0;
  } else if (rate > params.upgrade_above) {
    if (++state.good_windows >= 2) {
      state.mcs = std::min(kMcsCount - 1, state.mcs + 1);
      state.good_windows = 0;
    }
  } else {
    state.good_windows = 0;
  }
  state.window.clear();
  return state;
}

double throughput_mbps(const LinkState& state, double success_prob, const McsTable& table,
                       double efficiency) {
  if (!(state.offered_load_mbps > 0.0)) throw std::invalid_argument("offered load must be positive");
  return std::min(state.offered_load_mbps, table.rate(state.mcs) * success_prob * efficiency);
}

AdaptiveLinkResult simulate_adaptive_link(double sjnr, double offered_load_mbps,
                                          std::size_t windows, const McsTable& table,
                                          const LinkParams& params, Rng& rng) {
  LinkState state;
  state.window_size = params.window;
  state.offered_load_mbps = offered_load_mbps;
  AdaptiveLinkResult result{0.0, 0, {}};
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t w = 0; w < windows; ++w) {
    const double p = packet_success_prob(sjnr, state.mcs, table, params.slope_db);
    result.mcs_history.push_back(state.mcs);
    if (w >= windows / 2) {
      sum += throughput_mbps(state, p, table, params.efficiency);
      ++counted;
    }
    for (std::size_t k = 0; k < state.window_size; ++k) state.window.push_back(rng.bernoulli(p));
    state = rate_adapt_step(std::move(state), params);
  }
  result.mean_throughput_mbps = counted ? sum / static_cast<double>(counted) : 0.0;
  result.final_mcs = state.mcs;
  return result;
}

double packet_rate(const env::Environment& env, const ris::RisConfig& config,
                   const LinkBudget& budget, std::string_view device, const McsTable& table,
                   const LinkParams& params) {
  const std::size_t d = env.device_index(device);
  const auto ap = env.access_point();
  if (!ap) throw ValidationError("packet rates need an access point in the roster");
  if (*ap == d) throw ValidationError("the access point does not receive its own packets");
  const Position p = env.device(d).position;
  const env::Receiver rx{d};
  const ComplexGain sig = env.direct_channel(env.device(*ap).id, p, rx);
  const ComplexGain jam = ris::compose_channel(config, env.ris_subchannels(p, rx));
  const double sig_dbm = budget.ap_tx_dbm + power_db(sig);
  const double jam_dbm = budget.jammer_dbm - budget.ris_insertion_loss_db + power_db(jam);
  const double s = sjnr_db(sig_dbm, jam_dbm, env.spec().noise_floor_dbm);
  return params.packets_per_second * packet_success_prob(s, params.monitor_mcs, table, params.slope_db);
}

}  // namespace risjam::link
