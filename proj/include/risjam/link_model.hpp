#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "risjam/channel_env.hpp"
#include "risjam/ris.hpp"
#include "risjam/rng.hpp"
#include "risjam/types.hpp"

namespace risjam::link {

inline constexpr int kMcsCount = 8;

struct McsTable {
  std::array<double, kMcsCount> sjnr_threshold_db{4, 7, 9, 12, 15, 18, 20, 22};
  std::array<double, kMcsCount> data_rate_mbps{6.5, 13, 19.5, 26, 39, 52, 58.5, 65};

  double threshold(int mcs) const { return sjnr_threshold_db.at(static_cast<std::size_t>(mcs)); }
  double rate(int mcs) const { return data_rate_mbps.at(static_cast<std::size_t>(mcs)); }

  /// Thresholds strictly increasing with an 18 dB span; rates spanning a
  /// factor of 10.
  void validate() const;

  static McsTable from_json(const nlohmann::json& doc, const std::string& path = "mcs_table");
  nlohmann::json to_json() const;
  bool operator==(const McsTable&) const = default;
};

struct LinkParams {
  double slope_db = 0.5;       // logistic scale of the reception curve
  double efficiency = 0.55;    // MAC/protocol goodput factor
  std::size_t window = 50;     // packets per rate-adaptation decision
  double downgrade_below = 0.5;
  double upgrade_above = 0.9;
  int monitor_mcs = 6;         // fixed MCS of packet-rate measurements
  double packets_per_second = 100.0;

  void validate() const;
  bool operator==(const LinkParams&) const = default;
};

/// Received jamming power minus received signal power, in dB.
double jsr_db(ComplexGain jam_gain, ComplexGain sig_gain, double jam_power_dbm, double sig_power_dbm);

double sjnr_db(double sig_dbm, double jam_dbm, double noise_dbm);

double packet_success_prob(double sjnr_db, int mcs, const McsTable& table = {},
                           double slope_db = 0.5);

struct LinkState {
  int mcs = kMcsCount - 1;
  std::vector<bool> window;  // outcomes since the last decision
  std::size_t window_size = 50;
  double offered_load_mbps = 30.0;
  int good_windows = 0;      // consecutive windows above the upgrade threshold
};

/// Minstrel-like decision on the current window: below 50% success step
/// down, above 90% for two consecutive windows step up. Clears the window.
LinkState rate_adapt_step(LinkState state, const LinkParams& params = {});

double throughput_mbps(const LinkState& state, double success_prob, const McsTable& table = {},
                       double efficiency = 0.55);

struct AdaptiveLinkResult {
  double mean_throughput_mbps;
  int final_mcs;
  std::vector<int> mcs_history;  // MCS in force during each window
};

/// Runs `windows` rate-adaptation windows at a stationary SJNR, starting at
/// the highest MCS, and averages throughput over the second half.
AdaptiveLinkResult simulate_adaptive_link(double sjnr_db, double offered_load_mbps,
                                          std::size_t windows, const McsTable& table,
                                          const LinkParams& params, Rng& rng);

/// Transmit powers and the fixed attacker-side coupling loss of the RIS
/// path (antenna illumination and element aperture).
struct LinkBudget {
  double ap_tx_dbm = 20.0;
  double device_tx_dbm = 15.0;
  double jammer_dbm = 0.0;
  double ris_insertion_loss_db = 45.0;
  bool operator==(const LinkBudget&) const = default;
};

/// Packets per second a device decodes from the AP at the monitor MCS while
/// the attacker jams through `config`.
double packet_rate(const env::Environment& env, const ris::RisConfig& config,
                   const LinkBudget& budget, std::string_view device,
                   const McsTable& table = {}, const LinkParams& params = {});

}  // namespace risjam::link
