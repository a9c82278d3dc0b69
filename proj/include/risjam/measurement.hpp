#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "risjam/channel_env.hpp"
#include "risjam/optimizer.hpp"
#include "risjam/ris.hpp"
#include "risjam/rng.hpp"

namespace risjam::meas {

/// Part of the surface the optimizer controls. Elements outside `active`
/// stay at their value in `base`.
struct ElementSubset {
  std::vector<std::size_t> active;  // ascending element indices
  ris::RisConfig base;

  static ElementSubset all(std::size_t length);
  /// `count` elements chosen uniformly without replacement, the rest frozen
  /// at a random configuration.
  static ElementSubset random(std::size_t length, std::size_t count, std::uint64_t seed);

  std::size_t size() const { return active.size(); }
  ris::RisConfig expand(const ris::RisConfig& active_config) const;
};

/// RIS sub-channels of a fixed set of receivers, split into the controlled
/// part and the constant contribution of frozen elements.
class ChannelView {
 public:
  ChannelView(const env::Environment& env, const std::vector<std::string>& devices,
              const ElementSubset& subset);

  std::size_t device_count() const { return frozen_.size(); }
  std::size_t active_count() const { return active_count_; }
  /// Composite RIS channel of device `i` under an active-element config.
  ComplexGain composite(std::size_t i, const ris::RisConfig& active_config) const;

 private:
  std::size_t active_count_;
  std::vector<ComplexGain> gains_;  // device-major, active_count_ per device
  std::vector<ComplexGain> frozen_;
};

struct OracleOptions {
  double tx_power_dbm = 15.0;       // transmit power of the observed devices
  double coupling_loss_db = 45.0;   // attacker antenna to RIS coupling
  double sigma_db = 0.5;            // measurement noise; 0 for exact
  bool quantize = true;             // whole-dB RSSI with noise-floor clamp
  bool operator==(const OracleOptions&) const = default;
};

/// Attacker-side RSSI of target and visible non-target transmissions
/// received through the RIS. Hidden devices are simply not listed.
class RssiOracle {
 public:
  RssiOracle(const env::Environment& env, const std::vector<std::string>& targets,
             const std::vector<std::string>& nontargets, const OracleOptions& options,
             std::uint64_t seed, const ElementSubset& subset);

  opt::Measurement measure(const ris::RisConfig& active_config);
  /// Noise-free power in dBm for each listed device, targets first.
  std::vector<double> exact_dbm(const ris::RisConfig& active_config) const;

  /// Callable view for the optimizer. The oracle must outlive it.
  opt::MeasurementOracle callable();

  std::size_t length() const { return view_.active_count(); }
  std::size_t target_count() const { return targets_; }

 private:
  ChannelView view_;
  std::size_t targets_;
  OracleOptions options_;
  double noise_floor_dbm_;
  Rng rng_;
};

}  // namespace risjam::meas
