#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "risjam/rng.hpp"
#include "risjam/types.hpp"

// Seeded sum-of-plane-waves radio environment. Every propagation path owns
// an ensemble of M plane waves (arrival angle, phase, amplitude); the
// complex gain at a position is the superposition of those waves scaled by
// a distance-dependent path loss. Fields from a single ensemble follow the
// isotropic 2-D scattering model, so their spatial autocorrelation is
// J0(2*pi*d/lambda).
namespace risjam::env {

enum class DeviceRole { AccessPoint, Station };

struct DeviceSpec {
  std::string id;
  Position position;
  DeviceRole role = DeviceRole::Station;
  bool operator==(const DeviceSpec&) const = default;
};

struct EnvironmentSpec {
  double carrier_frequency_hz = 5.56e9;
  double path_loss_exponent = 2.0;
  double noise_floor_dbm = -95.0;
  int scatterers = 256;
  int ris_elements = 768;
  Position ris_position{};
  // Power ratio of a line-of-sight term on direct (non-RIS) paths. 0 keeps
  // them purely diffuse.
  double rician_k = 0.0;
  // Variance of the per-receiver complex re-weighting of plane waves. 0
  // disables it; two receivers at the same spot then see identical fields.
  double pattern_diversity = 0.0;
  std::vector<DeviceSpec> devices;
  bool operator==(const EnvironmentSpec&) const = default;
};

inline constexpr int kMinScatterers = 16;

struct PlaneWave {
  double cos_angle;
  double sin_angle;
  double phase;
  double amplitude;
};

struct PerturbationEvent {
  double fraction;
  std::uint64_t seed;
};

/// Identity of the receiving antenna. Only matters when pattern diversity
/// is enabled; anonymous receivers see the unweighted field.
struct Receiver {
  static constexpr std::size_t kAnonymous = static_cast<std::size_t>(-1);
  std::size_t device = kAnonymous;
};

class Environment {
 public:
  static Environment synthesize(const EnvironmentSpec& spec, std::uint64_t seed);

  const EnvironmentSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw_counter() const { return draw_counter_; }
  const std::vector<PerturbationEvent>& perturbations() const { return perturbations_; }

  double wavelength() const { return wavelength_; }
  double wavenumber() const;
  std::size_t ris_elements() const { return static_cast<std::size_t>(spec_.ris_elements); }
  std::size_t scatterers() const { return static_cast<std::size_t>(spec_.scatterers); }
  std::size_t ensemble_count() const;
  std::size_t direct_ensemble_count() const { return spec_.devices.size() + 1; }

  // Ensemble layout: [0, L) RIS element paths, L the attacker's own antenna,
  // L + 1 + i the direct transmitter of device i.
  std::size_t attacker_ensemble() const { return ris_elements(); }
  std::size_t device_ensemble(std::size_t device) const { return ris_elements() + 1 + device; }
  std::span<const PlaneWave> ensemble(std::size_t index) const;

  std::size_t device_count() const { return spec_.devices.size(); }
  const DeviceSpec& device(std::size_t index) const { return spec_.devices.at(index); }
  std::optional<std::size_t> find_device(std::string_view id) const;
  std::size_t device_index(std::string_view id) const;  // throws on unknown id
  std::optional<std::size_t> access_point() const;
  Receiver receiver(std::string_view id) const { return {device_index(id)}; }

  /// Free-space-anchored power gain (lambda / 4 pi)^2 * d^-n.
  double path_loss(double distance_m) const;

  /// Normalized field of one ensemble at `p`: (1/sqrt(M)) sum_m a_m e^{j(k.r + theta_m)}.
  ComplexGain ensemble_field(std::size_t index, const Position& p, Receiver rx = {}) const;

  ComplexGain ris_subchannel(std::size_t element, const Position& p, Receiver rx = {}) const;
  std::vector<ComplexGain> ris_subchannels(const Position& p, Receiver rx = {}) const;

  /// Channel from a registered device's transmitter to `p`.
  ComplexGain direct_channel(std::string_view source, const Position& p, Receiver rx = {}) const;

  /// sum_l coefficient_l * h_l evaluated on the grid xs x ys (row-major in
  /// y, i.e. result[iy * xs.size() + ix]).
  std::vector<ComplexGain> ris_field_grid(std::span<const double> coefficients,
                                          std::span<const double> xs,
                                          std::span<const double> ys, double z,
                                          Receiver rx = {}) const;

  /// Redraws angle and phase of ceil(fraction * M) waves in every ensemble.
  Environment perturb(double fraction, std::uint64_t seed) const;

  /// Copy with one device moved. Channels are evaluated from positions, so
  /// the stale position is not cached anywhere.
  Environment with_device_position(std::string_view id, const Position& p) const;

  bool operator==(const Environment& other) const;

 private:
  friend Environment environment_from_json(const nlohmann::json& doc);

  Environment() = default;
  void apply_perturbation(double fraction, std::uint64_t seed);
  double diversity_weight_scale() const;
  ComplexGain diversity_weight(std::size_t device, std::size_t ensemble,
                               std::size_t wave) const;

  EnvironmentSpec spec_;
  std::uint64_t seed_ = 0;
  std::uint64_t draw_counter_ = 0;
  double wavelength_ = 0.0;
  std::vector<PlaneWave> waves_;
  std::vector<PerturbationEvent> perturbations_;
};

void validate(const EnvironmentSpec& spec);

/// Empirical complex correlation between the field at `base` and at
/// `base + d * x_hat` over independent plane-wave realizations drawn from
/// the environment's seed.
std::vector<ComplexGain> spatial_correlation(const Environment& env, const Position& base,
                                             std::span<const double> displacements,
                                             int realizations);

/// RSSI reported by a receiver: Gaussian measurement noise, clamp at the
/// noise floor, round to whole dB.
double received_rssi(double power_at_antenna_dbm, double noise_floor_dbm, double sigma_db,
                     Rng& rng);

nlohmann::json to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const EnvironmentSpec& spec);
EnvironmentSpec spec_from_json(const nlohmann::json& doc, const std::string& path = "environment");

}  // namespace risjam::env
