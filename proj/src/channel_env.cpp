#include "risjam/channel_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "risjam/json_util.hpp"

namespace risjam::env {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kFormatVersion = 1;
constexpr const char* kGenerator = "mt19937_64+splitmix64/plane-wave-v1";

void draw_ensemble(Rng& rng, std::span<PlaneWave> waves) {
  double energy = 0.0;
  for (auto& w : waves) {
    const double angle = kTwoPi * rng.uniform();
    w.cos_angle = std::cos(angle);
    w.sin_angle = std::sin(angle);
    w.phase = kTwoPi * rng.uniform();
    // Rayleigh amplitudes, renormalized below so sum a^2 = M exactly.
    w.amplitude = std::sqrt(-std::log1p(-rng.uniform()));
    energy += w.amplitude * w.amplitude;
  }
  const double scale = std::sqrt(static_cast<double>(waves.size()) / energy);
  for (auto& w : waves) w.amplitude *= scale;
}

ComplexGain sum_waves(std::span<const PlaneWave> waves, double k, const Position& p) {
  double re = 0.0;
  double im = 0.0;
  for (const auto& w : waves) {
    const double arg = k * (w.cos_angle * p.x + w.sin_angle * p.y) + w.phase;
    re += w.amplitude * std::cos(arg);
    im += w.amplitude * std::sin(arg);
  }
  return {re, im};
}

const char* role_name(DeviceRole r) { return r == DeviceRole::AccessPoint ? "ap" : "station"; }

}  // namespace

void validate(const EnvironmentSpec& spec) {
  if (!(spec.carrier_frequency_hz > 0.0) || !std::isfinite(spec.carrier_frequency_hz))
    throw ValidationError("carrier frequency must be positive", "frequency_hz");
  if (!(spec.path_loss_exponent > 0.0) || !std::isfinite(spec.path_loss_exponent))
    throw ValidationError("path-loss exponent must be positive", "path_loss_exponent");
  if (!std::isfinite(spec.noise_floor_dbm))
    throw ValidationError("noise floor must be finite", "noise_floor_dbm");
  if (spec.scatterers < kMinScatterers)
    throw ValidationError("at least " + std::to_string(kMinScatterers) +
                              " scatterers per ensemble are needed for stable correlation "
                              "statistics, got " + std::to_string(spec.scatterers),
                          "scatterers");
  if (spec.ris_elements < 1) throw ValidationError("need at least one RIS element", "ris_elements");
  if (!spec.ris_position.finite()) throw ValidationError("non-finite position", "ris_position");
  if (!(spec.rician_k >= 0.0) || !std::isfinite(spec.rician_k))
    throw ValidationError("must be >= 0", "rician_k");
  if (!(spec.pattern_diversity >= 0.0) || !std::isfinite(spec.pattern_diversity))
    throw ValidationError("must be >= 0", "pattern_diversity");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < spec.devices.size(); ++i) {
    const auto& d = spec.devices[i];
    const std::string path = json_util::index_path("devices", i);
    if (d.id.empty()) throw ValidationError("device id must not be empty", path + ".id");
    if (!ids.insert(d.id).second) throw ValidationError("duplicate device id '" + d.id + "'", path + ".id");
    if (!d.position.finite()) throw ValidationError("non-finite position", path + ".position");
    if (distance(d.position, spec.ris_position) <= kMinDistance)
      throw ValidationError("device '" + d.id + "' coincides with the RIS", path + ".position");
  }
}

Environment Environment::synthesize(const EnvironmentSpec& spec, std::uint64_t seed) {
  validate(spec);
  Environment env;
  env.spec_ = spec;
  env.seed_ = seed;
  env.wavelength_ = kSpeedOfLight / spec.carrier_frequency_hz;

  const std::size_t m = env.scatterers();
  env.waves_.resize(env.ensemble_count() * m);
  for (std::size_t e = 0; e < env.ensemble_count(); ++e) {
    Rng rng(derive_seed(seed, "ensemble", e));
    draw_ensemble(rng, std::span(env.waves_).subspan(e * m, m));
  }
  env.draw_counter_ = env.waves_.size();
  return env;
}

double Environment::wavenumber() const { return kTwoPi / wavelength_; }

std::size_t Environment::ensemble_count() const { return ris_elements() + direct_ensemble_count(); }

std::span<const PlaneWave> Environment::ensemble(std::size_t index) const {
  if (index >= ensemble_count()) throw std::out_of_range("ensemble index out of range");
  return std::span(waves_).subspan(index * scatterers(), scatterers());
}

std::optional<std::size_t> Environment::find_device(std::string_view id) const {
  for (std::size_t i = 0; i < spec_.devices.size(); ++i)
    if (spec_.devices[i].id == id) return i;
  return std::nullopt;
}

std::size_t Environment::device_index(std::string_view id) const {
  if (auto i = find_device(id)) return *i;
  throw ValidationError("unknown device '" + std::string(id) + "'");
}

std::optional<std::size_t> Environment::access_point() const {
  for (std::size_t i = 0; i < spec_.devices.size(); ++i)
    if (spec_.devices[i].role == DeviceRole::AccessPoint) return i;
  return std::nullopt;
}

double Environment::path_loss(double distance_m) const {
  if (!(distance_m > kMinDistance))
    throw std::domain_error("evaluation point closer than 1e-6 m to the transmitter");
  const double free_space = wavelength_ / (4.0 * std::numbers::pi);
  return free_space * free_space * std::pow(distance_m, -spec_.path_loss_exponent);
}

double Environment::diversity_weight_scale() const {
  return 1.0 / std::sqrt(1.0 + spec_.pattern_diversity);
}

ComplexGain Environment::diversity_weight(std::size_t device, std::size_t ensemble,
                                          std::size_t wave) const {
  const std::uint64_t key = derive_seed(seed_, "pattern-diversity",
                                        (static_cast<std::uint64_t>(device) << 48) ^
                                            (static_cast<std::uint64_t>(ensemble) << 20) ^ wave);
  const double u1 = (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64(key + 1) >> 11) * 0x1.0p-53;
  // CN(0, 1) sample.
  const double r = std::sqrt(-std::log(u1));
  const ComplexGain g = std::polar(r, kTwoPi * u2);
  return (1.0 + std::sqrt(spec_.pattern_diversity) * g) * diversity_weight_scale();
}

ComplexGain Environment::ensemble_field(std::size_t index, const Position& p, Receiver rx) const {
  const auto waves = ensemble(index);
  const double k = wavenumber();
  ComplexGain field;
  if (spec_.pattern_diversity > 0.0 && rx.device != Receiver::kAnonymous) {
    for (std::size_t m = 0; m < waves.size(); ++m) {
      const auto& w = waves[m];
      const double arg = k * (w.cos_angle * p.x + w.sin_angle * p.y) + w.phase;
      field += diversity_weight(rx.device, index, m) * std::polar(w.amplitude, arg);
    }
  } else {
    field = sum_waves(waves, k, p);
  }
  return field / std::sqrt(static_cast<double>(waves.size()));
}

ComplexGain Environment::ris_subchannel(std::size_t element, const Position& p, Receiver rx) const {
  if (element >= ris_elements()) throw std::out_of_range("RIS element index out of range");
  const double pl = path_loss(distance(spec_.ris_position, p));
  return std::sqrt(pl) * ensemble_field(element, p, rx);
}

std::vector<ComplexGain> Environment::ris_subchannels(const Position& p, Receiver rx) const {
  const double amplitude = std::sqrt(path_loss(distance(spec_.ris_position, p)));
  std::vector<ComplexGain> h(ris_elements());
  for (std::size_t l = 0; l < h.size(); ++l) h[l] = amplitude * ensemble_field(l, p, rx);
  return h;
}

ComplexGain Environment::direct_channel(std::string_view source, const Position& p,
                                        Receiver rx) const {
  const std::size_t s = device_index(source);
  const double d = distance(spec_.devices[s].position, p);
  if (!(d > kMinDistance))
    throw std::domain_error("direct channel evaluated at the transmitter of '" +
                            std::string(source) + "'");
  const ComplexGain diffuse = ensemble_field(device_ensemble(s), p, rx);
  const double k_factor = spec_.rician_k;
  ComplexGain field = diffuse;
  if (k_factor > 0.0) {
    const ComplexGain los = std::polar(1.0, -wavenumber() * d);
    field = std::sqrt(k_factor / (k_factor + 1.0)) * los + std::sqrt(1.0 / (k_factor + 1.0)) * diffuse;
  }
  return std::sqrt(path_loss(d)) * field;
}

std::vector<ComplexGain> Environment::ris_field_grid(std::span<const double> coefficients,
                                                     std::span<const double> xs,
                                                     std::span<const double> ys, double z,
                                                     Receiver rx) const {
  if (coefficients.size() != ris_elements())
    throw std::invalid_argument("coefficient count does not match RIS size");
  const double k = wavenumber();
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();
  const bool weighted = spec_.pattern_diversity > 0.0 && rx.device != Receiver::kAnonymous;
  std::vector<ComplexGain> acc(nx * ny);
  std::vector<ComplexGain> ex(nx);
  std::vector<ComplexGain> ey(ny);
  std::vector<ComplexGain> row(nx);
  // Plane waves factor as e^{jk cos x} * e^{jk sin y}, so each wave costs
  // nx + ny phasors instead of nx * ny.
  for (std::size_t l = 0; l < ris_elements(); ++l) {
    if (coefficients[l] == 0.0) continue;
    const auto waves = ensemble(l);
    for (std::size_t m = 0; m < waves.size(); ++m) {
      const auto& w = waves[m];
      ComplexGain a = coefficients[l] * std::polar(w.amplitude, w.phase);
      if (weighted) a *= diversity_weight(rx.device, l, m);
      for (std::size_t i = 0; i < nx; ++i) ex[i] = a * std::polar(1.0, k * w.cos_angle * xs[i]);
      for (std::size_t j = 0; j < ny; ++j) ey[j] = std::polar(1.0, k * w.sin_angle * ys[j]);
      for (std::size_t j = 0; j < ny; ++j) {
        ComplexGain* out = acc.data() + j * nx;
        const ComplexGain f = ey[j];
        for (std::size_t i = 0; i < nx; ++i) out[i] += ex[i] * f;
      }
    }
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(scatterers()));
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double pl = path_loss(distance(spec_.ris_position, Position{xs[i], ys[j], z}));
      acc[j * nx + i] *= std::sqrt(pl) * norm;
    }
  return acc;
}

void Environment::apply_perturbation(double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ValidationError("perturbation fraction must lie in [0, 1]", "fraction");
  const std::size_t m = scatterers();
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-9));
  std::vector<std::size_t> order(m);
  for (std::size_t e = 0; e < ensemble_count() && count > 0; ++e) {
    Rng rng(derive_seed(seed, "perturb", e));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.below(m - i);
      std::swap(order[i], order[j]);
      PlaneWave& w = waves_[e * m + order[i]];
      const double angle = kTwoPi * rng.uniform();
      w.cos_angle = std::cos(angle);
      w.sin_angle = std::sin(angle);
      w.phase = kTwoPi * rng.uniform();
    }
  }
  draw_counter_ += count * ensemble_count();
  perturbations_.push_back({fraction, seed});
}

Environment Environment::perturb(double fraction, std::uint64_t seed) const {
  Environment next = *this;
  next.apply_perturbation(fraction, seed);
  return next;
}

Environment Environment::with_device_position(std::string_view id, const Position& p) const {
  Environment next = *this;
  auto& dev = next.spec_.devices[device_index(id)];
  dev.position = p;
  validate(next.spec_);
  return next;
}

bool Environment::operator==(const Environment& other) const {
  if (seed_ != other.seed_ || draw_counter_ != other.draw_counter_ ||
      waves_.size() != other.waves_.size())
    return false;
  for (std::size_t i = 0; i < waves_.size(); ++i) {
    const auto& a = waves_[i];
    const auto& b = other.waves_[i];
    if (a.cos_angle != b.cos_angle || a.sin_angle != b.sin_angle || a.phase != b.phase ||
        a.amplitude != b.amplitude)
      return false;
  }
  return spec_to_json(spec_) == spec_to_json(other.spec_);
}

std::vector<ComplexGain> spatial_correlation(const Environment& env, const Position& base,
                                             std::span<const double> displacements,
                                             int realizations) {
  if (realizations < 100) throw ValidationError("need at least 100 realizations", "realizations");
  const double k = env.wavenumber();
  std::vector<PlaneWave> waves(env.scatterers());
  std::vector<ComplexGain> cross(displacements.size());
  std::vector<double> power(displacements.size());
  double base_power = 0.0;
  for (int r = 0; r < realizations; ++r) {
    Rng rng(derive_seed(env.seed(), "correlation", static_cast<std::uint64_t>(r)));
    draw_ensemble(rng, waves);
    const ComplexGain f0 = sum_waves(waves, k, base);
    base_power += std::norm(f0);
    for (std::size_t i = 0; i < displacements.size(); ++i) {
      const ComplexGain fd = sum_waves(waves, k, base + Position{displacements[i], 0.0, 0.0});
      cross[i] += f0 * std::conj(fd);
      power[i] += std::norm(fd);
    }
  }
  std::vector<ComplexGain> rho(displacements.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = cross[i] / std::sqrt(base_power * power[i]);
  return rho;
}

double received_rssi(double power_at_antenna_dbm, double noise_floor_dbm, double sigma_db, Rng& rng) {
  double v = power_at_antenna_dbm;
  if (sigma_db > 0.0) v += rng.normal(0.0, sigma_db);
  v = std::max(v, noise_floor_dbm);
  return std::nearbyint(v);
}

nlohmann::json spec_to_json(const EnvironmentSpec& spec) {
  using nlohmann::json;
  json devices = json::array();
  for (const auto& d : spec.devices)
    devices.push_back({{"id", d.id}, {"role", role_name(d.role)},
                       {"position", json_util::to_json(d.position)}});
  return {{"frequency_hz", spec.carrier_frequency_hz},
          {"path_loss_exponent", spec.path_loss_exponent},
          {"noise_floor_dbm", spec.noise_floor_dbm},
          {"scatterers", spec.scatterers},
          {"ris_elements", spec.ris_elements},
          {"ris_position", json_util::to_json(spec.ris_position)},
          {"rician_k", spec.rician_k},
          {"pattern_diversity", spec.pattern_diversity},
          {"devices", devices}};
}

namespace {

std::vector<DeviceSpec> devices_from_json(const nlohmann::json& arr, const std::string& path) {
  using namespace json_util;
  expect_array(arr, path);
  std::vector<DeviceSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = index_path(path, i);
    expect_object(arr[i], p);
    reject_unknown_keys(arr[i], {"id", "role", "position"}, p);
    DeviceSpec d;
    d.id = require<std::string>(arr[i], "id", p);
    const std::string role = get_or<std::string>(arr[i], "role", "station", p);
    if (role == "ap")
      d.role = DeviceRole::AccessPoint;
    else if (role != "station")
      throw ValidationError("role must be 'ap' or 'station'", p + ".role");
    if (!arr[i].contains("position")) throw ValidationError("missing position", p + ".position");
    d.position = position(arr[i]["position"], p + ".position");
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

EnvironmentSpec spec_from_json(const nlohmann::json& doc, const std::string& path) {
  using namespace json_util;
  expect_object(doc, path);
  reject_unknown_keys(doc,
                      {"frequency_hz", "path_loss_exponent", "noise_floor_dbm", "scatterers",
                       "ris_elements", "ris_position", "rician_k", "pattern_diversity", "devices"},
                      path);
  EnvironmentSpec s;
  s.carrier_frequency_hz = get_or(doc, "frequency_hz", s.carrier_frequency_hz, path);
  s.path_loss_exponent = get_or(doc, "path_loss_exponent", s.path_loss_exponent, path);
  s.noise_floor_dbm = get_or(doc, "noise_floor_dbm", s.noise_floor_dbm, path);
  s.scatterers = get_or(doc, "scatterers", s.scatterers, path);
  s.ris_elements = get_or(doc, "ris_elements", s.ris_elements, path);
  if (doc.contains("ris_position")) s.ris_position = position(doc["ris_position"], join(path, "ris_position"));
  s.rician_k = get_or(doc, "rician_k", s.rician_k, path);
  s.pattern_diversity = get_or(doc, "pattern_diversity", s.pattern_diversity, path);
  if (doc.contains("devices")) s.devices = devices_from_json(doc["devices"], join(path, "devices"));
  return s;
}

nlohmann::json to_json(const Environment& env) {
  using nlohmann::json;
  const auto& s = env.spec();
  json devices = spec_to_json(s)["devices"];
  json perturbations = json::array();
  for (const auto& p : env.perturbations())
    perturbations.push_back({{"fraction", p.fraction}, {"seed", p.seed}});
  return {{"version", kFormatVersion},
          {"frequency_hz", s.carrier_frequency_hz},
          {"seed", env.seed()},
          {"M", s.scatterers},
          {"path_loss_exponent", s.path_loss_exponent},
          {"noise_floor_dbm", s.noise_floor_dbm},
          {"devices", devices},
          {"ensembles",
           {{"generator", kGenerator},
            {"seed", env.seed()},
            {"draw_counter", env.draw_counter()},
            {"ris_elements", s.ris_elements},
            {"ris_position", json_util::to_json(s.ris_position)},
            {"direct_paths", env.direct_ensemble_count()},
            {"rician_k", s.rician_k},
            {"perturbations", perturbations}}},
          {"pattern_diversity", s.pattern_diversity}};
}

Environment environment_from_json(const nlohmann::json& doc) {
  using namespace json_util;
  expect_object(doc, "");
  reject_unknown_keys(doc,
                      {"version", "frequency_hz", "seed", "M", "path_loss_exponent",
                       "noise_floor_dbm", "devices", "ensembles", "pattern_diversity"},
                      "");
  if (require<int>(doc, "version", "") != kFormatVersion)
    throw ValidationError("unsupported environment format version", "version");
  const json& ens = doc.at("ensembles");
  expect_object(ens, "ensembles");
  if (require<std::string>(ens, "generator", "ensembles") != kGenerator)
    throw ValidationError("unknown ensemble generator", "ensembles.generator");

  EnvironmentSpec s;
  s.carrier_frequency_hz = require<double>(doc, "frequency_hz", "");
  s.scatterers = require<int>(doc, "M", "");
  s.path_loss_exponent = require<double>(doc, "path_loss_exponent", "");
  s.noise_floor_dbm = require<double>(doc, "noise_floor_dbm", "");
  s.pattern_diversity = require<double>(doc, "pattern_diversity", "");
  s.devices = devices_from_json(doc.at("devices"), "devices");
  s.ris_elements = require<int>(ens, "ris_elements", "ensembles");
  s.ris_position = position(ens.at("ris_position"), "ensembles.ris_position");
  s.rician_k = require<double>(ens, "rician_k", "ensembles");

  const auto seed = require<std::uint64_t>(doc, "seed", "");
  if (require<std::uint64_t>(ens, "seed", "ensembles") != seed)
    throw ValidationError("ensemble seed differs from environment seed", "ensembles.seed");
  Environment env = Environment::synthesize(s, seed);
  const json& perturbations = ens.at("perturbations");
  expect_array(perturbations, "ensembles.perturbations");
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const std::string p = index_path("ensembles.perturbations", i);
    env.apply_perturbation(require<double>(perturbations[i], "fraction", p),
                           require<std::uint64_t>(perturbations[i], "seed", p));
  }
  if (env.draw_counter() != require<std::uint64_t>(ens, "draw_counter", "ensembles"))
    throw ValidationError("draw counter does not match the replayed ensembles",
                          "ensembles.draw_counter");
  if (env.direct_ensemble_count() != require<std::size_t>(ens, "direct_paths", "ensembles"))
    throw ValidationError("direct path count does not match the device registry",
                          "ensembles.direct_paths");
  return env;
}

}  // namespace risjam::env
