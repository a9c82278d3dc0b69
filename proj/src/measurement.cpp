#include "risjam/measurement.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace risjam::meas {

ElementSubset ElementSubset::all(std::size_t length) {
  ElementSubset s{std::vector<std::size_t>(length), ris::RisConfig(length)};
  std::iota(s.active.begin(), s.active.end(), std::size_t{0});
  return s;
}

ElementSubset ElementSubset::random(std::size_t length, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > length)
    throw ValidationError("active element count must lie in 1..L", "element_counts");
  Rng rng(seed);
  std::vector<std::size_t> idx(length);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(length - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return {std::move(idx), ris::random_config(length, rng.next_u64())};
}

ris::RisConfig ElementSubset::expand(const ris::RisConfig& active_config) const {
  if (active_config.size() != active.size())
    throw std::invalid_argument("configuration length does not match the active element count");
  ris::RisConfig full = base;
  for (std::size_t i = 0; i < active.size(); ++i) full.set(active[i], active_config.bit(i));
  return full;
}

ChannelView::ChannelView(const env::Environment& env, const std::vector<std::string>& devices,
                         const ElementSubset& subset)
    : active_count_(subset.size()) {
  if (subset.base.size() != env.ris_elements())
    throw std::invalid_argument("element subset does not match RIS size");
  std::vector<bool> is_active(env.ris_elements(), false);
  for (auto l : subset.active) is_active.at(l) = true;
  gains_.reserve(devices.size() * active_count_);
  for (const auto& id : devices) {
    const auto rx = env.receiver(id);
    const auto h = env.ris_subchannels(env.device(rx.device).position, rx);
    ComplexGain frozen{};
    for (std::size_t l = 0; l < h.size(); ++l)
      if (!is_active[l]) frozen += subset.base.coefficient(l) * h[l];
    for (auto l : subset.active) gains_.push_back(h[l]);
    frozen_.push_back(frozen);
  }
}

ComplexGain ChannelView::composite(std::size_t i, const ris::RisConfig& active_config) const {
  if (active_config.size() != active_count_)
    throw std::invalid_argument("configuration length does not match the active element count");
  const ComplexGain* h = gains_.data() + i * active_count_;
  const auto bits = active_config.bits();
  // Coefficients are +1 for bit 0 and -1 for bit 1.
  ComplexGain plus{}, minus{};
  for (std::size_t l = 0; l < active_count_; ++l) (bits[l] ? minus : plus) += h[l];
  return frozen_.at(i) + plus - minus;
}

RssiOracle::RssiOracle(const env::Environment& env, const std::vector<std::string>& targets,
                       const std::vector<std::string>& nontargets, const OracleOptions& options,
                       std::uint64_t seed, const ElementSubset& subset)
    : view_(env,
            [&] {
              auto all = targets;
              all.insert(all.end(), nontargets.begin(), nontargets.end());
              return all;
            }(),
            subset),
      targets_(targets.size()),
      options_(options),
      noise_floor_dbm_(env.spec().noise_floor_dbm),
      rng_(seed) {
  if (targets.empty()) throw ValidationError("the oracle needs at least one target", "targets");
}

std::vector<double> RssiOracle::exact_dbm(const ris::RisConfig& c) const {
  std::vector<double> out(view_.device_count());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = options_.tx_power_dbm - options_.coupling_loss_db + power_db(view_.composite(i, c));
  return out;
}

opt::Measurement RssiOracle::measure(const ris::RisConfig& c) {
  auto values = exact_dbm(c);
  if (options_.quantize)
    for (auto& v : values) v = env::received_rssi(v, noise_floor_dbm_, options_.sigma_db, rng_);
  else if (options_.sigma_db > 0.0)
    for (auto& v : values) v += rng_.normal(0.0, options_.sigma_db);
  opt::Measurement m;
  m.targets_dbm.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(targets_));
  m.nontargets_dbm.assign(values.begin() + static_cast<std::ptrdiff_t>(targets_), values.end());
  return m;
}

opt::MeasurementOracle RssiOracle::callable() {
  return [this](const ris::RisConfig& c) { return measure(c); };
}

}  // namespace risjam::meas
