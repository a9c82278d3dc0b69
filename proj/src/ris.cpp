#include "risjam/ris.hpp"

#include <stdexcept>

#include "risjam/rng.hpp"

namespace risjam::ris {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

RisConfig::RisConfig(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_)
    if (b > 1) throw std::invalid_argument("RIS configuration bits must be 0 or 1");
}

RisConfig RisConfig::from_bit_string(std::string_view bits) {
  RisConfig c(bits.size());
  for (std::size_t l = 0; l < bits.size(); ++l) {
    if (bits[l] != '0' && bits[l] != '1')
      throw ValidationError("configuration bit string may only contain 0 and 1");
    c.bits_[l] = bits[l] == '1';
  }
  return c;
}

RisConfig RisConfig::from_hex(std::string_view hex, std::size_t length) {
  if (hex.size() != (length + 3) / 4)
    throw ValidationError("hex configuration has " + std::to_string(hex.size()) +
                          " digits, expected " + std::to_string((length + 3) / 4) + " for " +
                          std::to_string(length) + " elements");
  RisConfig c(length);
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const int v = hex_value(hex[k]);
    if (v < 0) throw ValidationError("invalid hex digit in configuration");
    for (std::size_t b = 0; b < 4; ++b) {
      const bool bit = (v >> (3 - b)) & 1;
      const std::size_t l = 4 * k + b;
      if (l < length)
        c.bits_[l] = bit;
      else if (bit)
        throw ValidationError("hex configuration has bits set beyond its length");
    }
  }
  return c;
}

std::vector<double> RisConfig::coefficients() const {
  std::vector<double> c(bits_.size());
  for (std::size_t l = 0; l < c.size(); ++l) c[l] = coefficient(l);
  return c;
}

std::string RisConfig::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out((bits_.size() + 3) / 4, '0');
  for (std::size_t k = 0; k < out.size(); ++k) {
    int v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t l = 4 * k + b;
      v = (v << 1) | (l < bits_.size() ? bits_[l] : 0);
    }
    out[k] = kDigits[v];
  }
  return out;
}

std::string RisConfig::to_bit_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t l = 0; l < s.size(); ++l) s[l] = bits_[l] ? '1' : '0';
  return s;
}

RisConfig RisConfig::complement() const {
  RisConfig c = *this;
  for (auto& b : c.bits_) b ^= 1;
  return c;
}

ComplexGain compose_channel(const RisConfig& config, std::span<const ComplexGain> subchannels) {
  if (config.size() != subchannels.size())
    throw std::invalid_argument("configuration length " + std::to_string(config.size()) +
                                " does not match " + std::to_string(subchannels.size()) +
                                " sub-channels");
  ComplexGain sum;
  for (std::size_t l = 0; l < subchannels.size(); ++l)
    sum += config.bit(l) ? -subchannels[l] : subchannels[l];
  return sum;
}

RisConfig random_config(std::size_t length, std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("configuration length must be at least 1");
  Rng rng(seed);
  RisConfig c(length);
  for (std::size_t l = 0; l < length; ++l) c.set(l, rng.next_u64() >> 63);
  return c;
}

std::size_t hamming_distance(const RisConfig& a, const RisConfig& b) {
  if (a.size() != b.size()) throw std::invalid_argument("configurations differ in length");
  std::size_t d = 0;
  for (std::size_t l = 0; l < a.size(); ++l) d += a.bit(l) != b.bit(l);
  return d;
}

ConfigEnumeration::ConfigEnumeration(std::size_t length) : length_(length) {
  if (length == 0 || length > kMaxEnumerationLength)
    throw std::invalid_argument("enumeration supports 1 to 20 elements, got " +
                                std::to_string(length));
}

ConfigEnumeration::iterator::iterator(std::size_t length, std::uint64_t index)
    : index_(index), current_(length) {
  for (std::size_t l = 0; l < length; ++l) current_.set(l, (index >> (length - 1 - l)) & 1);
}

ConfigEnumeration::iterator& ConfigEnumeration::iterator::operator++() {
  ++index_;
  // Binary increment with element L-1 as the least significant bit.
  for (std::size_t l = current_.size(); l-- > 0;) {
    current_.flip(l);
    if (current_.bit(l)) break;
  }
  return *this;
}

}  // namespace risjam::ris
