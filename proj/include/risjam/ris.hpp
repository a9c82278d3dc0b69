#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "risjam/types.hpp"

namespace risjam::ris {

/// Binary RIS configuration. Bit 0 selects reflection coefficient +1 and
/// bit 1 selects -1, for every element.
class RisConfig {
 public:
  RisConfig() = default;
  explicit RisConfig(std::size_t length) : bits_(length, 0) {}
  explicit RisConfig(std::vector<std::uint8_t> bits);

  /// Parses "0110..." (one character per element).
  static RisConfig from_bit_string(std::string_view bits);
  /// Inverse of to_hex(); `length` disambiguates the padding of the last digit.
  static RisConfig from_hex(std::string_view hex, std::size_t length);

  std::size_t size() const { return bits_.size(); }
  bool bit(std::size_t l) const { return bits_[l] != 0; }
  void set(std::size_t l, bool v) { bits_[l] = v ? 1 : 0; }
  void flip(std::size_t l) { bits_[l] ^= 1; }
  double coefficient(std::size_t l) const { return bits_[l] ? -1.0 : 1.0; }
  std::vector<double> coefficients() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  /// ceil(L / 4) hex digits; element 4k is the most significant bit of digit k.
  std::string to_hex() const;
  std::string to_bit_string() const;

  RisConfig complement() const;

  auto operator<=>(const RisConfig&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// sum_l h_l * c_l.
ComplexGain compose_channel(const RisConfig& config, std::span<const ComplexGain> subchannels);

RisConfig random_config(std::size_t length, std::uint64_t seed);

std::size_t hamming_distance(const RisConfig& a, const RisConfig& b);

inline constexpr std::size_t kMaxEnumerationLength = 20;

/// All 2^L configurations in lexicographic order of their bit strings.
class ConfigEnumeration {
 public:
  explicit ConfigEnumeration(std::size_t length);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = RisConfig;
    using difference_type = std::ptrdiff_t;
    using pointer = const RisConfig*;
    using reference = const RisConfig&;

    iterator() = default;
    iterator(std::size_t length, std::uint64_t index);
    const RisConfig& operator*() const { return current_; }
    const RisConfig* operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& other) const { return index_ == other.index_; }

   private:
    std::uint64_t index_ = 0;
    RisConfig current_;
  };

  iterator begin() const { return {length_, 0}; }
  iterator end() const { return {length_, count()}; }
  std::uint64_t count() const { return std::uint64_t{1} << length_; }

 private:
  std::size_t length_;
};

inline ConfigEnumeration enumerate_configs(std::size_t length) { return ConfigEnumeration(length); }

}  // namespace risjam::ris
