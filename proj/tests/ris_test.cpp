#include <gtest/gtest.h>

#include <set>

#include "risjam/ris.hpp"
#include "risjam/rng.hpp"

namespace risjam::ris {
namespace {

TEST(RisConfig, BitZeroIsPlusOne) {
  const auto c = RisConfig::from_bit_string("01");
  EXPECT_EQ(c.coefficient(0), 1.0);
  EXPECT_EQ(c.coefficient(1), -1.0);
}

TEST(RisConfig, HexRoundTrip) {
  for (std::size_t len : {1u, 3u, 4u, 5u, 17u, 768u}) {
    const auto c = random_config(len, len);
    const auto hex = c.to_hex();
    EXPECT_EQ(hex.size(), (len + 3) / 4);
    EXPECT_EQ(RisConfig::from_hex(hex, len), c);
  }
  EXPECT_EQ(RisConfig::from_bit_string("1000").to_hex(), "8");
  EXPECT_EQ(RisConfig::from_bit_string("00011").to_hex(), "18");
}

TEST(RisConfig, RejectsMalformedText) {
  EXPECT_THROW(RisConfig::from_bit_string("012"), std::invalid_argument);
  EXPECT_THROW(RisConfig::from_hex("g", 4), std::invalid_argument);
  EXPECT_THROW(RisConfig::from_hex("ff", 4), std::invalid_argument);
}

TEST(ComposeChannel, CoherentSumAndCancellation) {
  const std::vector<ComplexGain> h{{1, 0}, {1, 0}};
  EXPECT_EQ(compose_channel(RisConfig::from_bit_string("00"), h), ComplexGain(2, 0));
  EXPECT_EQ(compose_channel(RisConfig::from_bit_string("01"), h), ComplexGain(0, 0));
  EXPECT_THROW(compose_channel(RisConfig(3), h), std::invalid_argument);
}

TEST(ComposeChannel, MatchesDirectSummation) {
  Rng rng(4);
  std::vector<ComplexGain> h(8);
  for (auto& x : h) x = {rng.normal(), rng.normal()};
  const auto c = random_config(8, 9);
  ComplexGain expected;
  for (std::size_t l = 0; l < 8; ++l) expected += (c.bit(l) ? -1.0 : 1.0) * h[l];
  EXPECT_LE(std::abs(compose_channel(c, h) - expected), 1e-12 * std::abs(expected));
}

TEST(RandomConfig, DeterministicAndFair) {
  EXPECT_EQ(random_config(768, 1), random_config(768, 1));
  EXPECT_NE(random_config(768, 1), random_config(768, 2));
  const auto one = random_config(1, 5);
  EXPECT_EQ(one.size(), 1u);
  double total = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) total += static_cast<double>(hamming_distance(random_config(768, 2 * s), random_config(768, 2 * s + 1)));
  EXPECT_NEAR(total / 1000, 384.0, 3.0);
}

TEST(HammingDistance, Basics) {
  const auto a = random_config(768, 3);
  EXPECT_EQ(hamming_distance(a, a), 0u);
  EXPECT_EQ(hamming_distance(a, a.complement()), 768u);
  EXPECT_THROW(hamming_distance(a, RisConfig(767)), std::invalid_argument);
}

TEST(EnumerateConfigs, YieldsEveryConfigurationOnce) {
  for (std::size_t len : {2u, 8u, 10u}) {
    std::set<RisConfig> seen;
    for (const auto& c : enumerate_configs(len)) seen.insert(c);
    EXPECT_EQ(seen.size(), std::size_t{1} << len);
  }
  EXPECT_THROW(enumerate_configs(21), std::invalid_argument);
}

TEST(EnumerateConfigs, LexicographicOrder) {
  std::vector<std::string> order;
  for (const auto& c : enumerate_configs(2)) order.push_back(c.to_bit_string());
  EXPECT_EQ(order, (std::vector<std::string>{"00", "01", "10", "11"}));
}

}  // namespace
}  // namespace risjam::ris
