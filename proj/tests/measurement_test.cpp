#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "risjam/measurement.hpp"
#include "risjam/scenario.hpp"

namespace risjam::meas {
namespace {

env::Environment small_desk(std::uint64_t seed) {
  auto spec = scn::desk_environment();
  spec.ris_elements = 48;
  spec.scatterers = 32;
  return env::Environment::synthesize(spec, seed);
}

TEST(ElementSubset, AllIsIdentity) {
  const auto s = ElementSubset::all(12);
  EXPECT_EQ(s.size(), 12u);
  const auto c = ris::random_config(12, 4);
  EXPECT_EQ(s.expand(c), c);
}

TEST(ElementSubset, RandomSubsetIsSortedAndFreezesTheRest) {
  const auto s = ElementSubset::random(100, 30, 9);
  ASSERT_EQ(s.size(), 30u);
  EXPECT_TRUE(std::is_sorted(s.active.begin(), s.active.end()));
  EXPECT_EQ(std::adjacent_find(s.active.begin(), s.active.end()), s.active.end());
  const auto full = s.expand(ris::RisConfig(30));
  std::size_t frozen_same = 0;
  for (std::size_t l = 0; l < 100; ++l) {
    const bool active = std::binary_search(s.active.begin(), s.active.end(), l);
    if (active) EXPECT_FALSE(full.bit(l));
    else frozen_same += full.bit(l) == s.base.bit(l);
  }
  EXPECT_EQ(frozen_same, 70u);
  EXPECT_THROW(ElementSubset::random(10, 11, 1), ValidationError);
  EXPECT_THROW(s.expand(ris::RisConfig(29)), std::invalid_argument);
}

TEST(ChannelView, CompositeMatchesFullComposition) {
  const auto env = small_desk(3);
  const auto subset = ElementSubset::random(env.ris_elements(), 20, 5);
  const std::vector<std::string> devices{"D1", "D4", "D0"};
  const ChannelView view(env, devices, subset);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto active = ris::random_config(20, s);
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const auto d = env.device_index(devices[i]);
      const auto h = env.ris_subchannels(env.device(d).position, {d});
      const auto expected = ris::compose_channel(subset.expand(active), h);
      EXPECT_NEAR(std::abs(view.composite(i, active) - expected), 0.0, 1e-9 * std::abs(expected));
    }
  }
}

TEST(RssiOracle, ExactPowersFollowTheLinkBudget) {
  const auto env = small_desk(4);
  OracleOptions o;
  o.sigma_db = 0;
  o.quantize = false;
  RssiOracle oracle(env, {"D1"}, {"D2", "D0"}, o, 1, ElementSubset::all(env.ris_elements()));
  const auto c = ris::random_config(env.ris_elements(), 2);
  const auto exact = oracle.exact_dbm(c);
  const auto d1 = env.device_index("D1");
  const double expected = 15.0 - 45.0 + power_db(ris::compose_channel(c, env.ris_subchannels(env.device(d1).position, {d1})));
  EXPECT_NEAR(exact[0], expected, 1e-9);
  const auto m = oracle.measure(c);
  EXPECT_EQ(m.targets_dbm, std::vector<double>{exact[0]});
  EXPECT_EQ(m.nontargets_dbm, (std::vector<double>{exact[1], exact[2]}));
}

TEST(RssiOracle, QuantizedReadingsAreWholeDecibelsAboveTheFloor) {
  const auto env = small_desk(5);
  RssiOracle oracle(env, {"D1", "D2"}, {"D5"}, {}, 3, ElementSubset::all(env.ris_elements()));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = oracle.measure(ris::random_config(env.ris_elements(), s));
    for (double v : m.targets_dbm) {
      EXPECT_EQ(v, std::round(v));
      EXPECT_GE(v, -95.0);
    }
  }
}

TEST(RssiOracle, OnlyListedDevicesAreReported) {
  const auto env = small_desk(6);
  RssiOracle oracle(env, {"D1"}, {"D0"}, {}, 3, ElementSubset::all(env.ris_elements()));
  const auto m = oracle.callable()(ris::RisConfig(env.ris_elements()));
  EXPECT_EQ(m.targets_dbm.size(), 1u);
  EXPECT_EQ(m.nontargets_dbm.size(), 1u);
  EXPECT_THROW(RssiOracle(env, {}, {"D0"}, {}, 1, ElementSubset::all(env.ris_elements())), ValidationError);
}

}  // namespace
}  // namespace risjam::meas
