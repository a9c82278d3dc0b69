// Randomized checks of module invariants, 1000 cases each.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "risjam/channel_env.hpp"
#include "risjam/link_model.hpp"
#include "risjam/measurement.hpp"
#include "risjam/optimizer.hpp"
#include "risjam/ris.hpp"
#include "risjam/run_output.hpp"
#include "risjam/scenario.hpp"
#include "test_support.hpp"

namespace risjam {
namespace {

constexpr int kCases = 1000;

Position random_position(Rng& rng, double half_width) {
  return {rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width), rng.uniform(0.0, 1.5)};
}

env::EnvironmentSpec random_spec(Rng& rng) {
  env::EnvironmentSpec s;
  s.carrier_frequency_hz = rng.uniform(2.0e9, 6.0e9);
  s.path_loss_exponent = rng.uniform(1.8, 3.0);
  s.scatterers = 16 + static_cast<int>(rng.below(48));
  s.ris_elements = 1 + static_cast<int>(rng.below(24));
  s.ris_position = {0, 0, 3};
  s.rician_k = rng.bernoulli(0.5) ? rng.uniform(0, 8) : 0.0;
  s.pattern_diversity = rng.bernoulli(0.5) ? rng.uniform(0, 1) : 0.0;
  s.devices.push_back({"AP", {0, 0, 0}, env::DeviceRole::AccessPoint});
  const auto n = 1 + rng.below(5);
  for (std::uint64_t i = 0; i < n; ++i)
    s.devices.push_back({"S" + std::to_string(i), random_position(rng, 3.0), env::DeviceRole::Station});
  return s;
}

std::vector<ComplexGain> random_gains(Rng& rng, std::size_t n) {
  std::vector<ComplexGain> h(n);
  for (auto& x : h) x = {rng.normal(), rng.normal()};
  return h;
}

// ---------------------------------------------------------------- channel

TEST(ChannelProperties, ReciprocityOfTheEavesdroppedPath) {
  Rng rng(1);
  for (int c = 0; c < kCases; ++c) {
    const auto env = env::Environment::synthesize(random_spec(rng), rng.next_u64());
    const auto d = 1 + rng.below(env.device_count() - 1);
    const auto& id = env.device(d).id;
    const auto config = ris::random_config(env.ris_elements(), rng.next_u64());
    // Uplink as the attacker measures it and downlink as the jammer uses it.
    const meas::ChannelView uplink(env, {id}, meas::ElementSubset::all(env.ris_elements()));
    const ComplexGain down = ris::compose_channel(config, env.ris_subchannels(env.device(d).position, {d}));
    ASSERT_NEAR(std::abs(uplink.composite(0, config) - down), 0.0, 1e-12 * std::abs(down)) << "case " << c;
  }
}

TEST(ChannelProperties, EnergyLaw) {
  // Per position the ensemble mean over 768 paths carries sampling error of
  // about 1/sqrt(768); the pooled mean must sit within 5%.
  const auto env = env::Environment::synthesize(scn::desk_environment(), 42);
  Rng rng(2);
  double pooled = 0;
  const double bound = 4.0 / std::sqrt(static_cast<double>(env.ris_elements()));
  for (int c = 0; c < kCases; ++c) {
    const Position p = random_position(rng, 3.0);
    const auto h = env.ris_subchannels(p);
    double mean = 0;
    for (const auto& x : h) mean += std::norm(x);
    mean /= static_cast<double>(h.size());
    const double ratio = mean / env.path_loss(distance(env.spec().ris_position, p));
    ASSERT_NEAR(ratio, 1.0, bound) << "case " << c;
    pooled += ratio / kCases;
  }
  EXPECT_NEAR(pooled, 1.0, 0.05);
}

TEST(ChannelProperties, DeterministicSerialization) {
  Rng rng(3);
  for (int c = 0; c < kCases; ++c) {
    const auto spec = random_spec(rng);
    const auto seed = rng.next_u64();
    const auto a = to_json(env::Environment::synthesize(spec, seed)).dump();
    const auto b = to_json(env::Environment::synthesize(spec, seed)).dump();
    ASSERT_EQ(a, b) << "case " << c;
  }
}

TEST(ChannelProperties, PerturbationIsDeterministicAndZeroIsIdentity) {
  Rng rng(4);
  for (int c = 0; c < kCases; ++c) {
    const auto env = env::Environment::synthesize(random_spec(rng), rng.next_u64());
    const auto seed = rng.next_u64();
    const double rho = rng.uniform();
    ASSERT_TRUE(env.perturb(rho, seed) == env.perturb(rho, seed));
    const auto same = env.perturb(0.0, seed);
    const Position p = random_position(rng, 2.0);
    for (std::size_t l = 0; l < env.ris_elements(); ++l) ASSERT_EQ(same.ris_subchannel(l, p), env.ris_subchannel(l, p));
  }
}

// ------------------------------------------------------------------- RIS

TEST(RisProperties, Linearity) {
  Rng rng(5);
  for (int c = 0; c < kCases; ++c) {
    const auto n = 1 + rng.below(64);
    const auto h = random_gains(rng, n);
    const ComplexGain alpha{rng.normal(), rng.normal()};
    std::vector<ComplexGain> scaled(h);
    for (auto& x : scaled) x *= alpha;
    const auto cfg = ris::random_config(n, rng.next_u64());
    const auto lhs = ris::compose_channel(cfg, scaled), rhs = alpha * ris::compose_channel(cfg, h);
    ASSERT_LE(std::abs(lhs - rhs), 1e-12 * (1 + std::abs(rhs)) * static_cast<double>(n)) << "case " << c;
  }
}

TEST(RisProperties, SingleFlipMovesTheSumByTwiceTheElement) {
  Rng rng(6);
  for (int c = 0; c < kCases; ++c) {
    const auto n = 1 + rng.below(64);
    const auto h = random_gains(rng, n);
    auto cfg = ris::random_config(n, rng.next_u64());
    const auto l = rng.below(n);
    const auto before = ris::compose_channel(cfg, h);
    const double sign = cfg.coefficient(l);
    cfg.flip(l);
    const auto delta = ris::compose_channel(cfg, h) - before;
    ASSERT_NEAR(std::abs(delta - (-2.0 * sign * h[l])), 0.0, 1e-12 * (1 + std::abs(before)) * static_cast<double>(n));
  }
}

TEST(RisProperties, TriangleBoundTightWhenAligned) {
  Rng rng(7);
  for (int c = 0; c < kCases; ++c) {
    const auto n = 1 + rng.below(64);
    auto h = random_gains(rng, n);
    double bound = 0;
    for (const auto& x : h) bound += std::abs(x);
    const auto cfg = ris::random_config(n, rng.next_u64());
    ASSERT_LE(std::abs(ris::compose_channel(cfg, h)), bound * (1 + 1e-12));
    // Collinear sub-channels with random signs: the matching pattern attains the bound.
    const double phase = rng.uniform(0, 6.28);
    ris::RisConfig align(n);
    for (std::size_t l = 0; l < n; ++l) {
      const bool flip = rng.bernoulli(0.5);
      h[l] = std::polar(std::abs(h[l]) * (flip ? -1.0 : 1.0), phase);
      align.set(l, flip);
    }
    ASSERT_NEAR(std::abs(ris::compose_channel(align, h)), bound, 1e-9 * bound);
  }
}

TEST(RisProperties, HexRoundTrip) {
  Rng rng(8);
  for (int c = 0; c < kCases; ++c) {
    const auto n = 1 + rng.below(1000);
    const auto cfg = ris::random_config(n, rng.next_u64());
    ASSERT_EQ(ris::RisConfig::from_hex(cfg.to_hex(), n), cfg);
    ASSERT_EQ(ris::RisConfig::from_bit_string(cfg.to_bit_string()), cfg);
    ASSERT_EQ(ris::hamming_distance(cfg, cfg.complement()), n);
  }
}

// ------------------------------------------------------------- optimizer

opt::MeasurementOracle noisy_oracle(std::vector<ComplexGain> t, std::vector<ComplexGain> n, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [t = std::move(t), n = std::move(n), rng](const ris::RisConfig& c) {
    const auto l = c.size();
    opt::Measurement m;
    m.targets_dbm.push_back(std::round(power_db(ris::compose_channel(c, std::span(t).first(l))) + rng->normal(0, 0.5)));
    m.nontargets_dbm.push_back(std::round(power_db(ris::compose_channel(c, std::span(n).first(l))) + rng->normal(0, 0.5)));
    return m;
  };
}

TEST(OptimizerProperties, WorstEntryNeverDropsOutsideReevaluation) {
  Rng rng(9);
  for (int c = 0; c < kCases; ++c) {
    const auto len = 1 + rng.below(40);
    opt::OptimizerParams p;
    p.population = 2 + rng.below(20);
    p.reeval_period = rng.below(15);
    const auto oracle = noisy_oracle(random_gains(rng, len), random_gains(rng, len), rng.next_u64());
    auto state = opt::optimizer_init(p, len, oracle, rng.next_u64());
    for (int s = 0; s < 30; ++s) {
      const double worst = state.worst().cost;
      state.step(oracle);
      if (!state.last_step_reevaluated()) {
        ASSERT_GE(state.worst().cost, worst) << "case " << c;
      }
      ASSERT_TRUE(std::is_sorted(state.table().begin(), state.table().end(),
                                 [](const auto& a, const auto& b) { return a.cost > b.cost; }));
      ASSERT_EQ(state.table().size(), p.population);
    }
  }
}

TEST(OptimizerProperties, OffsetInvariance) {
  Rng rng(10);
  for (int c = 0; c < kCases; ++c) {
    const auto draw = [&](std::size_t n) {
      std::vector<double> v(n);
      for (auto& x : v) x = rng.uniform(-95, -30);
      return v;
    };
    const auto t1 = draw(1 + rng.below(5)), n1 = draw(rng.below(5) + 1);
    const auto t2 = draw(t1.size()), n2 = draw(n1.size());
    const double offset = rng.uniform(-40, 40);
    const auto shift = [&](std::vector<double> v) {
      for (auto& x : v) x += offset;
      return v;
    };
    const double a = opt::aggregate_cost(t1, n1), b = opt::aggregate_cost(t2, n2);
    const double as = opt::aggregate_cost(shift(t1), shift(n1)), bs = opt::aggregate_cost(shift(t2), shift(n2));
    ASSERT_NEAR(opt::cost_to_db(as), opt::cost_to_db(a), 1e-9);
    ASSERT_NEAR(opt::cost_to_db(bs), opt::cost_to_db(b), 1e-9);
    if (std::abs(opt::cost_to_db(a) - opt::cost_to_db(b)) > 1e-6) {
      ASSERT_EQ(a < b, as < bs);
    }
  }
}

TEST(OptimizerProperties, ExplorationFloorBoundsEveryProbability) {
  Rng rng(11);
  for (int c = 0; c < kCases; ++c) {
    const auto len = 1 + rng.below(64);
    opt::OptimizerParams p;
    p.population = 2 + rng.below(30);
    p.exploration_floor = rng.uniform(0.001, 0.49);
    const auto oracle = noisy_oracle(random_gains(rng, len), random_gains(rng, len), rng.next_u64());
    auto state = opt::optimizer_init(p, len, oracle, rng.next_u64());
    const auto steps = rng.below(50);
    for (std::uint64_t s = 0; s < steps; ++s) state.step(oracle);
    for (double q : state.element_probabilities()) {
      ASSERT_GE(q, p.exploration_floor);
      ASSERT_LE(q, 1 - p.exploration_floor);
    }
  }
}

TEST(OptimizerProperties, NoiselessSmallProblemsReachTheOptimum) {
  Rng rng(12);
  int hits = 0;
  for (int c = 0; c < kCases; ++c) {
    const auto len = 2 + rng.below(7);
    const auto t = random_gains(rng, len), n = random_gains(rng, len);
    const opt::MeasurementOracle oracle = [&](const ris::RisConfig& cfg) {
      return opt::Measurement{{power_db(ris::compose_channel(cfg, t))}, {power_db(ris::compose_channel(cfg, n))}};
    };
    opt::OptimizerParams p;
    p.population = 20;
    const auto run = opt::run_optimizer(p, 50u << len, len, oracle, rng.next_u64());
    hits += run.best_cost >= opt::brute_force_best(len, oracle).cost - 1e-9;
  }
  EXPECT_GE(hits, kCases * 9 / 10);
}

// ------------------------------------------------------------------ link

TEST(LinkProperties, JsrAntisymmetry) {
  Rng rng(13);
  for (int c = 0; c < kCases; ++c) {
    const ComplexGain a{rng.normal(), rng.normal()}, b{rng.normal(), rng.normal()};
    const double pa = rng.uniform(-50, 50), pb = rng.uniform(-50, 50);
    ASSERT_NEAR(link::jsr_db(a, b, pa, pb), -link::jsr_db(b, a, pb, pa), 1e-9);
  }
}

TEST(LinkProperties, SjnrMonotonicity) {
  Rng rng(14);
  for (int c = 0; c < kCases; ++c) {
    const double sig = rng.uniform(-100, 0), jam = rng.uniform(-130, 0), noise = rng.uniform(-110, -80);
    const double step = rng.uniform(0.01, 20);
    ASSERT_LE(link::sjnr_db(sig, jam + step, noise), link::sjnr_db(sig, jam, noise));
    ASSERT_GT(link::sjnr_db(sig + step, jam, noise), link::sjnr_db(sig, jam, noise));
  }
}

TEST(LinkProperties, PacketSuccessMonotonicity) {
  Rng rng(15);
  for (int c = 0; c < kCases; ++c) {
    const double s = rng.uniform(-20, 40), step = rng.uniform(0, 10);
    const int mcs = static_cast<int>(rng.below(7));
    ASSERT_LE(link::packet_success_prob(s, mcs), link::packet_success_prob(s + step, mcs));
    ASSERT_GE(link::packet_success_prob(s, mcs), link::packet_success_prob(s, mcs + 1));
  }
}

TEST(LinkProperties, RateAdaptationSettles) {
  Rng rng(16);
  for (int c = 0; c < kCases; ++c) {
    const double sjnr = rng.uniform(-10, 40);
    const auto r = link::simulate_adaptive_link(sjnr, 30, 120, {}, {}, rng);
    const auto tail = std::span(r.mcs_history).subspan(60);
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    ASSERT_LE(*hi - *lo, 1) << "sjnr " << sjnr;
  }
}

TEST(LinkProperties, ThroughputBounds) {
  Rng rng(17);
  const link::McsTable table;
  for (int c = 0; c < kCases; ++c) {
    link::LinkState s;
    s.mcs = static_cast<int>(rng.below(8));
    s.offered_load_mbps = rng.uniform(0.1, 100);
    const double t = link::throughput_mbps(s, rng.uniform(), table, rng.uniform(0.01, 1));
    ASSERT_LE(t, s.offered_load_mbps);
    ASSERT_LE(t, table.rate(s.mcs));
    ASSERT_GE(t, 0.0);
  }
}

// --------------------------------------------------------------- scenario

class HarnessProperties : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { harness_ = new scn::Harness(test::small_scenario(scn::Mode::JsrMatrix)); }
  static void TearDownTestSuite() { delete harness_; }
  static std::vector<std::string> random_targets(Rng& rng) {
    auto st = harness_->stations();
    std::vector<std::string> out;
    const auto k = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < k; ++i) {
      const auto j = rng.below(st.size());
      out.push_back(st[j]);
      st.erase(st.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  }
  static scn::Harness* harness_;
};
scn::Harness* HarnessProperties::harness_ = nullptr;

TEST_F(HarnessProperties, NormalizedJsrDefinition) {
  Rng rng(18);
  const auto& env = harness_->environment();
  for (int c = 0; c < kCases; ++c) {
    const auto targets = random_targets(rng);
    const auto cfg = ris::random_config(env.ris_elements(), rng.next_u64());
    const auto ev = harness_->evaluate(env, targets, cfg, rng.uniform(-20, 40));
    double ref = 1e300;
    for (const auto& d : ev.devices)
      if (std::find(targets.begin(), targets.end(), d.device) != targets.end()) ref = std::min(ref, d.jsr_db);
    for (const auto& d : ev.devices) ASSERT_NEAR(d.normalized_jsr_db, d.jsr_db - ref, 1e-9);
  }
}

TEST_F(HarnessProperties, PacketRateNonIncreasingInJammerPower) {
  Rng rng(19);
  const auto& env = harness_->environment();
  for (int c = 0; c < kCases; ++c) {
    const auto targets = random_targets(rng);
    const auto cfg = ris::random_config(env.ris_elements(), rng.next_u64());
    const double p = rng.uniform(-60, 60);
    const auto low = harness_->evaluate(env, targets, cfg, p);
    const auto high = harness_->evaluate(env, targets, cfg, p + rng.uniform(0, 10));
    for (std::size_t i = 0; i < low.devices.size(); ++i)
      ASSERT_LE(high.devices[i].packet_rate, low.devices[i].packet_rate + 2.0);
  }
}

TEST_F(HarnessProperties, IdenticalSeedsGiveIdenticalResults) {
  Rng rng(20);
  for (int c = 0; c < kCases; ++c) {
    auto spec = test::small_scenario(scn::Mode::JsrMatrix);
    spec.seed = rng.next_u64();
    spec.environment.ris_elements = 16;
    spec.environment.scatterers = 16;
    spec.optimizer.steps = 20;
    spec.optimizer.params.population = 4;
    spec.target_sets = {{"D" + std::to_string(1 + rng.below(10))}};
    spec = test::validated(spec);
    const auto a = scn::run_single_target(spec), b = scn::run_single_target(spec);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      ASSERT_EQ(std::memcmp(&a.rows[i].value, &b.rows[i].value, sizeof(double)), 0) << a.rows[i].metric;
  }
}

TEST_F(HarnessProperties, ReoptimizationAfterRelocationRestoresSeparation) {
  Rng rng(21);
  auto spec = test::small_scenario(scn::Mode::JsrMatrix);
  spec.environment.ris_elements = 128;
  spec.optimizer.steps = 1000;
  const scn::Harness h(spec);
  int restored = 0, counted = 0;
  for (int c = 0; c < kCases; ++c) {
    const auto st = h.stations();
    const std::vector<std::string> targets{st[rng.below(st.size())]};
    const auto nontargets = h.visible_nontargets(targets);
    const auto all = meas::ElementSubset::all(h.environment().ris_elements());
    const auto before = h.optimize(h.environment(), targets, nontargets, all, rng.next_u64());
    const auto sep0 = h.evaluate(h.environment(), targets, before.best, 0.0).separation_db;
    const auto& dev = h.environment().device(h.environment().device_index(targets[0]));
    const Position moved = dev.position + Position{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0};
    const auto env = h.environment().with_device_position(targets[0], moved);
    const auto after = h.optimize(env, targets, nontargets, all, rng.next_u64());
    const auto sep1 = h.evaluate(env, targets, after.best, 0.0).separation_db;
    if (!(sep0 > 0)) continue;
    ++counted;
    restored += sep1 >= 0.8 * sep0;
  }
  ASSERT_GT(counted, kCases / 2);
  RecordProperty("restored", std::to_string(restored) + "/" + std::to_string(counted));
  EXPECT_GE(restored, counted * 9 / 10) << restored << "/" << counted;
}

// ---------------------------------------------------------------- cli-io

nlohmann::json random_scenario_doc(Rng& rng) {
  const auto& modes = scn::mode_names();
  const std::string mode = modes[rng.below(modes.size())];
  nlohmann::json doc = {{"mode", mode}, {"seed", rng.next_u64() >> 12}, {"name", "s" + std::to_string(rng.below(1000))}};
  const bool single = mode == "heatmap" || mode == "element-sweep";
  if (mode == "exclusion") {
    doc["excluded"] = "D" + std::to_string(1 + rng.below(10));
  } else if (mode != "displacement" && rng.bernoulli(0.7)) {
    std::vector<std::string> t{"D" + std::to_string(1 + rng.below(10))};
    if (!single && rng.bernoulli(0.5)) {
      const auto extra = "D" + std::to_string(1 + rng.below(10));
      if (extra != t[0]) t.push_back(extra);
    }
    doc["targets"] = t;
  }
  if (rng.bernoulli(0.5)) doc["optimizer"] = {{"population", 2 + rng.below(200)}, {"steps", 1 + rng.below(20000)}};
  if (rng.bernoulli(0.5)) doc["jammer"] = {{"power_dbm", rng.bernoulli(0.5) ? nlohmann::json("auto") : nlohmann::json(rng.uniform(-10, 30))}};
  if (rng.bernoulli(0.3)) doc["measurement"] = {{"sigma_db", rng.uniform(0, 2)}, {"quantize", rng.bernoulli(0.5)}};
  if (rng.bernoulli(0.3)) doc["link_budget"] = {{"ap_tx_dbm", rng.uniform(0, 30)}};
  if (mode != "heatmap" && mode != "element-sweep" && mode != "displacement" && rng.bernoulli(0.3)) doc["hidden"] = "all";
  if (mode == "displacement") doc["displacement"] = {{"gap_m", rng.uniform(0.001, 0.05)}};
  if (mode == "perturbation" && rng.bernoulli(0.5))
    doc["perturbation"] = {{"events", {{{"time_s", 1.0}, {"fraction", rng.uniform()}}}}, {"reoptimize", rng.bernoulli(0.5)}};
  return doc;
}

// Dumps an object with its keys in a random order.
std::string shuffled_dump(const nlohmann::json& j, Rng& rng) {
  if (!j.is_object()) {
    if (!j.is_array()) return j.dump();
    std::string out = "[";
    for (std::size_t i = 0; i < j.size(); ++i) out += (i ? "," : "") + shuffled_dump(j[i], rng);
    return out + "]";
  }
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[rng.below(i)]);
  std::string out = "{";
  for (std::size_t i = 0; i < keys.size(); ++i)
    out += (i ? "," : "") + nlohmann::json(keys[i]).dump() + ":" + shuffled_dump(j[keys[i]], rng);
  return out + "}";
}

TEST(CliProperties, NormalizedEchoRoundTripsAndHashIgnoresKeyOrder) {
  Rng rng(22);
  for (int c = 0; c < kCases; ++c) {
    const auto doc = random_scenario_doc(rng);
    const auto spec = io::parse_scenario_text(doc.dump());
    const auto echo = scn::to_json(spec);
    ASSERT_EQ(io::parse_scenario_text(echo.dump()), spec) << doc.dump();
    ASSERT_EQ(io::scenario_hash(io::parse_scenario_text(shuffled_dump(doc, rng))), io::scenario_hash(spec));
    ASSERT_EQ(io::scenario_hash(io::parse_scenario_text(shuffled_dump(echo, rng))), io::scenario_hash(spec));
  }
}

}  // namespace
}  // namespace risjam
