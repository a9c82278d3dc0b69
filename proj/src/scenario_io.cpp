#include <algorithm>
#include <cmath>
#include <set>

#include "risjam/json_util.hpp"
#include "risjam/scenario.hpp"

namespace risjam::scn {

namespace {

using nlohmann::json;
using namespace json_util;

struct ModeName {
  Mode mode;
  std::string_view name;
};

constexpr ModeName kModes[] = {
    {Mode::PacketRate, "packet-rate"},
    {Mode::Throughput, "throughput"},
    {Mode::JsrMatrix, "jsr-matrix"},
    {Mode::Heatmap, "heatmap"},
    {Mode::ElementSweep, "element-sweep"},
    {Mode::Displacement, "displacement"},
    {Mode::Exclusion, "exclusion"},
    {Mode::DirectionalBaseline, "directional-baseline"},
    {Mode::Perturbation, "perturbation"},
};

bool single_focus_mode(Mode m) { return m == Mode::Heatmap || m == Mode::ElementSweep; }

bool default_single_target(Mode m) { return single_focus_mode(m) || m == Mode::Perturbation; }

template <class T>
void read(const json& obj, std::string_view key, T& field, const std::string& path) {
  field = get_or<T>(obj, key, field, path);
}

std::vector<std::string> id_list(const json& j, const std::string& path) {
  expect_array(j, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as<std::string>(j[i], index_path(path, i)));
  return out;
}

std::pair<double, double> range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected [min, max]", path);
  return {as<double>(j[0], index_path(path, 0)), as<double>(j[1], index_path(path, 1))};
}

const json& section(const json& doc, std::string_view key, const std::string& path) {
  static const json empty = json::object();
  const auto it = doc.find(key);
  if (it == doc.end()) return empty;
  expect_object(*it, join(path, key));
  return *it;
}

bool on_grid(double lo, double step) {
  const double k = -lo / step;
  return std::abs(k - std::round(k)) < 1e-6;
}

}  // namespace

std::string_view to_string(Mode mode) {
  for (const auto& m : kModes)
    if (m.mode == mode) return m.name;
  return "unknown";
}

const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& m : kModes) v.emplace_back(m.name);
    return v;
  }();
  return names;
}

Mode mode_from_string(std::string_view name) {
  for (const auto& m : kModes)
    if (m.name == name) return m.mode;
  std::string valid;
  for (const auto& m : kModes) valid += (valid.empty() ? "" : ", ") + std::string(m.name);
  throw ValidationError("unknown mode '" + std::string(name) + "'; valid modes: " + valid, "mode");
}

std::vector<double> SweepRange::points() const {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop_dbm - start_dbm) / step_db + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start_dbm + static_cast<double>(i) * step_db);
  return out;
}

env::EnvironmentSpec desk_environment() {
  env::EnvironmentSpec s;
  s.ris_position = {0.6, 0.3, 3.0};
  s.rician_k = 4.0;
  const auto add = [&](const char* id, double x, double y,
                       env::DeviceRole role = env::DeviceRole::Station) {
    s.devices.push_back({id, {x, y, 0.0}, role});
  };
  add("D0", 0.0, 0.0, env::DeviceRole::AccessPoint);
  add("D1", 1.5, 2.0);
  add("D2", 1.8, 2.4);
  add("D3", 1.2, 2.5);
  add("D4", -1.0, -1.5);
  add("D5", -1.4, -1.8);
  add("D6", -0.8, -2.2);
  add("D7", 0.8, 0.6);  // 1 m from the AP
  add("D8", 2.5, -1.0);
  add("D9", 2.8, -1.4);
  add("D10", 2.4, -1.6);
  return s;
}

void validate(ScenarioSpec& spec) {
  if (spec.name.empty()) throw ValidationError("must not be empty", "name");
  try {
    env::validate(spec.environment);
  } catch (const ValidationError& e) {
    throw e.nested("environment");
  }
  const auto& devices = spec.environment.devices;
  const auto find = [&](const std::string& id) {
    return std::find_if(devices.begin(), devices.end(), [&](const auto& d) { return d.id == id; });
  };
  const auto aps = std::count_if(devices.begin(), devices.end(),
                                 [](const auto& d) { return d.role == env::DeviceRole::AccessPoint; });
  if (aps != 1) throw ValidationError("the roster needs exactly one access point", "environment.devices");
  std::vector<std::string> stations;
  for (const auto& d : devices)
    if (d.role == env::DeviceRole::Station) stations.push_back(d.id);
  if (stations.empty()) throw ValidationError("the roster has no stations", "environment.devices");

  const auto check_id = [&](const std::string& id, const std::string& path) {
    const auto it = find(id);
    if (it == devices.end()) throw ValidationError("unknown device '" + id + "'", path);
    return it->role;
  };

  // Target sets.
  if (spec.mode == Mode::Exclusion) {
    if (spec.excluded.empty()) throw ValidationError("exclusion mode needs the excluded device", "excluded");
    if (check_id(spec.excluded, "excluded") != env::DeviceRole::Station)
      throw ValidationError("the excluded device must be a station", "excluded");
    std::vector<std::string> set;
    for (const auto& s : stations)
      if (s != spec.excluded) set.push_back(s);
    if (!spec.target_sets.empty() && spec.target_sets != std::vector<std::vector<std::string>>{set})
      throw ValidationError("exclusion mode derives its targets from 'excluded'", "target_sets");
    spec.target_sets = {set};
  }
  if (spec.target_sets.empty() && spec.mode != Mode::Displacement) {
    if (default_single_target(spec.mode))
      spec.target_sets = {{stations.front()}};
    else
      for (const auto& s : stations) spec.target_sets.push_back({s});
  }
  std::set<std::string> all_targets;
  for (std::size_t k = 0; k < spec.target_sets.size(); ++k) {
    const auto& set = spec.target_sets[k];
    const std::string path = index_path("target_sets", k);
    if (set.empty()) throw ValidationError("a target set must not be empty", path);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::string p = index_path(path, i);
      if (check_id(set[i], p) == env::DeviceRole::AccessPoint)
        throw ValidationError("the access point cannot be a target", p);
      if (!seen.insert(set[i]).second) throw ValidationError("duplicate target '" + set[i] + "'", p);
      all_targets.insert(set[i]);
    }
  }
  if (single_focus_mode(spec.mode) && (spec.target_sets.size() != 1 || spec.target_sets[0].size() != 1))
    throw ValidationError("mode '" + std::string(to_string(spec.mode)) + "' needs exactly one target",
                          "target_sets");

  for (std::size_t i = 0; i < spec.nontargets.size(); ++i) {
    const std::string p = index_path("nontargets", i);
    check_id(spec.nontargets[i], p);
    if (all_targets.count(spec.nontargets[i]))
      throw ValidationError("device '" + spec.nontargets[i] + "' is both target and non-target", p);
  }
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    const std::string p = index_path("hidden", i);
    if (check_id(spec.hidden[i], p) == env::DeviceRole::AccessPoint)
      throw ValidationError("the access point cannot be hidden", p);
    if (!spec.nontargets.empty() &&
        std::find(spec.nontargets.begin(), spec.nontargets.end(), spec.hidden[i]) == spec.nontargets.end())
      throw ValidationError("hidden device '" + spec.hidden[i] + "' is not a non-target", p);
  }

  // Numeric sections.
  const auto& sw = spec.jammer.sweep;
  if (!(sw.step_db > 0.0)) throw ValidationError("must be positive", "jammer.sweep.step_db");
  if (!(sw.stop_dbm >= sw.start_dbm)) throw ValidationError("stop below start", "jammer.sweep.stop_dbm");
  if (!(spec.jammer.margin_db >= 0.0)) throw ValidationError("must be >= 0", "jammer.margin_db");
  if (!(spec.measurement.sigma_db >= 0.0)) throw ValidationError("must be >= 0", "measurement.sigma_db");
  try {
    spec.optimizer.params.validate();
  } catch (const ValidationError& e) {
    throw e.nested("optimizer");
  }
  if (spec.optimizer.steps < 1) throw ValidationError("must be at least 1", "optimizer.steps");
  if (spec.optimizer.runs < 1) throw ValidationError("must be at least 1", "optimizer.runs");
  spec.mcs.validate();
  spec.link.validate();
  if (!(spec.throughput.offered_load_mbps > 0.0))
    throw ValidationError("must be positive", "throughput.offered_load_mbps");
  if (spec.throughput.windows < 2) throw ValidationError("must be at least 2", "throughput.windows");
  if (!(spec.throughput.operational_fraction > 0.0 && spec.throughput.operational_fraction <= 1.0))
    throw ValidationError("must lie in (0, 1]", "throughput.operational_fraction");

  const auto& h = spec.heatmap;
  if (!(h.step_m > 0.0)) throw ValidationError("must be positive", "heatmap.step_m");
  if (!(h.x_min_m <= 0.0 && h.x_max_m >= 0.0 && h.y_min_m <= 0.0 && h.y_max_m >= 0.0) ||
      !on_grid(h.x_min_m, h.step_m) || !on_grid(h.y_min_m, h.step_m))
    throw ValidationError("grid excludes the optimization point", "heatmap");
  if (!(h.exclusion_radius_m >= 0.0)) throw ValidationError("must be >= 0", "heatmap.exclusion_radius_m");

  const auto& ds = spec.displacement;
  if (spec.mode == Mode::Displacement) {
    check_id(ds.device, "displacement.device");
    if (ds.gap_m == 0.0 && spec.environment.pattern_diversity == 0.0)
      throw ValidationError(
          "co-located antennas are indistinguishable without pattern diversity; set a gap or "
          "environment.pattern_diversity",
          "displacement.gap_m");
  }
  if (!(ds.step_m > 0.0)) throw ValidationError("must be positive", "displacement.step_m");
  if (!(ds.max_m >= 0.0)) throw ValidationError("must be >= 0", "displacement.max_m");
  if (!(ds.gap_m >= 0.0)) throw ValidationError("must be >= 0", "displacement.gap_m");

  const auto& es = spec.element_sweep;
  for (std::size_t i = 0; i < es.counts.size(); ++i) {
    const std::string p = index_path("element_sweep.counts", i);
    if (es.counts[i] < 1) throw ValidationError("must be at least 1", p);
    if (spec.mode == Mode::ElementSweep && es.counts[i] > static_cast<std::size_t>(spec.environment.ris_elements))
      throw ValidationError("count exceeds the RIS size", p);
    if (i > 0 && es.counts[i] <= es.counts[i - 1]) throw ValidationError("counts must be ascending", p);
  }
  if (spec.mode == Mode::ElementSweep && es.counts.empty())
    throw ValidationError("needs at least one count", "element_sweep.counts");
  if (es.seeds < 1) throw ValidationError("must be at least 1", "element_sweep.seeds");

  const auto& d = spec.directional;
  if (!(d.beamwidth_deg > 0.0 && d.beamwidth_deg < 360.0))
    throw ValidationError("must lie in (0, 360)", "directional.beamwidth_deg");
  if (!(d.front_to_back_db >= 0.0)) throw ValidationError("must be >= 0", "directional.front_to_back_db");
  if (d.attacker_position) {
    for (const auto& dev : devices)
      if (distance(*d.attacker_position, dev.position) <= kMinDistance)
        throw ValidationError("attacker coincides with device '" + dev.id + "'",
                              "directional.attacker_position");
  }

  double last = -INFINITY;
  for (std::size_t i = 0; i < spec.perturbation.events.size(); ++i) {
    const auto& ev = spec.perturbation.events[i];
    const std::string p = index_path("perturbation.events", i);
    if (!(ev.fraction >= 0.0 && ev.fraction <= 1.0)) throw ValidationError("must lie in [0, 1]", p + ".fraction");
    if (ev.time_s < last) throw ValidationError("events must be ordered in time", p + ".time_s");
    last = ev.time_s;
    if (ev.relocate) check_id(ev.relocate->device, p + ".relocate.device");
  }
}

ScenarioSpec scenario_from_json(const json& doc) {
  expect_object(doc, "");
  reject_unknown_keys(doc,
                      {"name", "mode", "seed", "environment", "targets", "target_sets", "nontargets",
                       "hidden", "excluded", "random_configs", "split_reference", "link_budget",
                       "measurement", "jammer", "optimizer", "mcs_table", "link", "throughput",
                       "heatmap", "displacement", "element_sweep", "directional", "perturbation"},
                      "");
  ScenarioSpec s;
  read(doc, "name", s.name, "");
  s.mode = mode_from_string(require<std::string>(doc, "mode", ""));
  read(doc, "seed", s.seed, "");
  s.environment = doc.contains("environment") ? env::spec_from_json(doc["environment"], "environment")
                                              : desk_environment();

  if (doc.contains("targets") && doc.contains("target_sets"))
    throw ValidationError("give either 'targets' or 'target_sets'", "targets");
  if (doc.contains("targets")) {
    const auto& t = doc["targets"];
    if (t.is_string()) {
      if (t.get<std::string>() != "each") throw ValidationError("expected a list of ids or \"each\"", "targets");
      for (const auto& d : s.environment.devices)
        if (d.role == env::DeviceRole::Station) s.target_sets.push_back({d.id});
    } else {
      s.target_sets = {id_list(t, "targets")};
    }
  }
  if (doc.contains("target_sets")) {
    const auto& t = doc["target_sets"];
    expect_array(t, "target_sets");
    for (std::size_t i = 0; i < t.size(); ++i) s.target_sets.push_back(id_list(t[i], index_path("target_sets", i)));
  }
  if (doc.contains("nontargets")) s.nontargets = id_list(doc["nontargets"], "nontargets");
  if (doc.contains("hidden")) {
    const auto& h = doc["hidden"];
    if (h.is_string()) {
      if (h.get<std::string>() != "all") throw ValidationError("expected a list of ids or \"all\"", "hidden");
      for (const auto& d : s.environment.devices)
        if (d.role == env::DeviceRole::Station) s.hidden.push_back(d.id);
    } else {
      s.hidden = id_list(h, "hidden");
    }
  }
  read(doc, "excluded", s.excluded, "");
  read(doc, "random_configs", s.random_configs, "");
  read(doc, "split_reference", s.split_reference, "");

  {
    const std::string p = "link_budget";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"ap_tx_dbm", "device_tx_dbm", "ris_insertion_loss_db"}, p);
    read(j, "ap_tx_dbm", s.budget.ap_tx_dbm, p);
    read(j, "device_tx_dbm", s.budget.device_tx_dbm, p);
    read(j, "ris_insertion_loss_db", s.budget.ris_insertion_loss_db, p);
  }
  {
    const std::string p = "measurement";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"sigma_db", "quantize"}, p);
    read(j, "sigma_db", s.measurement.sigma_db, p);
    read(j, "quantize", s.measurement.quantize, p);
  }
  {
    const std::string p = "jammer";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"power_dbm", "margin_db", "sweep"}, p);
    if (j.contains("power_dbm")) {
      const auto& v = j["power_dbm"];
      if (v.is_string() && v.get<std::string>() == "auto")
        s.jammer.power_dbm.reset();
      else
        s.jammer.power_dbm = as<double>(v, p + ".power_dbm");
    }
    read(j, "margin_db", s.jammer.margin_db, p);
    const std::string sp = p + ".sweep";
    const auto& w = section(j, "sweep", p);
    reject_unknown_keys(w, {"start_dbm", "stop_dbm", "step_db"}, sp);
    read(w, "start_dbm", s.jammer.sweep.start_dbm, sp);
    read(w, "stop_dbm", s.jammer.sweep.stop_dbm, sp);
    read(w, "step_db", s.jammer.sweep.step_db, sp);
  }
  {
    const std::string p = "optimizer";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"population", "steps", "reeval_period", "exploration_floor", "weights", "runs"}, p);
    auto& o = s.optimizer;
    read(j, "population", o.params.population, p);
    read(j, "steps", o.steps, p);
    read(j, "reeval_period", o.params.reeval_period, p);
    read(j, "exploration_floor", o.params.exploration_floor, p);
    read(j, "runs", o.runs, p);
    const auto& w = section(j, "weights", p);
    reject_unknown_keys(w, {"mean", "extreme"}, p + ".weights");
    read(w, "mean", o.params.weights.mean, p + ".weights");
    read(w, "extreme", o.params.weights.extreme, p + ".weights");
    o.params.empty_nontarget_dbm = s.environment.noise_floor_dbm;
  }
  if (doc.contains("mcs_table")) s.mcs = link::McsTable::from_json(doc["mcs_table"], "mcs_table");
  {
    const std::string p = "link";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"slope_db", "efficiency", "window", "downgrade_below", "upgrade_above", "monitor_mcs"}, p);
    read(j, "slope_db", s.link.slope_db, p);
    read(j, "efficiency", s.link.efficiency, p);
    read(j, "window", s.link.window, p);
    read(j, "downgrade_below", s.link.downgrade_below, p);
    read(j, "upgrade_above", s.link.upgrade_above, p);
    read(j, "monitor_mcs", s.link.monitor_mcs, p);
  }
  {
    const std::string p = "throughput";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"offered_load_mbps", "windows", "operational_fraction"}, p);
    read(j, "offered_load_mbps", s.throughput.offered_load_mbps, p);
    read(j, "windows", s.throughput.windows, p);
    read(j, "operational_fraction", s.throughput.operational_fraction, p);
  }
  {
    const std::string p = "heatmap";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"x_range_m", "y_range_m", "step_m", "exclusion_radius_m"}, p);
    auto& h = s.heatmap;
    if (j.contains("x_range_m")) std::tie(h.x_min_m, h.x_max_m) = range(j["x_range_m"], p + ".x_range_m");
    if (j.contains("y_range_m")) std::tie(h.y_min_m, h.y_max_m) = range(j["y_range_m"], p + ".y_range_m");
    read(j, "step_m", h.step_m, p);
    read(j, "exclusion_radius_m", h.exclusion_radius_m, p);
  }
  {
    const std::string p = "displacement";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"device", "gap_m", "step_m", "max_m"}, p);
    read(j, "device", s.displacement.device, p);
    read(j, "gap_m", s.displacement.gap_m, p);
    read(j, "step_m", s.displacement.step_m, p);
    read(j, "max_m", s.displacement.max_m, p);
  }
  {
    const std::string p = "element_sweep";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"counts", "seeds"}, p);
    if (j.contains("counts")) {
      expect_array(j["counts"], p + ".counts");
      s.element_sweep.counts.clear();
      for (std::size_t i = 0; i < j["counts"].size(); ++i)
        s.element_sweep.counts.push_back(as<std::size_t>(j["counts"][i], index_path(p + ".counts", i)));
    }
    read(j, "seeds", s.element_sweep.seeds, p);
  }
  {
    const std::string p = "directional";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"gain_dbi", "beamwidth_deg", "front_to_back_db", "diffuse_db", "attacker_position"}, p);
    auto& d = s.directional;
    read(j, "gain_dbi", d.gain_dbi, p);
    read(j, "beamwidth_deg", d.beamwidth_deg, p);
    read(j, "front_to_back_db", d.front_to_back_db, p);
    read(j, "diffuse_db", d.diffuse_db, p);
    if (j.contains("attacker_position") && !j["attacker_position"].is_null())
      d.attacker_position = position(j["attacker_position"], p + ".attacker_position");
  }
  {
    const std::string p = "perturbation";
    const auto& j = section(doc, p, "");
    reject_unknown_keys(j, {"events", "reoptimize"}, p);
    read(j, "reoptimize", s.perturbation.reoptimize, p);
    if (j.contains("events")) {
      const auto& evs = j["events"];
      expect_array(evs, p + ".events");
      for (std::size_t i = 0; i < evs.size(); ++i) {
        const std::string ep = index_path(p + ".events", i);
        expect_object(evs[i], ep);
        reject_unknown_keys(evs[i], {"time_s", "fraction", "relocate"}, ep);
        PerturbationEventSpec ev;
        ev.time_s = require<double>(evs[i], "time_s", ep);
        read(evs[i], "fraction", ev.fraction, ep);
        if (evs[i].contains("relocate") && !evs[i]["relocate"].is_null()) {
          const auto& r = evs[i]["relocate"];
          const std::string rp = ep + ".relocate";
          expect_object(r, rp);
          reject_unknown_keys(r, {"device", "position"}, rp);
          if (!r.contains("position")) throw ValidationError("missing position", rp + ".position");
          ev.relocate = Relocation{require<std::string>(r, "device", rp), position(r["position"], rp + ".position")};
        }
        s.perturbation.events.push_back(std::move(ev));
      }
    }
  }
  validate(s);
  return s;
}

json to_json(const ScenarioSpec& s) {
  json target_sets = json::array();
  for (const auto& set : s.target_sets) target_sets.push_back(set);
  json events = json::array();
  for (const auto& ev : s.perturbation.events) {
    json e = {{"time_s", ev.time_s}, {"fraction", ev.fraction}};
    if (ev.relocate)
      e["relocate"] = {{"device", ev.relocate->device}, {"position", json_util::to_json(ev.relocate->position)}};
    events.push_back(std::move(e));
  }
  const auto& o = s.optimizer;
  return {
      {"name", s.name},
      {"mode", std::string(to_string(s.mode))},
      {"seed", s.seed},
      {"environment", env::spec_to_json(s.environment)},
      {"target_sets", target_sets},
      {"nontargets", s.nontargets},
      {"hidden", s.hidden},
      {"excluded", s.excluded},
      {"random_configs", s.random_configs},
      {"split_reference", s.split_reference},
      {"link_budget",
       {{"ap_tx_dbm", s.budget.ap_tx_dbm},
        {"device_tx_dbm", s.budget.device_tx_dbm},
        {"ris_insertion_loss_db", s.budget.ris_insertion_loss_db}}},
      {"measurement", {{"sigma_db", s.measurement.sigma_db}, {"quantize", s.measurement.quantize}}},
      {"jammer",
       {{"power_dbm", s.jammer.power_dbm ? json(*s.jammer.power_dbm) : json("auto")},
        {"margin_db", s.jammer.margin_db},
        {"sweep",
         {{"start_dbm", s.jammer.sweep.start_dbm},
          {"stop_dbm", s.jammer.sweep.stop_dbm},
          {"step_db", s.jammer.sweep.step_db}}}}},
      {"optimizer",
       {{"population", o.params.population},
        {"steps", o.steps},
        {"reeval_period", o.params.reeval_period},
        {"exploration_floor", o.params.exploration_floor},
        {"weights", {{"mean", o.params.weights.mean}, {"extreme", o.params.weights.extreme}}},
        {"runs", o.runs}}},
      {"mcs_table", s.mcs.to_json()},
      {"link",
       {{"slope_db", s.link.slope_db},
        {"efficiency", s.link.efficiency},
        {"window", s.link.window},
        {"downgrade_below", s.link.downgrade_below},
        {"upgrade_above", s.link.upgrade_above},
        {"monitor_mcs", s.link.monitor_mcs}}},
      {"throughput",
       {{"offered_load_mbps", s.throughput.offered_load_mbps},
        {"windows", s.throughput.windows},
        {"operational_fraction", s.throughput.operational_fraction}}},
      {"heatmap",
       {{"x_range_m", {s.heatmap.x_min_m, s.heatmap.x_max_m}},
        {"y_range_m", {s.heatmap.y_min_m, s.heatmap.y_max_m}},
        {"step_m", s.heatmap.step_m},
        {"exclusion_radius_m", s.heatmap.exclusion_radius_m}}},
      {"displacement",
       {{"device", s.displacement.device},
        {"gap_m", s.displacement.gap_m},
        {"step_m", s.displacement.step_m},
        {"max_m", s.displacement.max_m}}},
      {"element_sweep", {{"counts", s.element_sweep.counts}, {"seeds", s.element_sweep.seeds}}},
      {"directional",
       {{"gain_dbi", s.directional.gain_dbi},
        {"beamwidth_deg", s.directional.beamwidth_deg},
        {"front_to_back_db", s.directional.front_to_back_db},
        {"diffuse_db", s.directional.diffuse_db},
        {"attacker_position", s.directional.attacker_position
                                  ? json_util::to_json(*s.directional.attacker_position)
                                  : json(nullptr)}}},
      {"perturbation", {{"events", events}, {"reoptimize", s.perturbation.reoptimize}}},
  };
}

}  // namespace risjam::scn
