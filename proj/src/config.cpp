#include "heatsheet/config.hpp"

#include <fstream>

#include "heatsheet/errors.hpp"

namespace heatsheet {

namespace {

using nlohmann::json;

const json* find_path(const json& j, const std::string& dotted) {
  const json* cur = &j;
  std::size_t pos = 0;
  while (pos < dotted.size()) {
    const std::size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (cur->is_object() && cur->contains(key)) {
      cur = &(*cur)[key];
    } else if (cur->is_array()) {
      try {
        const std::size_t idx = std::stoul(key);
        if (idx >= cur->size()) return nullptr;
        cur = &(*cur)[idx];
      } catch (...) {
        return nullptr;
      }
    } else {
      return nullptr;
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return cur;
}

template <class T>
T get_or(const json& j, const std::string& dotted, T fallback) {
  const json* v = find_path(j, dotted);
  if (v == nullptr || v->is_null()) return fallback;
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + dotted + "' has the wrong type");
  }
}

Vec get_vec(const json& j, const std::string& dotted) {
  const json* v = find_path(j, dotted);
  if (v == nullptr || !v->is_array()) {
    throw ConfigError("config field '" + dotted + "' must be an array of numbers");
  }
  Vec out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError("config field '" + dotted + "' must be numeric");
    out.push_back(e.get<double>());
  }
  return out;
}

void require_range(double v, double lo, double hi, const std::string& field) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError("config field '" + field + "' = " + std::to_string(v) +
                      " outside valid range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
}

} // namespace

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + kv + "' must have the form key.path=value");
    }
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw; // plain string
    }
    json* cur = &config;
    std::size_t pos = 0;
    while (true) {
      const std::size_t dot = path.find('.', pos);
      const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (key.empty()) throw ConfigError("override '" + kv + "' has an empty path segment");
      if (dot == std::string::npos) {
        (*cur)[key] = value;
        break;
      }
      cur = &(*cur)[key];
      pos = dot + 1;
    }
  }
}

TargetSet target_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("config field '" + path + "' must be an object with a 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  try {
    if (type == "ball") {
      return TargetSet::ball(j.at("center").get<Vec>(), j.at("radius").get<double>());
    }
    if (type == "box") {
      return TargetSet::box(j.at("lo").get<Vec>(), j.at("hi").get<Vec>());
    }
    if (type == "point_cloud") {
      return TargetSet::point_cloud(j.at("points").get<std::vector<Vec>>(),
                                    j.at("tolerance").get<double>());
    }
    if (type == "union") {
      std::vector<TargetSet> members;
      for (std::size_t i = 0; i < j.at("members").size(); ++i) {
        members.push_back(target_from_json(j["members"][i], path + ".members." + std::to_string(i)));
      }
      return TargetSet::union_of(std::move(members));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field '" + path + "': " + e.what());
  }
  throw ConfigError("config field '" + path + ".type' must be ball|box|point_cloud|union");
}

nlohmann::json target_to_json(const TargetSet& t) {
  json j;
  switch (t.kind()) {
    case TargetSet::Kind::Ball:
      j["type"] = "ball";
      j["center"] = t.ball_center();
      j["radius"] = t.ball_radius();
      break;
    case TargetSet::Kind::Box:
      j["type"] = "box";
      j["lo"] = t.box_lo();
      j["hi"] = t.box_hi();
      break;
    case TargetSet::Kind::PointCloud:
      j["type"] = "point_cloud";
      j["points"] = t.cloud_points();
      j["tolerance"] = t.cloud_tolerance();
      break;
    case TargetSet::Kind::Union: {
      j["type"] = "union";
      j["members"] = json::array();
      for (const TargetSet& m : t.members()) j["members"].push_back(target_to_json(m));
      break;
    }
  }
  return j;
}

Potential potential_from_json(const nlohmann::json& j, const std::string& path) {
  const std::string family = j.is_object() ? j.value("family", "zero") : "zero";
  if (family == "zero") {
    return Potential::zero(j.is_object() ? j.value("d", 1) : 1);
  }
  if (family == "cosine") {
    if (!j.contains("amplitudes")) {
      throw ConfigError("config field '" + path + ".amplitudes' is required for cosine");
    }
    return Potential::cosine(j["amplitudes"].get<Vec>());
  }
  if (family == "bump_table") {
    try {
      return Potential::bump_table(j.at("centers").get<std::vector<Vec>>(),
                                   j.at("amplitudes").get<Vec>(), j.at("widths").get<Vec>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config field '" + path + "': " + e.what());
    }
  }
  throw ConfigError("config field '" + path + ".family' must be zero|cosine|bump_table");
}

RunConfig parse_run_config(const std::string& subcommand, const nlohmann::json& config) {
  RunConfig rc;
  rc.subcommand = subcommand;

  ExperimentConfig& e = rc.experiment;
  e.d = get_or<int>(config, "d", 1);
  require_range(e.d, 1, 16, "d");

  const json* pot = find_path(config, "potential");
  if (pot != nullptr && !pot->is_null()) {
    rc.experiment.potential = potential_from_json(*pot, "potential");
    rc.potential_json = *pot;
  } else {
    rc.experiment.potential = Potential::zero(e.d);
    rc.potential_json = {{"family", "zero"}};
  }
  if (rc.experiment.potential.family() == PotentialFamily::Zero &&
      rc.experiment.potential.dimension() != e.d) {
    rc.experiment.potential = Potential::zero(e.d); // pick up dimension
  }
  if (rc.experiment.potential.dimension() != e.d) {
    throw ConfigError("config field 'potential' dimension does not match 'd'");
  }

  const std::string u0_kind = get_or<std::string>(config, "u0.kind", "zero");
  if (u0_kind == "zero") {
    e.u0.kind = U0Spec::Kind::Zero;
  } else if (u0_kind == "sine") {
    e.u0.kind = U0Spec::Kind::Sine;
    e.u0.amplitudes = get_vec(config, "u0.amplitudes");
  } else if (u0_kind == "parabola") {
    e.u0.kind = U0Spec::Kind::Parabola;
    e.u0.amplitudes = get_vec(config, "u0.amplitudes");
  } else {
    throw ConfigError("config field 'u0.kind' must be zero|sine|parabola");
  }
  if (e.u0.kind != U0Spec::Kind::Zero &&
      static_cast<int>(e.u0.amplitudes.size()) != e.d) {
    throw ConfigError("config field 'u0.amplitudes' must have d entries");
  }

  e.inner_n = get_or<double>(config, "radii.inner_n", 1.0);
  e.outer_k = get_or<double>(config, "radii.outer_k", 1.5);
  e.box_m = get_or<double>(config, "box_m", 2.0);
  require_range(e.inner_n, 1e-6, 1e6, "radii.inner_n");
  require_range(e.outer_k, 1e-6, 1e6, "radii.outer_k");
  require_range(e.box_m, 1e-6, 1e6, "box_m");

  e.window.t0 = get_or<double>(config, "window.t0", 1.0);
  e.window.t1 = get_or<double>(config, "window.t1", 2.0);
  e.window.x0 = get_or<double>(config, "window.x0", 0.2);
  e.window.x1 = get_or<double>(config, "window.x1", 0.8);
  if (!(e.window.t0 >= 0.0 && e.window.t1 > e.window.t0)) {
    throw ConfigError("config fields 'window.t0' < 'window.t1' required, t0 >= 0");
  }
  if (!(e.window.x0 >= 0.0 && e.window.x1 > e.window.x0 && e.window.x1 <= 1.0)) {
    throw ConfigError("config fields 'window.x0' < 'window.x1' must lie in [0,1]");
  }

  e.horizon = get_or<double>(config, "horizon", 50.0);
  require_range(e.horizon, 1e-3, 1e7, "horizon");
  e.dt = get_or<double>(config, "dt", 1e-3);
  if (!(e.dt > 0.0 && e.dt <= 1e-2)) {
    throw ConfigError("config field 'dt' must lie in (0, 1e-2]");
  }
  e.n_x = get_or<int>(config, "n_x", 128);
  require_range(e.n_x, 2, 65536, "n_x");
  if (e.n_x % 2 != 0) throw ConfigError("config field 'n_x' must be even (Simpson projection)");
  e.k_max = get_or<int>(config, "k_max", 128);
  require_range(e.k_max, 1, 65536, "k_max");
  e.t_min = get_or<double>(config, "t_min", 1e-3);
  e.n_trials = get_or<std::int64_t>(config, "n_trials", 2000);
  require_range(static_cast<double>(e.n_trials), 1, 1e9, "n_trials");
  e.master_seed = get_or<std::uint64_t>(config, "seed", 20260809ull);
  e.workers = get_or<int>(config, "workers", 1);
  require_range(e.workers, 1, 256, "workers");
  e.holder_epsilon = get_or<double>(config, "holder_epsilon", 0.1);
  e.max_excursions = get_or<int>(config, "hit.max_excursions", 20);
  require_range(e.max_excursions, 1, 100000, "hit.max_excursions");
  e.capacity_m = get_or<int>(config, "capacity.m", 500);
  require_range(e.capacity_m, 1, 20000, "capacity.m");

  const json* target = find_path(config, "target");
  if (target != nullptr && !target->is_null()) {
    rc.target = target_from_json(*target, "target");
    rc.has_target = true;
  }

  rc.hit.mode = get_or<std::string>(config, "hit.mode", "window");
  if (rc.hit.mode != "window" && rc.hit.mode != "restart") {
    throw ConfigError("config field 'hit.mode' must be window|restart");
  }

  rc.capacity.beta = get_or<double>(config, "capacity.beta", static_cast<double>(e.d) - 6.0);
  rc.capacity.m = e.capacity_m;

  const std::string imode = get_or<std::string>(config, "invariant.mode", "standard");
  if (imode == "standard") {
    rc.invariant.mode = BridgeMode::Standard;
  } else if (imode == "stationary") {
    rc.invariant.mode = BridgeMode::Stationary;
  } else {
    throw ConfigError("config field 'invariant.mode' must be standard|stationary");
  }
  rc.invariant.n_samples = get_or<int>(config, "invariant.n_samples", 10000);
  require_range(rc.invariant.n_samples, 1, 100000000, "invariant.n_samples");
  rc.invariant.ball_radius = get_or<double>(config, "invariant.ball_radius", 1.0);
  require_range(rc.invariant.ball_radius, 1e-9, 1e9, "invariant.ball_radius");
  rc.invariant.t1 = get_or<double>(config, "invariant.t1", 5.0);
  rc.invariant.t2 = get_or<double>(config, "invariant.t2", 10.0);
  rc.invariant.run_ergodic = get_or<bool>(config, "invariant.run_ergodic", false);
  rc.invariant.ergodic_n = get_or<int>(config, "invariant.ergodic_n", 2000);
  if (!(rc.invariant.t1 > 0.0 && rc.invariant.t2 >= rc.invariant.t1)) {
    throw ConfigError("config fields 'invariant.t1' <= 'invariant.t2', t1 > 0 required");
  }

  rc.output.dir = get_or<std::string>(config, "output.dir", "out");
  rc.output.write_csv = get_or<bool>(config, "output.write_csv", true);
  rc.output.dump_paths = get_or<bool>(config, "output.dump_paths", false);

  // Constructing the truncation validates the (k_max, t_min) pair.
  (void)e.truncation();

  return rc;
}

nlohmann::json config_echo(const RunConfig& rc) {
  const ExperimentConfig& e = rc.experiment;
  json j;
  j["d"] = e.d;
  j["potential"] = rc.potential_json;
  switch (e.u0.kind) {
    case U0Spec::Kind::Zero:
      j["u0"] = {{"kind", "zero"}};
      break;
    case U0Spec::Kind::Sine:
      j["u0"] = {{"kind", "sine"}, {"amplitudes", e.u0.amplitudes}};
      break;
    case U0Spec::Kind::Parabola:
      j["u0"] = {{"kind", "parabola"}, {"amplitudes", e.u0.amplitudes}};
      break;
  }
  j["radii"] = {{"inner_n", e.inner_n}, {"outer_k", e.outer_k}};
  j["box_m"] = e.box_m;
  j["window"] = {{"t0", e.window.t0}, {"t1", e.window.t1}, {"x0", e.window.x0}, {"x1", e.window.x1}};
  j["horizon"] = e.horizon;
  j["dt"] = e.dt;
  j["n_x"] = e.n_x;
  j["k_max"] = e.k_max;
  j["t_min"] = e.t_min;
  j["n_trials"] = e.n_trials;
  j["seed"] = e.master_seed;
  j["workers"] = e.workers;
  j["holder_epsilon"] = e.holder_epsilon;
  if (rc.has_target) j["target"] = target_to_json(rc.target);
  j["hit"] = {{"mode", rc.hit.mode}, {"max_excursions", e.max_excursions}};
  j["capacity"] = {{"beta", rc.capacity.beta}, {"m", rc.capacity.m}};
  j["invariant"] = {{"mode", bridge_mode_name(rc.invariant.mode)},
                    {"n_samples", rc.invariant.n_samples},
                    {"ball_radius", rc.invariant.ball_radius},
                    {"t1", rc.invariant.t1},
                    {"t2", rc.invariant.t2},
                    {"run_ergodic", rc.invariant.run_ergodic},
                    {"ergodic_n", rc.invariant.ergodic_n}};
  j["output"] = {{"dir", rc.output.dir},
                 {"write_csv", rc.output.write_csv},
                 {"dump_paths", rc.output.dump_paths}};
  return j;
}

} // namespace heatsheet
