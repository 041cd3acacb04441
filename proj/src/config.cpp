#include "parkcharge/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace parkcharge {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void read_opt(const json& j, const char* key, std::optional<double>& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<double>();
}

// A per-slot series given either as one number or as a full array.
std::vector<double> series(const json& j, const char* key, int horizon, double fallback) {
  if (!j.contains(key)) return std::vector<double>(horizon, fallback);
  const auto& v = j.at(key);
  if (v.is_number()) return std::vector<double>(horizon, v.get<double>());
  auto out = v.get<std::vector<double>>();
  if (static_cast<int>(out.size()) != horizon)
    throw ConfigError(std::string("facility ") + key + ": expected " + std::to_string(horizon) +
                      " entries");
  return out;
}

Distribution parse_distribution(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "lo", "hi", "mean", "sd", "mean2", "sd2", "weight"});
  Distribution d;
  d.kind = parse_distribution_kind(j.value("kind", std::string("uniform")));
  d.lo = j.at("lo").get<double>();
  d.hi = j.at("hi").get<double>();
  d.mean = j.value("mean", 0.5 * (d.lo + d.hi));
  d.sd = j.value("sd", 1.0);
  d.mean2 = j.value("mean2", d.mean);
  d.sd2 = j.value("sd2", d.sd);
  d.weight = j.value("weight", 0.5);
  return d;
}

json distribution_json(const Distribution& d) {
  json j{{"kind", to_string(d.kind)}, {"lo", d.lo}, {"hi", d.hi}};
  if (d.kind != Distribution::Kind::Uniform) {
    j["mean"] = d.mean;
    j["sd"] = d.sd;
  }
  if (d.kind == Distribution::Kind::Bimodal) {
    j["mean2"] = d.mean2;
    j["sd2"] = d.sd2;
    j["weight"] = d.weight;
  }
  return j;
}

// Longest stay window any generated request can have.
int max_window(const ScenarioParams& p, int horizon) {
  int best = 1;
  for (int a = static_cast<int>(p.arrival.lo); a <= static_cast<int>(p.arrival.hi); ++a)
    for (int s = static_cast<int>(p.stay.lo); s <= static_cast<int>(p.stay.hi); ++s) {
      int dep = std::min(horizon - 1, a + s - 1);
      dep = std::max(dep, std::min(p.departure_min, horizon - 1));
      best = std::max(best, dep - a + 1);
    }
  return best;
}

ExperimentConfig from_json(const json& root) {
  check_keys(root, "config",
             {"schema_version", "name", "grid", "facilities", "scenario", "solar", "bounds",
              "level_max", "forecast", "fcfs", "cec", "oracle", "investment", "verify",
              "demand_levels", "buffer_hours", "threads"});
  ExperimentConfig c;
  if (!root.contains("schema_version")) throw ConfigError("config: schema_version is required");
  c.schema_version = root.at("schema_version").get<int>();
  if (c.schema_version != kConfigSchemaVersion)
    throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
  read(root, "name", c.name);

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    check_keys(g, "grid", {"horizon", "slot_hours"});
    read(g, "horizon", c.system.grid.horizon);
    read(g, "slot_hours", c.system.grid.slot_hours);
  }
  const int horizon = c.system.grid.horizon;
  if (horizon < 1) throw ConfigError("grid: horizon must be >= 1");

  if (!root.contains("facilities") || !root.at("facilities").is_array() ||
      root.at("facilities").empty())
    throw ConfigError("config: at least one facility is required");
  int next_id = 1;
  for (const auto& fj : root.at("facilities")) {
    check_keys(fj, "facility",
               {"id", "evse_count", "cables_per_evse", "evse_max_energy", "solar_rating_kw",
                "transformer_limit", "grid_price"});
    FacilityConfig f;
    f.id = fj.value("id", next_id);
    next_id = f.id + 1;
    read(fj, "evse_count", f.evse_count);
    read(fj, "cables_per_evse", f.cables_per_evse);
    read(fj, "evse_max_energy", f.evse_max_energy);
    read(fj, "solar_rating_kw", f.solar_rating);
    f.transformer_limit = series(fj, "transformer_limit", horizon, 0.0);
    f.grid_price = series(fj, "grid_price", horizon, 0.127);
    f.solar.assign(horizon, 0.0);
    c.system.facilities.push_back(std::move(f));
  }

  auto& p = c.scenario;
  p.arrival = Distribution::uniform(0, horizon - 1);
  if (root.contains("scenario")) {
    const auto& s = root.at("scenario");
    check_keys(s, "scenario",
               {"days", "arrivals_per_day", "arrival", "stay", "energy", "valuation",
                "departure_min", "preferences", "valuation_jitter", "submission_lead"});
    read(s, "days", p.days);
    read(s, "arrivals_per_day", p.arrivals_per_day);
    if (s.contains("arrival")) p.arrival = parse_distribution(s.at("arrival"), "scenario.arrival");
    if (s.contains("stay")) p.stay = parse_distribution(s.at("stay"), "scenario.stay");
    if (s.contains("energy")) p.energy = parse_distribution(s.at("energy"), "scenario.energy");
    if (s.contains("valuation"))
      p.valuation = parse_distribution(s.at("valuation"), "scenario.valuation");
    read(s, "departure_min", p.departure_min);
    if (s.contains("preferences")) {
      const auto& pr = s.at("preferences");
      check_keys(pr, "scenario.preferences", {"min", "max"});
      read(pr, "min", p.preferences_min);
      read(pr, "max", p.preferences_max);
    }
    read(s, "valuation_jitter", p.valuation_jitter);
    read(s, "submission_lead", p.submission_lead);
  }
  if (root.contains("solar")) {
    const auto& s = root.at("solar");
    check_keys(s, "solar", {"sunrise", "sunset", "system_loss", "day_factor"});
    read(s, "sunrise", p.solar.sunrise);
    read(s, "sunset", p.solar.sunset);
    read(s, "system_loss", p.solar.system_loss);
    if (s.contains("day_factor")) {
      auto range = s.at("day_factor").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("solar.day_factor: expected [lo, hi]");
      p.solar.day_factor_lo = range[0];
      p.solar.day_factor_hi = range[1];
    }
  }
  read(root, "level_max", c.levels.max_level);
  p.level_max = c.levels.max_level;

  if (root.contains("bounds")) {
    const auto& b = root.at("bounds");
    check_keys(b, "bounds",
               {"cable_lower", "cable_upper", "energy_lower", "energy_upper", "procurement_lower",
                "procurement_upper"});
    read_opt(b, "cable_lower", c.bounds.cable_lower);
    read_opt(b, "cable_upper", c.bounds.cable_upper);
    read_opt(b, "energy_lower", c.bounds.energy_lower);
    read_opt(b, "energy_upper", c.bounds.energy_upper);
    read_opt(b, "procurement_lower", c.bounds.procurement_lower);
    read_opt(b, "procurement_upper", c.bounds.procurement_upper);
  }
  if (root.contains("forecast")) {
    const auto& f = root.at("forecast");
    check_keys(f, "forecast", {"width_per_slot"});
    read(f, "width_per_slot", c.forecast_width_per_slot);
  }
  if (root.contains("fcfs")) {
    const auto& f = root.at("fcfs");
    check_keys(f, "fcfs", {"partial_value"});
    read(f, "partial_value", c.fcfs.partial_value);
  }
  if (root.contains("cec")) {
    const auto& f = root.at("cec");
    check_keys(f, "cec", {"max_future", "options_per_evse", "option_cap", "node_limit"});
    read(f, "max_future", c.cec.max_future);
    read(f, "options_per_evse", c.cec.options_per_evse);
    read(f, "option_cap", c.cec.option_cap);
    read(f, "node_limit", c.cec.node_limit);
  }
  if (root.contains("oracle")) {
    const auto& f = root.at("oracle");
    check_keys(f, "oracle", {"max_users", "option_cap", "node_limit"});
    read(f, "max_users", c.oracle.max_users);
    read(f, "option_cap", c.oracle.option_cap);
    read(f, "node_limit", c.oracle.node_limit);
  }
  if (root.contains("investment")) {
    const auto& f = root.at("investment");
    check_keys(f, "investment",
               {"per_cable_cost", "per_evse_install", "monthly_maintenance", "months",
                "evse_counts", "cable_counts", "sample_days"});
    read(f, "per_cable_cost", c.investment.per_cable_cost);
    read(f, "per_evse_install", c.investment.per_evse_install);
    read(f, "monthly_maintenance", c.investment.monthly_maintenance);
    read(f, "months", c.investment.months);
    read(f, "evse_counts", c.sweep.evse_counts);
    read(f, "cable_counts", c.sweep.cable_counts);
    read(f, "sample_days", c.sweep.sample_days);
  }
  if (root.contains("verify")) {
    const auto& f = root.at("verify");
    check_keys(f, "verify",
               {"instances", "min_users", "max_users", "max_evse", "max_cables", "max_energy",
                "level_max", "min_horizon", "max_horizon", "facilities", "min_value",
                "max_value", "forecast_width_per_slot"});
    auto& v = c.verify;
    read(f, "instances", v.instances);
    read(f, "min_users", v.min_users);
    read(f, "max_users", v.max_users);
    read(f, "max_evse", v.max_evse);
    read(f, "max_cables", v.max_cables);
    read(f, "max_energy", v.max_energy);
    read(f, "level_max", v.level_max);
    read(f, "min_horizon", v.min_horizon);
    read(f, "max_horizon", v.max_horizon);
    read(f, "facilities", v.facilities);
    read(f, "min_value", v.min_value);
    read(f, "max_value", v.max_value);
    read(f, "forecast_width_per_slot", v.forecast_width_per_slot);
  }
  read(root, "demand_levels", c.demand_levels);
  read(root, "buffer_hours", c.buffer_hours);
  read(root, "threads", c.threads);

  std::vector<std::string> problems = find_violations(c.system);
  auto more = scenario_violations(p, c.system);
  problems.insert(problems.end(), more.begin(), more.end());
  if (c.levels.max_level < 0) problems.push_back("level_max must be >= 0");
  if (c.forecast_width_per_slot < 0) problems.push_back("forecast.width_per_slot must be >= 0");
  const auto& inv = c.investment;
  if (inv.per_cable_cost < 0 || inv.per_evse_install < 0 || inv.monthly_maintenance < 0 ||
      inv.months < 0)
    problems.push_back("investment parameters must be >= 0");
  if (c.sweep.sample_days < 1) problems.push_back("investment.sample_days must be >= 1");
  for (double b : c.buffer_hours)
    if (b < 0) problems.push_back("buffer_hours must be >= 0");
  const auto& v = c.verify;
  if (v.min_users < 1 || v.min_users > v.max_users || v.max_evse < 1 || v.max_cables < 1 ||
      v.max_energy < 1 || v.min_horizon < 1 || v.min_horizon > v.max_horizon ||
      v.facilities < 1 || !(v.min_value > 0) || v.min_value > v.max_value)
    problems.push_back("verify: inconsistent instance caps");
  if (!problems.empty()) {
    std::string msg = "invalid configuration";
    for (const auto& s : problems) msg += "; " + s;
    throw ConfigError(msg);
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    return from_json(root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_echo(const ExperimentConfig& c) {
  json facilities = json::array();
  for (const auto& f : c.system.facilities)
    facilities.push_back({{"id", f.id},
                          {"evse_count", f.evse_count},
                          {"cables_per_evse", f.cables_per_evse},
                          {"evse_max_energy", f.evse_max_energy},
                          {"solar_rating_kw", f.solar_rating},
                          {"transformer_limit", f.transformer_limit},
                          {"grid_price", f.grid_price}});
  const auto& p = c.scenario;
  json bounds = json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) bounds[k] = *v;
  };
  put("cable_lower", c.bounds.cable_lower);
  put("cable_upper", c.bounds.cable_upper);
  put("energy_lower", c.bounds.energy_lower);
  put("energy_upper", c.bounds.energy_upper);
  put("procurement_lower", c.bounds.procurement_lower);
  put("procurement_upper", c.bounds.procurement_upper);
  json root{
      {"schema_version", c.schema_version},
      {"name", c.name},
      {"grid", {{"horizon", c.system.grid.horizon}, {"slot_hours", c.system.grid.slot_hours}}},
      {"facilities", facilities},
      {"scenario",
       {{"days", p.days},
        {"arrivals_per_day", p.arrivals_per_day},
        {"arrival", distribution_json(p.arrival)},
        {"stay", distribution_json(p.stay)},
        {"energy", distribution_json(p.energy)},
        {"valuation", distribution_json(p.valuation)},
        {"departure_min", p.departure_min},
        {"preferences", {{"min", p.preferences_min}, {"max", p.preferences_max}}},
        {"valuation_jitter", p.valuation_jitter},
        {"submission_lead", p.submission_lead}}},
      {"solar",
       {{"sunrise", p.solar.sunrise},
        {"sunset", p.solar.sunset},
        {"system_loss", p.solar.system_loss},
        {"day_factor", {p.solar.day_factor_lo, p.solar.day_factor_hi}}}},
      {"bounds", bounds},
      {"level_max", c.levels.max_level},
      {"forecast", {{"width_per_slot", c.forecast_width_per_slot}}},
      {"fcfs", {{"partial_value", c.fcfs.partial_value}}},
      {"demand_levels", c.demand_levels},
      {"buffer_hours", c.buffer_hours},
  };
  return root.dump(2);
}

ValuationBounds derive_bounds(const ExperimentConfig& config, const System& system) {
  const auto& p = config.scenario;
  const double r = aggregate_resources(system);
  const double v_lo = p.valuation.lo, v_hi = p.valuation.hi;
  const int window = max_window(p, system.grid.horizon);
  const double h_max = std::max(1.0, p.energy.hi);

  ValuationBounds b;
  b.aggregate_r = r;
  b.cable_lower = config.bounds.cable_lower.value_or(v_lo / (r * window));
  b.cable_upper = config.bounds.cable_upper.value_or(v_hi);
  b.energy_lower = config.bounds.energy_lower.value_or(v_lo / (r * h_max));
  b.energy_upper = config.bounds.energy_upper.value_or(v_hi);
  const double pi_max = max_grid_price(system);
  b.procurement_lower = config.bounds.procurement_lower.value_or(
      pi_max > 0.0 ? std::max(b.energy_lower, 2.0 * pi_max) : b.energy_lower);
  b.procurement_upper =
      config.bounds.procurement_upper.value_or(std::max(b.energy_upper, b.procurement_lower));
  return b;
}

std::vector<std::string> bounds_cross_check(const ValuationBounds& b,
                                            const std::vector<UserRequest>& users,
                                            const System& system, const LevelSet& levels) {
  std::vector<std::string> out;
  const double tol = 1e-12;
  for (const auto& u : users)
    for (const auto& pref : u.preferences) {
      const int fi = system.index_of(pref.facility_id);
      if (fi < 0) continue;
      const Energy cap = levels.cap(system.facilities[fi]);
      const int w = u.window_length();
      const double v = pref.value;
      const Energy min_nonzero = std::max<Energy>(1, u.energy - (w - 1) * cap);
      auto fail = [&](const std::string& what) {
        out.push_back("user " + std::to_string(u.id) + " at facility " +
                      std::to_string(pref.facility_id) + ": " + what);
      };
      if (v > b.cable_upper * (1 + tol)) fail("valuation above the cable upper bound");
      if (v / min_nonzero > b.energy_upper * (1 + tol))
        fail("per-unit valuation above the energy upper bound");
      if (v / (b.aggregate_r * w) < b.cable_lower * (1 - tol))
        fail("per-slot valuation below the cable lower bound");
      if (u.energy > 0 && v / (b.aggregate_r * u.energy) < b.energy_lower * (1 - tol))
        fail("per-unit valuation below the energy lower bound");
    }
  return out;
}

double investment_cost(const InvestmentParams& params, const std::vector<int>& evse_counts,
                       const std::vector<int>& cable_counts) {
  if (evse_counts.size() != cable_counts.size())
    throw std::invalid_argument("investment_cost: one cable count per facility required");
  double cost = 0.0;
  for (std::size_t i = 0; i < evse_counts.size(); ++i) {
    cost += (params.per_cable_cost * cable_counts[i] + params.per_evse_install) * evse_counts[i];
    cost += params.months * params.monthly_maintenance * evse_counts[i];
  }
  return cost;
}

}  // namespace parkcharge
