#include "parkcharge/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace parkcharge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxRejections = 100000;

// Portable draws: the standard distributions are implementation-defined.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_index(std::mt19937_64& rng, int n) {
  return std::min(n - 1, static_cast<int>(unit(rng) * n));
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = unit(rng);
  while (u1 <= 0.0) u1 = unit(rng);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Untruncated CDF; the uniform kind is uniform on [a, b].
double base_cdf(const Distribution& d, double a, double b, double x) {
  switch (d.kind) {
    case Distribution::Kind::Uniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case Distribution::Kind::Normal:
      return phi((x - d.mean) / d.sd);
    case Distribution::Kind::Bimodal:
      return d.weight * phi((x - d.mean) / d.sd) + (1.0 - d.weight) * phi((x - d.mean2) / d.sd2);
  }
  return 0.0;
}

double truncated_cdf(const Distribution& d, double a, double b, double x) {
  if (x < a) return 0.0;
  if (x >= b) return 1.0;
  const double lo = base_cdf(d, a, b, a), hi = base_cdf(d, a, b, b);
  return (base_cdf(d, a, b, x) - lo) / (hi - lo);
}

double draw_on(const Distribution& d, double a, double b, std::mt19937_64& rng) {
  if (d.kind == Distribution::Kind::Uniform) return a + unit(rng) * (b - a);
  for (int i = 0; i < kMaxRejections; ++i) {
    double x;
    if (d.kind == Distribution::Kind::Normal)
      x = d.mean + d.sd * standard_normal(rng);
    else
      x = unit(rng) < d.weight ? d.mean + d.sd * standard_normal(rng)
                               : d.mean2 + d.sd2 * standard_normal(rng);
    if (x >= a && x < b) return x;
  }
  throw std::runtime_error("distribution has negligible mass on its support");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

DayTrace& day_slot(ScenarioTrace& trace, int day) {
  for (auto& d : trace.days)
    if (d.day == day) return d;
  trace.days.push_back({day, {}, {}});
  return trace.days.back();
}

Energy energy_cap(const UserRequest& u, const System& system, Energy level_max) {
  Energy cap = -1;
  for (const auto& p : u.preferences) {
    const auto& f = system.facility(p.facility_id);
    const Energy level = LevelSet{level_max}.cap(f);
    const Energy c = level * u.window_length();
    cap = cap < 0 ? c : std::min(cap, c);
  }
  return std::max<Energy>(cap, 0);
}

Slot depart_for(Slot arrival, int stay, const ScenarioParams& p, int horizon) {
  Slot departure = std::min(horizon - 1, arrival + stay - 1);
  return std::max(departure, std::min(p.departure_min, horizon - 1));
}

}  // namespace

Distribution Distribution::uniform(double lo, double hi) {
  Distribution d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  d.mean = 0.5 * (lo + hi);
  return d;
}

Distribution Distribution::normal(double lo, double hi, double mean, double sd) {
  Distribution d = uniform(lo, hi);
  d.kind = Kind::Normal;
  d.mean = mean;
  d.sd = sd;
  return d;
}

Distribution Distribution::bimodal(double lo, double hi, double mean, double sd, double mean2,
                                   double sd2, double weight) {
  Distribution d = normal(lo, hi, mean, sd);
  d.kind = Kind::Bimodal;
  d.mean2 = mean2;
  d.sd2 = sd2;
  d.weight = weight;
  return d;
}

Distribution::Kind parse_distribution_kind(const std::string& name) {
  if (name == "uniform") return Distribution::Kind::Uniform;
  if (name == "normal" || name == "unimodal") return Distribution::Kind::Normal;
  if (name == "bimodal") return Distribution::Kind::Bimodal;
  throw std::invalid_argument("unknown distribution kind '" + name + "'");
}

std::string to_string(Distribution::Kind kind) {
  switch (kind) {
    case Distribution::Kind::Uniform: return "uniform";
    case Distribution::Kind::Normal: return "normal";
    case Distribution::Kind::Bimodal: return "bimodal";
  }
  return "uniform";
}

std::vector<std::string> distribution_violations(const Distribution& d, const std::string& name) {
  std::vector<std::string> out;
  if (!(d.lo <= d.hi)) out.push_back(name + ": empty range");
  if (d.kind != Distribution::Kind::Uniform && !(d.sd > 0.0))
    out.push_back(name + ": standard deviation must be > 0");
  if (d.kind == Distribution::Kind::Bimodal) {
    if (!(d.sd2 > 0.0)) out.push_back(name + ": second standard deviation must be > 0");
    if (!(d.weight >= 0.0 && d.weight <= 1.0))
      out.push_back(name + ": mixture weight must lie in [0, 1]");
  }
  if (out.empty() && d.kind != Distribution::Kind::Uniform) {
    const double a = d.lo - 0.5, b = d.hi + 0.5;
    if (base_cdf(d, a, b, b) - base_cdf(d, a, b, a) < 1e-6)
      out.push_back(name + ": negligible probability mass on the range");
  }
  return out;
}

double sample_real(const Distribution& d, std::mt19937_64& rng) {
  if (d.lo == d.hi) return d.lo;
  return draw_on(d, d.lo, d.hi, rng);
}

int sample_int(const Distribution& d, std::mt19937_64& rng) {
  const double x = draw_on(d, d.lo - 0.5, d.hi + 0.5, rng);
  return std::clamp(static_cast<int>(std::floor(x + 0.5)), static_cast<int>(d.lo),
                    static_cast<int>(d.hi));
}

double real_cdf(const Distribution& d, double x) {
  if (d.lo == d.hi) return x >= d.lo ? 1.0 : 0.0;
  return truncated_cdf(d, d.lo, d.hi, x);
}

double int_cdf(const Distribution& d, int k) {
  return truncated_cdf(d, d.lo - 0.5, d.hi + 0.5, k + 0.5);
}

double real_mean(const Distribution& d) {
  if (d.lo == d.hi) return d.lo;
  // E[X] = lo + integral of (1 - F) over [lo, hi] (Simpson).
  const int n = 2000;
  const double h = (d.hi - d.lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * (1.0 - real_cdf(d, d.lo + i * h));
  }
  return d.lo + sum * h / 3.0;
}

double int_mean(const Distribution& d) {
  double mean = 0.0, prev = 0.0;
  for (int k = static_cast<int>(d.lo); k <= static_cast<int>(d.hi); ++k) {
    const double c = int_cdf(d, k);
    mean += k * (c - prev);
    prev = c;
  }
  return mean;
}

std::vector<double> solar_curve(double rating, const SolarModel& model, const TimeGrid& grid,
                                double day_factor) {
  std::vector<double> out(grid.horizon, 0.0);
  const double daylight = model.sunset - model.sunrise;
  if (rating <= 0.0 || daylight <= 0.0) return out;
  for (Slot t = 0; t < grid.horizon; ++t) {
    const double hour = (t + 0.5) * grid.slot_hours;
    if (hour < model.sunrise || hour >= model.sunset) continue;
    const double shape = std::sin(kPi * (hour - model.sunrise) / daylight);
    out[t] = std::max(0.0, rating * (1.0 - model.system_loss) * shape * day_factor *
                               grid.slot_hours);
  }
  return out;
}

std::vector<std::string> scenario_violations(const ScenarioParams& p, const System& system) {
  std::vector<std::string> out;
  const int horizon = system.grid.horizon;
  const int facilities = static_cast<int>(system.facilities.size());
  auto add = [&](std::vector<std::string> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (p.days < 1) out.push_back("scenario: days must be >= 1");
  if (p.arrivals_per_day < 0) out.push_back("scenario: arrivals_per_day must be >= 0");
  add(distribution_violations(p.arrival, "arrival"));
  add(distribution_violations(p.stay, "stay"));
  add(distribution_violations(p.energy, "energy"));
  add(distribution_violations(p.valuation, "valuation"));
  if (p.arrival.lo < 0 || p.arrival.hi > horizon - 1)
    out.push_back("arrival: range must lie within the horizon");
  if (p.stay.lo < 1) out.push_back("stay: must be at least one slot");
  if (p.stay.lo > horizon) out.push_back("stay: minimum stay exceeds the horizon");
  if (p.energy.lo < 1) out.push_back("energy: requests must be at least one unit");
  if (!(p.valuation.lo > 0.0)) out.push_back("valuation: values must be > 0");
  if (p.preferences_min < 1 || p.preferences_min > p.preferences_max)
    out.push_back("scenario: need 1 <= preferences_min <= preferences_max");
  if (p.preferences_min > facilities)
    out.push_back("scenario: preferences_min exceeds the number of facilities");
  if (!(p.valuation_jitter >= 0.0 && p.valuation_jitter < 1.0))
    out.push_back("scenario: valuation_jitter must lie in [0, 1)");
  if (p.submission_lead < 0) out.push_back("scenario: submission_lead must be >= 0");
  if (p.level_max < 0) out.push_back("scenario: level_max must be >= 0");
  if (!(p.solar.day_factor_lo >= 0.0 && p.solar.day_factor_lo <= p.solar.day_factor_hi))
    out.push_back("solar: need 0 <= day_factor_lo <= day_factor_hi");
  if (!(p.solar.system_loss >= 0.0 && p.solar.system_loss < 1.0))
    out.push_back("solar: system_loss must lie in [0, 1)");
  return out;
}

std::uint64_t day_seed(std::uint64_t seed, int day) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(day) + 0x5851F42D4C957F2DULL));
}

DayTrace sample_day(const ScenarioParams& p, const System& system, int day) {
  const int horizon = system.grid.horizon;
  const int facilities = static_cast<int>(system.facilities.size());
  std::mt19937_64 rng(day_seed(p.seed, day));

  DayTrace out;
  out.day = day;
  const double factor =
      p.solar.day_factor_lo + unit(rng) * (p.solar.day_factor_hi - p.solar.day_factor_lo);
  for (const auto& f : system.facilities)
    out.solar.push_back(solar_curve(f.solar_rating, p.solar, system.grid, factor));

  std::vector<int> order(facilities);
  out.users.reserve(p.arrivals_per_day);
  for (int i = 0; i < p.arrivals_per_day; ++i) {
    UserRequest u;
    u.arrival = std::clamp(sample_int(p.arrival, rng), 0, horizon - 1);
    u.departure = depart_for(u.arrival, sample_int(p.stay, rng), p, horizon);
    u.submission = std::max(0, u.arrival - p.submission_lead);

    const int pmax = std::min(p.preferences_max, facilities);
    const int k = p.preferences_min + uniform_index(rng, pmax - p.preferences_min + 1);
    std::iota(order.begin(), order.end(), 0);
    for (int j = 0; j < k; ++j) std::swap(order[j], order[j + uniform_index(rng, facilities - j)]);
    std::vector<int> chosen(order.begin(), order.begin() + k);
    std::sort(chosen.begin(), chosen.end());

    const double base = sample_real(p.valuation, rng);
    for (int fi : chosen) {
      double v = base;
      if (p.valuation_jitter > 0.0)
        v = std::clamp(base * (1.0 + p.valuation_jitter * (2.0 * unit(rng) - 1.0)), p.valuation.lo,
                       p.valuation.hi);
      u.preferences.push_back({system.facilities[fi].id, v});
    }
    u.energy = std::min(sample_int(p.energy, rng), energy_cap(u, system, p.level_max));
    out.users.push_back(std::move(u));
  }

  std::stable_sort(out.users.begin(), out.users.end(), [](const auto& a, const auto& b) {
    if (a.submission != b.submission) return a.submission < b.submission;
    return a.arrival < b.arrival;
  });
  for (std::size_t i = 0; i < out.users.size(); ++i) out.users[i].id = static_cast<int>(i) + 1;
  return out;
}

ScenarioTrace sample_scenario(const ScenarioParams& params, const System& system) {
  auto violations = scenario_violations(params, system);
  if (!violations.empty()) {
    std::string msg = "infeasible scenario parameters";
    for (const auto& v : violations) msg += "; " + v;
    throw std::invalid_argument(msg);
  }
  ScenarioTrace trace;
  for (int d = 0; d < params.days; ++d) trace.days.push_back(sample_day(params, system, d));
  return trace;
}

System with_solar(const System& system, const DayTrace& day) {
  System out = system;
  for (std::size_t fi = 0; fi < out.facilities.size() && fi < day.solar.size(); ++fi)
    out.facilities[fi].solar = day.solar[fi];
  return out;
}

SolarForecast make_forecast(const std::vector<double>& realized, const std::vector<double>& widths,
                            double rating) {
  const int horizon = static_cast<int>(realized.size());
  std::vector<double> lower(static_cast<std::size_t>(horizon) * horizon);
  std::vector<double> upper(lower.size());
  for (int tc = 0; tc < horizon; ++tc)
    for (int t = 0; t < horizon; ++t) {
      const std::size_t cell = static_cast<std::size_t>(tc) * horizon + t;
      const double s = realized[t];
      double w = 0.0;
      if (t > tc && !widths.empty())
        w = std::max(0.0, widths[std::min<std::size_t>(t - tc, widths.size() - 1)]);
      lower[cell] = std::max(0.0, s - w);
      upper[cell] = std::min(std::max(rating, s), s + w);
    }
  return SolarForecast(horizon, std::move(lower), std::move(upper));
}

std::vector<double> linear_widths(int horizon, double per_slot) {
  std::vector<double> out(std::max(horizon, 1));
  for (int k = 0; k < static_cast<int>(out.size()); ++k) out[k] = per_slot * k;
  return out;
}

std::vector<UserRequest> buffer_users(const std::vector<UserRequest>& users, int buffer_slots,
                                      const TimeGrid& grid) {
  if (buffer_slots < 0) throw std::invalid_argument("buffer must be >= 0");
  std::vector<UserRequest> out = users;
  for (auto& u : out) u.departure = std::min(grid.horizon - 1, u.departure + buffer_slots);
  return out;
}

ScenarioTrace buffer_transform(const ScenarioTrace& trace, int buffer_slots, const TimeGrid& grid) {
  ScenarioTrace out = trace;
  for (auto& d : out.days) d.users = buffer_users(d.users, buffer_slots, grid);
  return out;
}

ExpectedArrivals expected_arrivals(const ScenarioParams& p, const System& system) {
  ExpectedArrivals out;
  const int horizon = system.grid.horizon;
  const int facilities = static_cast<int>(system.facilities.size());
  const int stay = std::max(1, static_cast<int>(std::lround(int_mean(p.stay))));
  const Energy energy = std::max(1, static_cast<int>(std::lround(int_mean(p.energy))));
  const double value = real_mean(p.valuation);
  const int k = std::clamp(static_cast<int>(std::lround(0.5 * (p.preferences_min + p.preferences_max))),
                           1, std::max(1, facilities));
  int next_id = -1, rotation = 0;
  for (int a = static_cast<int>(p.arrival.lo); a <= static_cast<int>(p.arrival.hi); ++a) {
    const double mass = int_cdf(p.arrival, a) - int_cdf(p.arrival, a - 1);
    const long count = std::lround(p.arrivals_per_day * mass);
    for (long i = 0; i < count; ++i) {
      UserRequest u;
      u.id = next_id--;
      u.arrival = std::clamp(a, 0, horizon - 1);
      u.departure = depart_for(u.arrival, stay, p, horizon);
      u.submission = std::max(0, u.arrival - p.submission_lead);
      for (int j = 0; j < k; ++j)
        u.preferences.push_back({system.facilities[(rotation + j) % facilities].id, value});
      std::sort(u.preferences.begin(), u.preferences.end(),
                [](const auto& x, const auto& y) { return x.facility_id < y.facility_id; });
      rotation = (rotation + 1) % std::max(1, facilities);
      u.energy = std::min(energy, energy_cap(u, system, p.level_max));
      out.users.push_back(std::move(u));
    }
  }
  std::stable_sort(out.users.begin(), out.users.end(),
                   [](const auto& x, const auto& y) { return x.submission < y.submission; });
  return out;
}

void write_requests_csv(std::ostream& out, const ScenarioTrace& trace) {
  out << "day,id,submit,arrive,depart,energy,valuations\n";
  for (const auto& d : trace.days)
    for (const auto& u : d.users) {
      out << d.day << ',' << u.id << ',' << u.submission << ',' << u.arrival << ','
          << u.departure << ',' << u.energy << ',';
      for (std::size_t i = 0; i < u.preferences.size(); ++i) {
        if (i) out << ';';
        out << u.preferences[i].facility_id << ':' << format_double(u.preferences[i].value);
      }
      out << '\n';
    }
}

ScenarioTrace read_requests_csv(std::istream& in) {
  ScenarioTrace trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || (lineno == 1 && line.rfind("day,", 0) == 0)) continue;
    const auto f = split(line, ',');
    if (f.size() != 7)
      throw std::invalid_argument("requests csv line " + std::to_string(lineno) +
                                  ": expected 7 fields");
    UserRequest u;
    const int day = parse_int(f[0]);
    u.id = parse_int(f[1]);
    u.submission = parse_int(f[2]);
    u.arrival = parse_int(f[3]);
    u.departure = parse_int(f[4]);
    u.energy = parse_int(f[5]);
    for (const auto& pair : split(f[6], ';')) {
      if (pair.empty()) continue;
      const auto colon = pair.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("requests csv line " + std::to_string(lineno) +
                                    ": valuation pairs are facility:value");
      u.preferences.push_back(
          {parse_int(pair.substr(0, colon)), parse_double(pair.substr(colon + 1))});
    }
    day_slot(trace, day).users.push_back(std::move(u));
  }
  std::stable_sort(trace.days.begin(), trace.days.end(),
                   [](const auto& a, const auto& b) { return a.day < b.day; });
  return trace;
}

void write_solar_csv(std::ostream& out, const ScenarioTrace& trace, const System& system) {
  out << "day,facility,slot,solar\n";
  for (const auto& d : trace.days)
    for (std::size_t fi = 0; fi < d.solar.size(); ++fi)
      for (std::size_t t = 0; t < d.solar[fi].size(); ++t)
        out << d.day << ',' << system.facilities[fi].id << ',' << t << ','
            << format_double(d.solar[fi][t]) << '\n';
}

void read_solar_csv(std::istream& in, ScenarioTrace& trace, const System& system) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || (lineno == 1 && line.rfind("day,", 0) == 0)) continue;
    const auto f = split(line, ',');
    if (f.size() != 4)
      throw std::invalid_argument("solar csv line " + std::to_string(lineno) +
                                  ": expected 4 fields");
    const int fi = system.index_of(parse_int(f[1]));
    const int t = parse_int(f[2]);
    if (fi < 0 || t < 0 || t >= system.grid.horizon)
      throw std::invalid_argument("solar csv line " + std::to_string(lineno) +
                                  ": unknown facility or slot");
    auto& d = day_slot(trace, parse_int(f[0]));
    d.solar.resize(system.facilities.size(), std::vector<double>(system.grid.horizon, 0.0));
    d.solar[fi][t] = parse_double(f[3]);
  }
  std::stable_sort(trace.days.begin(), trace.days.end(),
                   [](const auto& a, const auto& b) { return a.day < b.day; });
}

double ks_distance_real(std::vector<double> samples, const Distribution& d) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = real_cdf(d, samples[i]);
    dist = std::max({dist, (i + 1) / n - f, f - i / n});
  }
  return dist;
}

double ks_distance_int(const std::vector<int>& samples, const Distribution& d) {
  if (samples.empty()) return 0.0;
  std::map<int, int> counts;
  for (int s : samples) ++counts[s];
  const double n = static_cast<double>(samples.size());
  double dist = 0.0, seen = 0.0;
  for (int k = static_cast<int>(d.lo); k <= static_cast<int>(d.hi); ++k) {
    auto it = counts.find(k);
    if (it != counts.end()) seen += it->second;
    dist = std::max(dist, std::abs(seen / n - int_cdf(d, k)));
  }
  return dist;
}

}  // namespace parkcharge
