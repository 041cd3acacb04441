#include "parkcharge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace parkcharge {

namespace {

constexpr double kImprovement = 1e-12;
constexpr double kEnergyTolerance = 1e-9;

struct PreparedOption {
  const ScheduleOption* option;
  int facility_index;
  double value;
  double standalone_surplus;
};

struct PreparedCandidate {
  std::size_t input_index;
  bool mandatory;
  std::vector<PreparedOption> options;
  double optimistic;
};

class Search {
 public:
  Search(const System& system, const AllocationState& base,
         std::vector<PreparedCandidate> candidates, long node_limit)
      : system_(system), candidates_(std::move(candidates)), node_limit_(node_limit) {
    horizon_ = system.grid.horizon;
    int offset = 0;
    for (const auto& f : system.facilities) {
      evse_offset_.push_back(offset);
      offset += f.evse_count;
    }
    cables_.assign(static_cast<std::size_t>(offset) * horizon_, 0);
    energy_.assign(cables_.size(), 0);
    procurement_.assign(system.facilities.size() * horizon_, 0);
    for (std::size_t fi = 0; fi < system.facilities.size(); ++fi)
      for (Slot t = 0; t < horizon_; ++t) {
        const int idx = static_cast<int>(fi);
        procurement_[fi * horizon_ + t] = base.procurement_demand(idx, t);
        for (int m = 0; m < system.facilities[fi].evse_count; ++m) {
          cables_[cell(idx, m, t)] = base.cable_demand(idx, m, t);
          energy_[cell(idx, m, t)] = base.energy_demand(idx, m, t);
        }
      }
    suffix_.assign(candidates_.size() + 1, 0.0);
    for (std::size_t k = candidates_.size(); k-- > 0;)
      suffix_[k] = suffix_[k + 1] + candidates_[k].optimistic;
    choice_.assign(candidates_.size(), -1);
  }

  void run() { dfs(0); }

  bool found() const { return best_value_ > -std::numeric_limits<double>::infinity(); }
  double best_value() const { return best_value_; }
  const std::vector<int>& best_choice() const { return best_choice_; }
  long nodes() const { return nodes_; }
  bool aborted() const { return aborted_; }

 private:
  std::size_t cell(int fi, int m, Slot t) const {
    return static_cast<std::size_t>(evse_offset_[fi] + m) * horizon_ + t;
  }

  bool fits(const PreparedOption& p) const {
    const auto& f = system_.facilities[p.facility_index];
    const auto& o = *p.option;
    for (Slot t = o.start; t <= o.end; ++t) {
      const auto c = cell(p.facility_index, o.evse, t);
      const Energy e = o.charge[t - o.start];
      if (cables_[c] + 1 > f.cables_per_evse) return false;
      if (energy_[c] + e > f.evse_max_energy) return false;
      if (procurement_[p.facility_index * horizon_ + t] + e >
          f.solar[t] + f.transformer_limit[t] + kEnergyTolerance)
        return false;
    }
    return true;
  }

  // Applies (sign = +1) or removes (sign = -1) an option; returns the change
  // in operational cost when applying.
  double apply(const PreparedOption& p, int sign) {
    const auto& f = system_.facilities[p.facility_index];
    const auto& o = *p.option;
    double delta = 0.0;
    for (Slot t = o.start; t <= o.end; ++t) {
      const auto c = cell(p.facility_index, o.evse, t);
      const Energy e = o.charge[t - o.start];
      auto& y = procurement_[p.facility_index * horizon_ + t];
      if (sign > 0 && e > 0) {
        const ProcurementCurve curve = procurement_curve(f, t);
        delta += operational_cost(y + e, curve) - operational_cost(y, curve);
      }
      cables_[c] += sign;
      energy_[c] += sign * e;
      y += sign * e;
    }
    return delta;
  }

  void dfs(std::size_t k) {
    if (aborted_) return;
    if (++nodes_ > node_limit_) {
      aborted_ = true;
      return;
    }
    if (k == candidates_.size()) {
      if (current_ > best_value_ + kImprovement) {
        best_value_ = current_;
        best_choice_ = choice_;
      }
      return;
    }
    if (found() && current_ + suffix_[k] <= best_value_ + kImprovement) return;

    const auto& cand = candidates_[k];
    for (std::size_t i = 0; i < cand.options.size(); ++i) {
      const auto& p = cand.options[i];
      if (!fits(p)) continue;
      const double delta = apply(p, +1);
      const double gain = p.value - delta;
      current_ += gain;
      choice_[k] = static_cast<int>(i);
      dfs(k + 1);
      current_ -= gain;
      apply(p, -1);
      if (aborted_) return;
    }
    choice_[k] = -1;
    if (!cand.mandatory) dfs(k + 1);
  }

  const System& system_;
  std::vector<PreparedCandidate> candidates_;
  long node_limit_;
  int horizon_ = 0;
  std::vector<int> evse_offset_;
  std::vector<int> cables_;
  std::vector<Energy> energy_;
  std::vector<Energy> procurement_;
  std::vector<double> suffix_;
  std::vector<int> choice_;
  std::vector<int> best_choice_;
  double current_ = 0.0;
  double best_value_ = -std::numeric_limits<double>::infinity();
  long nodes_ = 0;
  bool aborted_ = false;
};

// Operational cost increase of `option` on top of `base`, ignoring every
// other candidate. By convexity this never exceeds the increase on top of
// any superset of allocations.
double standalone_cost(const System& system, const AllocationState& base, int fi,
                       const ScheduleOption& option) {
  const auto& f = system.facilities[fi];
  double delta = 0.0;
  for (Slot t = option.start; t <= option.end; ++t) {
    const Energy e = option.charge[t - option.start];
    if (e == 0) continue;
    const ProcurementCurve curve = procurement_curve(f, t);
    const double y = base.procurement_demand(fi, t);
    const double after = operational_cost(y + e, curve);
    delta += std::isinf(after) ? std::numeric_limits<double>::infinity()
                               : after - operational_cost(y, curve);
  }
  return delta;
}

}  // namespace

OfflineSolution solve_candidates(const System& system, const AllocationState& base,
                                 const std::vector<OfflineCandidate>& candidates,
                                 const OracleLimits& limits) {
  std::vector<PreparedCandidate> prepared;
  prepared.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.values.size() != c.options.size())
      throw std::invalid_argument("offline candidate: one value per option required");
    PreparedCandidate pc{i, c.mandatory, {}, 0.0};
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.options.size(); ++j) {
      const int fi = system.index_of(c.options[j].facility_id);
      if (fi < 0) throw std::invalid_argument("offline candidate: unknown facility");
      const double surplus = c.values[j] - standalone_cost(system, base, fi, c.options[j]);
      if (std::isinf(surplus)) continue;
      pc.options.push_back({&c.options[j], fi, c.values[j], surplus});
      best = std::max(best, surplus);
    }
    std::stable_sort(pc.options.begin(), pc.options.end(), [](const auto& a, const auto& b) {
      return a.standalone_surplus > b.standalone_surplus;
    });
    if (c.mandatory)
      pc.optimistic = pc.options.empty() ? 0.0 : best;
    else
      pc.optimistic = std::max(0.0, best);
    prepared.push_back(std::move(pc));
  }

  auto max_value = [&](const PreparedCandidate& pc) {
    const auto& vals = candidates[pc.input_index].values;
    return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
  };
  std::stable_sort(prepared.begin(), prepared.end(), [&](const auto& a, const auto& b) {
    const double va = max_value(a), vb = max_value(b);
    if (va != vb) return va > vb;
    return candidates[a.input_index].user_id < candidates[b.input_index].user_id;
  });

  Search search(system, base, prepared, limits.node_limit);
  search.run();

  OfflineSolution out;
  out.nodes = search.nodes();
  out.proven_optimal = !search.aborted();
  out.choices.assign(candidates.size(), std::nullopt);
  if (!search.found()) {
    out.feasible = false;
    out.welfare = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.welfare = search.best_value();
  const auto& choice = search.best_choice();
  for (std::size_t k = 0; k < prepared.size(); ++k)
    if (choice[k] >= 0)
      out.choices[prepared[k].input_index] = *prepared[k].options[choice[k]].option;
  return out;
}

OfflineSolution solve_offline(const std::vector<UserRequest>& users, const System& system,
                              const LevelSet& levels, const OracleLimits& limits) {
  if (users.size() > limits.max_users)
    throw InstanceTooLarge("offline oracle: " + std::to_string(users.size()) +
                           " users exceed the limit of " + std::to_string(limits.max_users));
  std::vector<OfflineCandidate> candidates;
  candidates.reserve(users.size());
  for (const auto& u : users) {
    double count = 0.0;
    for (const auto& pref : u.preferences) {
      const int fi = system.index_of(pref.facility_id);
      if (fi < 0) continue;
      const auto& f = system.facilities[fi];
      count += f.evse_count * count_schedules(u.energy, u.window_length(), levels.cap(f));
    }
    if (count > static_cast<double>(limits.option_cap))
      throw InstanceTooLarge("offline oracle: user " + std::to_string(u.id) + " has " +
                             std::to_string(static_cast<long long>(count)) +
                             " options, above the cap of " + std::to_string(limits.option_cap));
    OfflineCandidate c{u.id, option_universe(u, system, levels, limits.option_cap), {}, false};
    for (const auto& o : c.options) c.values.push_back(*u.valuation_for(o.facility_id));
    candidates.push_back(std::move(c));
  }
  auto solution = solve_candidates(system, AllocationState(system), candidates, limits);
  if (!solution.proven_optimal)
    throw InstanceTooLarge("offline oracle: node limit of " + std::to_string(limits.node_limit) +
                           " reached");
  return solution;
}

DualPrices snapshot_prices(const PostedPrices& prices) {
  const System& system = prices.system();
  DualPrices out;
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    const int idx = static_cast<int>(fi);
    std::vector<std::vector<double>> cable(f.evse_count), energy(f.evse_count);
    std::vector<double> procurement(system.grid.horizon);
    for (int m = 0; m < f.evse_count; ++m)
      for (Slot t = 0; t < system.grid.horizon; ++t) {
        cable[m].push_back(prices.cable(idx, m, t));
        energy[m].push_back(prices.energy(idx, m, t));
      }
    for (Slot t = 0; t < system.grid.horizon; ++t) procurement[t] = prices.procurement(idx, t);
    out.cable.push_back(std::move(cable));
    out.energy.push_back(std::move(energy));
    out.procurement.push_back(std::move(procurement));
  }
  return out;
}

DualEvaluation evaluate_dual(const DualPrices& prices, const std::vector<double>& utilities,
                             const std::vector<UserRequest>& users, const System& system,
                             const LevelSet& levels) {
  if (utilities.size() != users.size())
    throw std::invalid_argument("evaluate_dual: one utility per user required");
  DualEvaluation out;
  out.worst_slack = std::numeric_limits<double>::infinity();

  for (double u : utilities) {
    out.utility_sum += u;
    if (u < -kCurrencyTolerance) out.feasible = false;
  }
  for (std::size_t fi = 0; fi < system.facilities.size(); ++fi) {
    const auto& f = system.facilities[fi];
    for (Slot t = 0; t < system.grid.horizon; ++t) {
      for (int m = 0; m < f.evse_count; ++m) {
        const double pc = prices.cable[fi][m][t], pe = prices.energy[fi][m][t];
        if (pc < 0.0 || pe < 0.0) {
          out.feasible = false;
          continue;
        }
        out.conjugate_sum += cable_conjugate(pc, f) + energy_conjugate(pe, f);
      }
      const double pg = prices.procurement[fi][t];
      if (pg < 0.0) {
        out.feasible = false;
        continue;
      }
      out.conjugate_sum += procurement_conjugate(pg, procurement_curve(f, t));
    }
  }
  out.objective = out.utility_sum + out.conjugate_sum;

  // Utility constraints: the exact best surplus over the universe of a
  // (facility, EVSE) pair is the cheapest-slot fill at scalar prices.
  std::vector<double> unit;
  for (std::size_t n = 0; n < users.size(); ++n) {
    const auto& user = users[n];
    double best = 0.0;
    for (const auto& pref : user.preferences) {
      const int fi = system.index_of(pref.facility_id);
      if (fi < 0) continue;
      const auto& f = system.facilities[fi];
      const Energy level = levels.cap(f);
      if (static_cast<long>(level) * user.window_length() < user.energy) continue;
      for (int m = 0; m < f.evse_count; ++m) {
        double cost = 0.0;
        unit.clear();
        for (Slot t = user.arrival; t <= user.departure; ++t) {
          cost += prices.cable[fi][m][t];
          unit.push_back(prices.energy[fi][m][t] + prices.procurement[fi][t]);
        }
        std::sort(unit.begin(), unit.end());
        Energy remaining = user.energy;
        for (double p : unit) {
          const Energy take = std::min(remaining, level);
          cost += take * p;
          remaining -= take;
          if (remaining == 0) break;
        }
        best = std::max(best, pref.value - cost);
      }
    }
    const double slack = utilities[n] - best;
    out.worst_slack = std::min(out.worst_slack, slack);
    if (slack < -kCurrencyTolerance) {
      out.feasible = false;
      ++out.violations;
    }
  }
  if (users.empty()) out.worst_slack = 0.0;
  return out;
}

double empirical_ratio(double offline_welfare, double online_welfare) {
  if (std::abs(online_welfare) <= kCurrencyTolerance) {
    return std::abs(offline_welfare) <= kCurrencyTolerance
               ? 1.0
               : std::numeric_limits<double>::infinity();
  }
  return offline_welfare / online_welfare;
}

}  // namespace parkcharge
