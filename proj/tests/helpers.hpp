#pragma once

#include "parkcharge/model.hpp"
#include "parkcharge/pricing.hpp"

namespace testing_helpers {

inline parkcharge::FacilityConfig facility(int id, int evse, int cables, int energy, int horizon,
                                           double solar, double grid_limit, double grid_price) {
  parkcharge::FacilityConfig f;
  f.id = id;
  f.evse_count = evse;
  f.cables_per_evse = cables;
  f.evse_max_energy = energy;
  f.solar.assign(horizon, solar);
  f.solar_rating = solar;
  f.transformer_limit.assign(horizon, grid_limit);
  f.grid_price.assign(horizon, grid_price);
  return f;
}

inline parkcharge::System single(int evse, int cables, int energy, int horizon, double solar,
                                 double grid_limit, double grid_price) {
  parkcharge::System s;
  s.grid.horizon = horizon;
  s.facilities.push_back(facility(1, evse, cables, energy, horizon, solar, grid_limit, grid_price));
  return s;
}

inline parkcharge::UserRequest user(int id, int arrival, int departure, int energy, double value,
                                    int facility_id = 1) {
  return parkcharge::UserRequest{id, arrival, arrival, departure, energy, {{facility_id, value}}};
}

inline parkcharge::ValuationBounds bounds(double l, double u, double r) {
  return parkcharge::ValuationBounds{l, u, l, u, l, u, r};
}

}  // namespace testing_helpers
