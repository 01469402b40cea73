#pragma once

#include <string>

#include "json.hpp"

#include "arqmc/discrepancy.hpp"
#include "arqmc/harness.hpp"
#include "arqmc/netgeom.hpp"
#include "arqmc/sampler.hpp"

namespace arqmc {

inline nlohmann::json to_json(const ElementaryInterval& e) {
  return {{"base", e.base}, {"depths", e.depths}, {"indices", e.indices}};
}

inline nlohmann::json to_json(const CoverReport& r) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& e : r.intervals) boxes.push_back({{"depths", e.depths}, {"indices", e.indices}});
  return {{"order_k", r.order_k},         {"anchor_t", r.anchor_t},
          {"interval_count", r.interval_count}, {"intervals", boxes},
          {"disjoint", r.disjoint},       {"covers_boundary", r.covers_boundary}};
}

inline nlohmann::json to_json(const NetVerification& v) {
  nlohmann::json j{{"verified", v.verified}, {"minimal_t", v.minimal_t}};
  j["failing_interval"] = v.failing_interval ? to_json(*v.failing_interval) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const DiscrepancyReport& r) {
  return {{"value", r.value},
          {"mode", to_string(r.mode)},
          {"error_radius", r.error_radius},
          {"certified", r.certified}};
}

inline nlohmann::json to_json(const ARResult& r) {
  return {{"driver", to_string(r.driver_provenance)},
          {"driver_count", r.driver_count},
          {"accepted_count", r.accepted_count}};
}

inline nlohmann::json to_json(const MainlemmaCheck& c) {
  return {{"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}, {"N", c.N}};
}

}  // namespace arqmc
