#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gravitas/json_util.hpp"

#include "gravitas/distributions.hpp"
#include "gravitas/optimizer.hpp"
#include "gravitas/rng.hpp"
#include "gravitas/system_builder.hpp"
#include "gravitas/template_catalog.hpp"

namespace gravitas {

struct GenParams {
  std::uint64_t seed = 1;
  int device_count = 20;
  std::map<DeviceCategory, double> category_mix;  // proportions, sum to 1

  double p_updatable = 0.7;
  double p_external = 0.35;
  double p_send_only = 0.1;
  double p_receive_only = 0.1;

  // Hub attachments drawn per "<category>-<hub category>" pair; "default"
  // backs any pair without an explicit entry.
  std::map<std::string, DistSpec> connection_degree;
  double permission_grant_probability = 0.15;

  std::map<std::string, DistSpec> impact_dist;  // keyed by goal slug or "default"
  DistSpec accessibility_dist;
  DistSpec defense_cost_dist;
  double defense_density = 1.5;  // expected defenses per device

  static GenParams defaults();
  static GenParams parse(const Json& j);
  void validate() const;  // throws on inconsistent proportions/probabilities
};

struct GeneratedSystem {
  Json spec_doc;     // system-spec JSON (parses with zero errors)
  Json catalog_doc;  // defense-catalog JSON
  SystemSpec spec;
  std::vector<Defense> catalog;
};

// Quasi-random IoT/CPS generation: a spanning tree over the hub devices first
// guarantees device-level connectivity, everything else attaches by the
// degree distributions. Pure function of GenParams (seed included).
// Throws std::runtime_error for an infeasible mix (multiple devices but no
// routers or controllers to attach them to).
GeneratedSystem generate_system(const GenParams& p, const MasterTemplate& master,
                                const FactorTable& table);

// True when the devices form one component under adjacency plus grants.
bool device_level_connected(const SystemSpec& spec);

struct CurveComparison {
  std::size_t rounds = 0;                 // padded common length
  double max_pairwise_deviation = 0.0;    // max over pairs of max pointwise gap
  double terminal_spread = 0.0;           // max - min terminal score
  double mean_terminal = 0.0;
  std::vector<double> noise;              // stddev of successive diffs per curve

  Json to_json() const;
};

// Pads shorter curves with their terminal value, then reports pairwise
// deviations and the per-curve noise metric. Throws std::invalid_argument on
// fewer than 2 curves.
CurveComparison compare_optimization_curves(const std::vector<std::vector<double>>& curves);

// Noise metric for a single curve: population stddev of successive
// differences (0 for curves shorter than 2 points).
double curve_noise(const std::vector<double>& curve);

}  // namespace gravitas
