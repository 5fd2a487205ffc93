#pragma once

#include <string>
#include <unordered_map>

#include "gravitas/graph.hpp"

namespace gravitas {

// Numeric scoring values, keyed by factor level. Defaults follow the adapted
// CVSS v3.1 table used by the engine; every value can be overridden from a
// JSON map of "<category>.<factor>.<level>" entries, e.g.
//   {"exploitability.attack_vector.local": 0.55, "impact.low": 0.22}
struct FactorTable {
  double av_network = 0.85;
  double av_adjacent = 0.62;
  double av_local = 0.60;
  double av_physical = 0.44;

  double ac_low = 0.77;
  double ac_medium = 0.44;
  double ac_high = 0.20;

  double pr_none = 0.85;
  double pr_low_changed = 0.68;
  double pr_low_unchanged = 0.62;
  double pr_high_changed = 0.50;
  double pr_high_unchanged = 0.27;

  double ui_none = 0.85;
  double ui_required = 0.62;

  double acc_high = 0.80;
  double acc_medium = 0.60;
  double acc_low = 0.40;
  double acc_none = 0.0;

  double def_none = 1.0;
  double def_workaround = 0.90;
  double def_temporary = 0.60;
  double def_definite = 0.30;
  double def_infallible = 0.0;

  double impact_high = 0.56;
  double impact_low = 0.20;
  double impact_none = 0.0;

  double attack_vector(AttackVector v) const;
  double attack_complexity(AttackComplexity v) const;
  double privileges_required(PrivilegesRequired v, Scope s) const;
  double user_interaction(UserInteraction v) const;
  double accessibility_level(const std::string& level) const;
  double impact_level(const std::string& level) const;
  double defense_level(const std::string& level) const;

  // Applies overrides; throws std::invalid_argument on an unknown key or an
  // out-of-range value.
  void apply_overrides(const std::unordered_map<std::string, double>& overrides);
};

// Algorithm-1 vulnerability score on [0,1]: CVSS v3.1 base-metric arithmetic
// extended with the accessibility term inside ISS and a trailing defense
// multiplier, divided by 10 without rounding.
// Throws std::domain_error when an input lies outside its legal range.
double compute_vulnerability_score(const Exploitability& factors, const ImpactScores& impact,
                                   double accessibility, double node_defense_score,
                                   const FactorTable& table);

// Topographic position classes used by the factor-assignment rules. Computed
// once per graph with two forward sweeps (from external-network entries and
// from local-network entries).
struct PositionContext {
  std::vector<bool> reachable_from_local;
  std::vector<bool> reachable_from_external;
};

PositionContext compute_position_context(const SystemGraph& g);

// Resolves the effective factor levels for one node: template defaults plus
// the position rules (physical pins, network/adjacent/local reach class,
// privileges from permission-copy membership, scope from inter-device edges).
Exploitability assign_exploitability_factors(const SystemGraph& g, int node_index,
                                             const PositionContext& ctx);

// Populates factors, base_score and vulnerability_score on every node.
// Idempotent: factor resolution always starts from the template defaults.
// The parallel flag switches between the serial reference loop and the
// OpenMP kernel; both produce bit-identical results.
void score_all_nodes(SystemGraph& g, const FactorTable& table, bool parallel = false);

// Refreshes vulnerability_score from base_score after a node_defense_score
// change, without re-running factor assignment.
inline void refresh_vulnerability_score(VulnNode& n) {
  n.vulnerability_score = n.base_score * n.node_defense_score;
}

}  // namespace gravitas
