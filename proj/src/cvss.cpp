#include "gravitas/cvss.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gravitas {

double FactorTable::attack_vector(AttackVector v) const {
  switch (v) {
    case AttackVector::network: return av_network;
    case AttackVector::adjacent: return av_adjacent;
    case AttackVector::local: return av_local;
    case AttackVector::physical: return av_physical;
  }
  return av_local;
}

double FactorTable::attack_complexity(AttackComplexity v) const {
  switch (v) {
    case AttackComplexity::low: return ac_low;
    case AttackComplexity::medium: return ac_medium;
    case AttackComplexity::high: return ac_high;
  }
  return ac_low;
}

double FactorTable::privileges_required(PrivilegesRequired v, Scope s) const {
  switch (v) {
    case PrivilegesRequired::none: return pr_none;
    case PrivilegesRequired::low: return s == Scope::changed ? pr_low_changed : pr_low_unchanged;
    case PrivilegesRequired::high: return s == Scope::changed ? pr_high_changed : pr_high_unchanged;
  }
  return pr_none;
}

double FactorTable::user_interaction(UserInteraction v) const {
  return v == UserInteraction::none ? ui_none : ui_required;
}

double FactorTable::accessibility_level(const std::string& level) const {
  if (level == "high") return acc_high;
  if (level == "medium") return acc_medium;
  if (level == "low") return acc_low;
  if (level == "none") return acc_none;
  throw std::invalid_argument("unknown accessibility level: '" + level + "'");
}

double FactorTable::impact_level(const std::string& level) const {
  if (level == "high") return impact_high;
  if (level == "low") return impact_low;
  if (level == "none") return impact_none;
  throw std::invalid_argument("unknown impact level: '" + level + "'");
}

double FactorTable::defense_level(const std::string& level) const {
  if (level == "none") return def_none;
  if (level == "workaround") return def_workaround;
  if (level == "temporary") return def_temporary;
  if (level == "definite") return def_definite;
  if (level == "infallible") return def_infallible;
  throw std::invalid_argument("unknown defense level: '" + level + "'");
}

void FactorTable::apply_overrides(const std::unordered_map<std::string, double>& overrides) {
  std::unordered_map<std::string, double*> slots = {
      {"exploitability.attack_vector.network", &av_network},
      {"exploitability.attack_vector.adjacent", &av_adjacent},
      {"exploitability.attack_vector.local", &av_local},
      {"exploitability.attack_vector.physical", &av_physical},
      {"exploitability.attack_complexity.low", &ac_low},
      {"exploitability.attack_complexity.medium", &ac_medium},
      {"exploitability.attack_complexity.high", &ac_high},
      {"exploitability.privileges_required.none", &pr_none},
      {"exploitability.privileges_required.low_changed", &pr_low_changed},
      {"exploitability.privileges_required.low_unchanged", &pr_low_unchanged},
      {"exploitability.privileges_required.high_changed", &pr_high_changed},
      {"exploitability.privileges_required.high_unchanged", &pr_high_unchanged},
      {"exploitability.user_interaction.none", &ui_none},
      {"exploitability.user_interaction.required", &ui_required},
      {"exploitability.accessibility.high", &acc_high},
      {"exploitability.accessibility.medium", &acc_medium},
      {"exploitability.accessibility.low", &acc_low},
      {"exploitability.accessibility.none", &acc_none},
      {"impact.high", &impact_high},
      {"impact.low", &impact_low},
      {"impact.none", &impact_none},
      {"defense.none", &def_none},
      {"defense.workaround", &def_workaround},
      {"defense.temporary", &def_temporary},
      {"defense.definite", &def_definite},
      {"defense.infallible", &def_infallible},
  };
  for (const auto& [key, value] : overrides) {
    auto it = slots.find(key);
    if (it == slots.end()) throw std::invalid_argument("unknown factor override key: '" + key + "'");
    if (value < 0.0 || value > 1.0)
      throw std::invalid_argument("factor override out of [0,1]: '" + key + "'");
    *it->second = value;
  }
}

double compute_vulnerability_score(const Exploitability& factors, const ImpactScores& impact,
                                   double accessibility, double node_defense_score,
                                   const FactorTable& table) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(impact.confidentiality) || !in_unit(impact.integrity) ||
      !in_unit(impact.availability) || !in_unit(accessibility) || !in_unit(node_defense_score)) {
    throw std::domain_error("vulnerability score input outside [0,1]");
  }

  const double iss = 1.0 - (1.0 - impact.confidentiality) * (1.0 - impact.integrity) *
                               (1.0 - impact.availability) * (1.0 - accessibility);

  double impact_sub;
  if (factors.scope == Scope::unchanged) {
    impact_sub = 6.42 * iss;
  } else {
    impact_sub = 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15.0);
  }

  const double exploitability = 8.22 * table.attack_vector(factors.attack_vector) *
                                table.attack_complexity(factors.attack_complexity) *
                                table.privileges_required(factors.privileges_required, factors.scope) *
                                table.user_interaction(factors.user_interaction);

  if (impact_sub < 0.0) impact_sub = 0.0;

  double x;
  if (factors.scope == Scope::unchanged) {
    x = std::min(impact_sub + exploitability, 10.0);
  } else {
    x = std::min(1.08 * (impact_sub + exploitability), 10.0);
  }

  return (x / 10.0) * node_defense_score;
}

PositionContext compute_position_context(const SystemGraph& g) {
  PositionContext ctx;
  const std::size_t n = g.nodes().size();
  ctx.reachable_from_local.assign(n, false);
  ctx.reachable_from_external.assign(n, false);

  auto sweep = [&](std::vector<bool>& mark, auto pred) {
    std::deque<int> q;
    for (int i : g.entry_nodes()) {
      if (pred(g.nodes()[i])) {
        mark[i] = true;
        q.push_back(i);
      }
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int e : g.child_edges(u)) {
        int v = g.edges()[e].to;
        if (!mark[v]) {
          mark[v] = true;
          q.push_back(v);
        }
      }
    }
  };

  // Entry network class comes from the entry's template attack vector:
  // network = reachable from the Internet, adjacent/local = local network,
  // physical entries count for neither sweep.
  sweep(ctx.reachable_from_external,
        [](const VulnNode& n) { return n.template_factors.attack_vector == AttackVector::network; });
  sweep(ctx.reachable_from_local, [](const VulnNode& n) {
    return n.template_factors.attack_vector == AttackVector::adjacent ||
           n.template_factors.attack_vector == AttackVector::local;
  });
  return ctx;
}

Exploitability assign_exploitability_factors(const SystemGraph& g, int node_index,
                                             const PositionContext& ctx) {
  const VulnNode& n = g.nodes()[node_index];
  Exploitability f = n.template_factors;

  if (n.physical) {
    f.attack_vector = AttackVector::physical;
  } else if (ctx.reachable_from_local[node_index]) {
    f.attack_vector = AttackVector::adjacent;
  } else if (ctx.reachable_from_external[node_index]) {
    f.attack_vector = AttackVector::network;
  } else {
    f.attack_vector = AttackVector::local;
  }

  switch (n.permission_type) {
    case PermissionType::login:
      f.privileges_required = PrivilegesRequired::high;
      break;
    case PermissionType::execute_command:
      f.privileges_required = PrivilegesRequired::low;
      break;
    default:
      f.privileges_required = PrivilegesRequired::none;
      break;
  }

  f.scope = g.has_inter_device_out_edge(node_index) ? Scope::changed : Scope::unchanged;
  return f;
}

void score_all_nodes(SystemGraph& g, const FactorTable& table, bool parallel) {
  const PositionContext ctx = compute_position_context(g);
  auto& nodes = g.nodes();
  const int n = static_cast<int>(nodes.size());

  auto score_one = [&](int i) {
    VulnNode& node = nodes[i];
    node.factors = assign_exploitability_factors(g, i, ctx);
    node.base_score =
        compute_vulnerability_score(node.factors, node.impact, node.accessibility, 1.0, table);
    node.vulnerability_score = node.base_score * node.node_defense_score;
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) score_one(i);
  } else {
    for (int i = 0; i < n; ++i) score_one(i);
  }
}

}  // namespace gravitas
