#include "test_support.hpp"

#include <deque>
#include <functional>
#include <stdexcept>

#include "gravitas/propagation.hpp"

namespace test_support {

using namespace gravitas;

SystemGraph scored_smart_home() {
  FactorTable table;
  BuildResult build = build_system(smart_home_spec(), master_template(), table);
  score_all_nodes(build.graph, table);
  return std::move(build.graph);
}

SystemGraph propagated_smart_home() {
  SystemGraph g = scored_smart_home();
  propagate_scores(g, smart_home_spec().propagation);
  return g;
}

SystemGraph random_dag(const RandomGraphSpec& spec) {
  Rng rng(spec.seed);
  const int n = spec.nodes;

  std::vector<VulnNode> nodes(n);
  DeviceInfo dev;
  dev.name = "dev";
  dev.category = DeviceCategory::local_controller;

  const int entries = std::min(spec.entries, n - 1);
  const int goals = std::min(spec.goals, n - entries);

  for (int i = 0; i < n; ++i) {
    VulnNode& node = nodes[i];
    char id[32];
    std::snprintf(id, sizeof(id), "dev/-/n%03d", i);
    node.id = id;
    node.slug = "n" + std::to_string(i);
    node.label = "node " + std::to_string(i);
    node.device_id = "dev";
    if (i < entries) {
      node.kind = NodeKind::entry;
      node.accessibility = 0.2 + 0.6 * rng.uniform01();
    } else if (i >= n - goals) {
      node.kind = NodeKind::exploit_goal;
      node.impact.confidentiality = rng.bernoulli(0.5) ? 0.56 : 0.2;
      node.impact.availability = rng.bernoulli(0.5) ? 0.56 : 0.0;
    } else {
      node.kind = NodeKind::intermediate;
    }
    node.template_factors.attack_vector =
        rng.bernoulli(0.5) ? AttackVector::adjacent : AttackVector::network;
    node.template_factors.attack_complexity =
        rng.bernoulli(0.5) ? AttackComplexity::low : AttackComplexity::medium;
  }

  // Spine: every non-goal node points at some later node, so each entry
  // reaches a goal; extra random forward edges add branching.
  std::vector<ExploitEdge> edges;
  auto add_edge = [&](int from, int to) {
    if (from == to) return;
    ExploitEdge e;
    e.from = from;
    e.to = to;
    edges.push_back(e);
  };
  for (int i = 0; i < n - 1; ++i) {
    if (nodes[i].kind == NodeKind::exploit_goal) continue;
    add_edge(i, i + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i - 1))));
  }
  for (int e = 0; e < spec.extra_edges; ++e) {
    int from = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (nodes[from].kind == NodeKind::exploit_goal) continue;
    int to = from + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - from - 1)));
    add_edge(from, to);
  }

  SystemGraph g = graph_from_parts(std::move(nodes), std::move(edges), {dev});
  score_all_nodes(g, FactorTable{});
  return g;
}

std::vector<Defense> random_defenses(const SystemGraph& g, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Defense> out;
  for (int i = 0; i < count; ++i) {
    Defense d;
    d.name = "defense-" + std::to_string(i);
    d.devices = {"dev"};
    d.cost = 1.0 + static_cast<double>(rng.uniform_int(0, 2));
    const auto& node = g.nodes()[rng.below(g.nodes().size())];
    NodeScoreUpdate upd;
    upd.slug = node.slug;
    upd.score = rng.bernoulli(0.5) ? 0.3 : 0.6;
    d.node_updates.push_back(upd);
    out.push_back(std::move(d));
  }
  return out;
}

bool brute_force_reaches(const SystemGraph& g, int from, int to) {
  std::vector<bool> visited(g.nodes().size(), false);
  std::function<bool(int)> walk = [&](int u) -> bool {
    if (u == to) return true;
    visited[u] = true;
    for (int e : g.child_edges(u)) {
      int v = g.edges()[e].to;
      if (!visited[v] && walk(v)) return true;
    }
    visited[u] = false;  // enumerate paths, not just visits
    return false;
  };
  return walk(from);
}

std::set<std::string> brute_force_goals(const SystemGraph& g, const std::string& from) {
  int start = g.node_index(from);
  if (start < 0) throw std::out_of_range("unknown node: " + from);
  std::set<std::string> out;
  for (int goal : g.goal_nodes()) {
    if (brute_force_reaches(g, start, goal)) out.insert(g.nodes()[goal].id);
  }
  return out;
}

std::vector<double> topo_fixed_point(const SystemGraph& g, double activation_base) {
  const int n = static_cast<int>(g.nodes().size());
  std::vector<int> indegree(n, 0);
  for (const auto& e : g.edges()) indegree[e.from]++;  // reverse orientation

  // Process nodes with all children finished first.
  std::deque<int> q;
  std::vector<int> remaining = indegree;
  for (int i = 0; i < n; ++i) {
    if (remaining[i] == 0) q.push_back(i);
  }
  std::vector<double> score(n, 0.0);
  int seen = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    seen++;
    const VulnNode& node = g.nodes()[u];
    if (g.child_edges(u).empty()) {
      score[u] = node.kind == NodeKind::exploit_goal ? node.vulnerability_score : 0.0;
    } else {
      double prod = 1.0;
      for (int e : g.child_edges(u)) {
        prod *= 1.0 - score[g.edges()[e].to] * g.edges()[e].edge_defense_score;
      }
      double s = 1.0 - std::pow(activation_base, -(node.vulnerability_score * (1.0 - prod)));
      score[u] = std::clamp(s, 0.0, 1.0);
    }
    for (int parent : g.parent_nodes(u)) {
      if (--remaining[parent] == 0) q.push_back(parent);
    }
  }
  if (seen != n) throw std::runtime_error("topo oracle requires an acyclic graph");
  return score;
}

double brute_force_adversary(const SystemGraph& g, int k) {
  const auto& entries = g.entry_nodes();
  const int a = static_cast<int>(entries.size());
  if (k < 1 || k > a) throw std::invalid_argument("k out of range");

  std::vector<bool> select(a, false);
  std::fill(select.begin(), select.begin() + k, true);
  // std::prev_permutation enumerates every k-subset of the index range.
  double best = -1.0;
  do {
    std::vector<double> chosen;
    for (int i = 0; i < a; ++i) {
      if (select[i]) chosen.push_back(g.nodes()[entries[i]].exploit_score);
    }
    std::sort(chosen.begin(), chosen.end(), std::greater<double>());
    double sum = 0.0;
    for (double s : chosen) sum += s;
    best = std::max(best, sum / static_cast<double>(k));
  } while (std::prev_permutation(select.begin(), select.end()));
  return best;
}

}  // namespace test_support
