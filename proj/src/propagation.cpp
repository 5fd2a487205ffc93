#include "gravitas/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace gravitas {

void PropagationParams::validate() const {
  if (!(sum_ratio > 0.0)) throw std::invalid_argument("sum_ratio must be > 0");
  if (!(exp_weight > 0.0 && exp_weight <= 1.0))
    throw std::invalid_argument("exp_weight must be in (0,1]");
  if (max_cycle < 1) throw std::invalid_argument("max_cycle must be >= 1");
  if (!(activation_base > 1.0)) throw std::invalid_argument("activation base must be > 1");
}

double calculate_exploit_score(const SystemGraph& g, int node_index, double activation_base) {
  const VulnNode& n = g.nodes()[node_index];
  const auto& child_edges = g.child_edges(node_index);

  if (child_edges.empty()) {
    if (n.kind == NodeKind::exploit_goal)
      return std::clamp(n.vulnerability_score, 0.0, 1.0);
    return 0.0;  // empty union product -> union 0 -> activation(0) = 0
  }

  double prod = 1.0;
  for (int e : child_edges) {
    const ExploitEdge& edge = g.edges()[e];
    prod *= 1.0 - g.nodes()[edge.to].exploit_score * edge.edge_defense_score;
  }
  const double union_probability = n.vulnerability_score * (1.0 - prod);
  const double score = 1.0 - std::pow(activation_base, -union_probability);
  return std::clamp(score, 0.0, 1.0);
}

namespace {

// One reverse breadth-first sweep. Every node is visited at most once; visits
// walk from the seed set towards parents. Accumulates the entry-node deltas
// against the pre-update moving average, then updates the average.
void sweep(SystemGraph& g, const std::vector<int>& seeds, const PropagationParams& p,
           double& average_sum) {
  auto& nodes = g.nodes();
  std::vector<bool> visited(nodes.size(), false);
  std::deque<int> q(seeds.begin(), seeds.end());

  while (!q.empty()) {
    int i = q.front();
    q.pop_front();
    if (visited[i]) continue;

    VulnNode& n = nodes[i];
    n.exploit_score = calculate_exploit_score(g, i, p.activation_base);
    if (n.kind == NodeKind::entry) average_sum += std::abs(n.exploit_score - n.exp_avg);
    n.exp_avg = p.exp_weight * n.exploit_score + (1.0 - p.exp_weight) * n.exp_avg;
    visited[i] = true;

    for (int parent : g.parent_nodes(i)) {
      if (!visited[parent]) q.push_back(parent);
    }
  }
}

int run_cycles(SystemGraph& g, const std::vector<int>& seeds, const PropagationParams& p) {
  p.validate();
  const double entry_count = static_cast<double>(g.entry_nodes().size());

  // average_Sum starts at |A| so at least one cycle always runs.
  double average_sum = entry_count;
  int count = 0;
  while (count < p.max_cycle) {
    const double ratio = entry_count > 0.0 ? average_sum / entry_count : (count == 0 ? 1.0 : 0.0);
    if (ratio <= p.sum_ratio) break;
    average_sum = 0.0;
    sweep(g, seeds, p, average_sum);
    count++;
  }
  return count;
}

}  // namespace

int propagate_scores(SystemGraph& g, const PropagationParams& p) {
  for (auto& n : g.nodes()) {
    n.exploit_score = 0.0;
    n.exp_avg = 0.0;
  }
  return run_cycles(g, g.goal_nodes(), p);
}

int propagate_from_defense(SystemGraph& g, const std::vector<int>& affected_nodes,
                           const PropagationParams& p) {
  if (affected_nodes.empty()) return 0;
  std::vector<int> seeds = affected_nodes;
  std::sort(seeds.begin(), seeds.end(),
            [&](int a, int b) { return g.nodes()[a].id < g.nodes()[b].id; });
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return run_cycles(g, seeds, p);
}

double adversary_score(const SystemGraph& g, int k) {
  const auto& entries = g.entry_nodes();
  const int a = static_cast<int>(entries.size());
  if (k < 1 || k > a)
    throw std::invalid_argument("adversary score k must lie in [1, |A|=" + std::to_string(a) + "]");

  std::vector<double> scores;
  scores.reserve(entries.size());
  for (int i : entries) scores.push_back(g.nodes()[i].exploit_score);
  std::sort(scores.begin(), scores.end(), std::greater<double>());

  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += scores[i];
  return sum / static_cast<double>(k);
}

double device_max_exploit_score(const SystemGraph& g, const DeviceInfo& device) {
  double best = 0.0;
  for (int i : device.node_indices) best = std::max(best, g.nodes()[i].exploit_score);
  return best;
}

}  // namespace gravitas
