#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gravitas/json_util.hpp"

#include "gravitas/cvss.hpp"
#include "gravitas/graph.hpp"
#include "gravitas/propagation.hpp"
#include "gravitas/rng.hpp"

namespace gravitas {

struct NodeScoreUpdate {
  std::string slug;                       // template node slug
  std::optional<std::string> permission;  // restrict to one permission copy
  double score = 1.0;                     // new node_defense_score
};

struct EdgeScoreUpdate {
  std::string from_slug;
  std::string to_slug;
  std::optional<std::string> permission;  // qualifies the edge's source node
  double score = 1.0;                     // new edge_defense_score
};

// A costed bundle of node/edge multiplier updates applicable to a device list
// or a whole device set.
struct Defense {
  std::string name;
  std::vector<std::string> devices;
  std::string device_set;  // alternative to an explicit device list
  double cost = 1.0;
  std::vector<NodeScoreUpdate> node_updates;
  std::vector<EdgeScoreUpdate> edge_updates;

  std::vector<std::string> resolve_devices(const SystemGraph& g) const;
};

std::vector<Defense> load_defense_catalog(const Json& doc, const FactorTable& table);
std::vector<Defense> load_defense_catalog_file(const std::string& path, const FactorTable& table);

// Applies the defense's multiplier updates to the graph. A multiplier only
// ever tightens (min with the current value), so re-applying or stacking
// defenses never weakens a node. Returns the indices of the affected nodes
// (edge updates contribute their source node), ready to seed an incremental
// propagation. Records the defense name in g.applied_defenses.
std::vector<int> apply_defense(SystemGraph& g, const Defense& d);

struct HistoryMoment {
  int round = 0;                         // 0 is the zero-defense baseline
  std::string defense;                   // chosen this round; empty at round 0
  std::vector<std::string> defense_set;  // cumulative chosen set
  double total_cost = 0.0;
  double adversary_score = 0.0;
  double local_objective = 0.0;  // value that won this round; 0 at baseline
  double global_objective = 0.0;
};

struct OptimizerParams {
  int max_defenses = -1;          // <0: no cap short of catalog exhaustion
  double opt_halt_value = -1.0;   // global-objective floor; <0 disables
  double alpha_local = 5e-5;
  double alpha_global = 0.00032;
  int max_set_time = 25;
  int set_size = -1;              // <0: max(1, ceil(0.05 * device count))
  int k = -1;                     // <0: device count
  std::uint64_t seed = 0;
  bool per_device_cost_scaling = false;  // cost once vs. once per member device
  bool invert_local_delta = false;       // negate the risk delta in the local objective
  bool parallel = false;
  bool keep_graphs = false;  // retain per-moment graph copies

  void validate() const;
  int effective_set_size(int device_count) const;
  int effective_k(int device_count) const;
};

// Local objective: alpha * cost + (1 - alpha) * (adv_candidate - adv_prev).
// Lower is better, so larger risk reductions lower the objective; the inverted
// orientation (preferring the smallest reduction) stays selectable for
// comparison runs.
double local_objective(double alpha_local, double cost, double adv_prev, double adv_candidate,
                       bool invert_delta = false);

// Global objective: alpha * total cost + (1 - alpha) * adversary score;
// lower is better.
double global_objective(double alpha_global, double total_cost, double adversary_score);

// One candidate in the rolling defense set S: a graph that differs from the
// base by exactly one not-yet-chosen defense.
struct DefenseSetEntry {
  int defense_index = -1;
  SystemGraph graph;
  int time_in_set = 0;
};

struct OptimizerState {
  std::vector<DefenseSetEntry> set;
  std::vector<int> available;  // catalog indices not chosen and not in the set
  Rng rng;

  explicit OptimizerState(std::uint64_t seed) : rng(seed) {}
};

// Set refresh: evict stale entries, fold the just-chosen defense into the
// survivors, then refill up to set_size preferring defenses of the device
// with the highest exploit risk. Candidate graph rebuilds run under OpenMP
// when params.parallel is set; the RNG draws stay serialized so the result is
// independent of the thread count.
void refresh_defense_set(OptimizerState& state, std::optional<int> chosen, const SystemGraph& g,
                         const std::vector<Defense>& catalog, const OptimizerParams& params,
                         const PropagationParams& prop);

struct OptimizeResult {
  std::vector<HistoryMoment> history;  // index 0 is the baseline
  int best_index = 0;
  std::vector<SystemGraph> graphs;  // per moment, only when keep_graphs
  SystemGraph final_graph;          // graph with every chosen defense applied
};

// Greedy optimization loop. The input graph must already be scored
// (score_all_nodes); the
// optimizer runs its own baseline propagation. History rounds stop as soon as
// the set is exhausted, max_defenses is reached, or the running global
// objective drops to opt_halt_value; the best moment minimizes the global
// objective over the
// whole history including the baseline.
OptimizeResult optimize(const SystemGraph& g, const std::vector<Defense>& catalog,
                        const OptimizerParams& params, const PropagationParams& prop);

// Re-derives a moment's graph by applying its cumulative defense set to the
// baseline and re-propagating in full.
SystemGraph rebuild_moment_graph(const SystemGraph& base, const std::vector<Defense>& catalog,
                                 const HistoryMoment& moment, const PropagationParams& prop);

OptimizerParams parse_optimizer_params(const Json& doc);

}  // namespace gravitas
