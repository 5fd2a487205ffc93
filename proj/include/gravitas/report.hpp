#pragma once

#include <string>
#include <vector>

#include "gravitas/graph.hpp"
#include "gravitas/json_util.hpp"
#include "gravitas/optimizer.hpp"
#include "gravitas/version.hpp"

namespace gravitas {

// Carried on every emitted document: who produced it and from what inputs.
struct Provenance {
  std::string engine_version = kEngineVersion;
  std::string template_version;
  std::string rng = kRngName;
  std::uint64_t seed = 0;
  std::string stage = "built";  // built | scored | propagated
  Json parameters = Json::object();

  Json to_json() const;
  static Provenance from_json(const Json& j);
};

// An ordered entry-to-goal path. Chain risk multiplies each node's
// vulnerability score with the traversed edge defenses; exploit scores are
// deliberately not used here since they already aggregate whole subtrees.
struct ExploitChain {
  std::vector<std::string> node_ids;
  std::vector<std::string> labels;
  std::vector<std::string> devices;
  double chain_risk = 0.0;
  ImpactScores goal_impact;

  Json to_json() const;
};

// Top-m simple paths by chain risk from any entry node to any exploit goal,
// best-first over -log(risk); ties resolve to the lexicographically smaller
// node-id sequence. Paths may pass through intermediate goals (multi-device
// chains do), but every reported path ends on one.
std::vector<ExploitChain> extract_top_exploit_chains(const SystemGraph& g, int m, int max_len = 25);

struct RiskRow {
  std::string device;
  std::string label;
  std::string node_id;
  NodeKind kind = NodeKind::intermediate;
  double exploit_score = 0.0;
};

struct RiskReport {
  std::vector<RiskRow> top_nodes;  // sorted by exploit score, descending
  std::vector<ExploitChain> top_chains;
  double adversary = 0.0;
  int k_used = 0;
  std::vector<std::pair<std::string, double>> per_device_max;  // sorted descending

  Json to_json(const Provenance& prov) const;
  std::string to_text() const;
};

// Weakest-link view: top-m nodes by exploit score (entry or not), the top-m
// chains, adversary score at k, and each device's maximum score.
RiskReport weakest_link_report(const SystemGraph& g, int m, int k, int max_len = 25);

// Optimization curve emission. One row per history moment plus a trailing
// marker row that repeats the globally optimal moment with is_optimal=1.
// Scores are printed with fixed 6-decimal precision.
std::string curve_to_csv(const std::vector<HistoryMoment>& history, int best_index);
Json curve_to_json(const std::vector<HistoryMoment>& history, int best_index,
                   const Provenance& prov);

// Graph (de)serialization. Bit-exact: doubles round-trip through their
// shortest decimal representation, field order is fixed, so
// serialize(parse(serialize(g))) == serialize(g) byte for byte.
Json serialize_system_graph(const SystemGraph& g, const Provenance& prov);

struct ParsedGraph {
  SystemGraph graph;
  Provenance provenance;
};
ParsedGraph parse_system_graph(const Json& doc);

// Recomputes a chain's risk from the graph, for cross-checking reports.
double recompute_chain_risk(const SystemGraph& g, const std::vector<std::string>& node_ids);

// 6-decimal fixed formatting used by reports and curves.
std::string format_score(double v);
double round6(double v);

}  // namespace gravitas
