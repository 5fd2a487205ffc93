#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gravitas {

enum class NodeKind { entry, intermediate, exploit_goal };

enum class AttackVector { network, adjacent, local, physical };
enum class AttackComplexity { low, medium, high };
enum class PrivilegesRequired { none, low, high };
enum class UserInteraction { none, required };
enum class Scope { unchanged, changed };

enum class DeviceCategory {
  sensor,
  actuator,
  local_controller,
  router_gateway,
  user_device,
  cloud_server
};

enum class Updatability { updatable, non_updatable };
enum class NetworkAccess { local, external };
enum class Comms { send, receive, send_and_receive };

enum class PermissionType { none, login, execute_command, general };

struct Subcategories {
  Updatability updatability = Updatability::updatable;
  NetworkAccess network_access = NetworkAccess::local;
  Comms comms = Comms::send_and_receive;
};

struct Exploitability {
  AttackVector attack_vector = AttackVector::local;
  AttackComplexity attack_complexity = AttackComplexity::low;
  PrivilegesRequired privileges_required = PrivilegesRequired::none;
  UserInteraction user_interaction = UserInteraction::none;
  Scope scope = Scope::unchanged;
};

struct ImpactScores {
  double confidentiality = 0.0;
  double integrity = 0.0;
  double availability = 0.0;
};

// One vulnerability. Node ids are "<device>/<permission or '-'>/<slug>", which
// keeps them unique across permission copies and parameterized goal instances.
struct VulnNode {
  std::string id;
  std::string label;
  std::string slug;  // template node slug (defense selectors match on this)
  std::string device_id;
  NodeKind kind = NodeKind::intermediate;
  std::string permission;  // empty for the base copy
  PermissionType permission_type = PermissionType::none;

  Exploitability template_factors;  // defaults shipped with the template
  Exploitability factors;           // effective levels after position rules
  bool physical = false;            // tamper/port style node, pins attack vector

  ImpactScores impact;
  double accessibility = 0.0;

  double node_defense_score = 1.0;
  double base_score = 0.0;  // Algorithm-1 value before the defense multiplier
  double vulnerability_score = 0.0;
  double exploit_score = 0.0;
  double exp_avg = 0.0;
};

struct ExploitEdge {
  int from = -1;
  int to = -1;
  double edge_defense_score = 1.0;
  bool inter_device = false;
  bool predicted = false;
};

struct DeviceInfo {
  std::string name;
  DeviceCategory category = DeviceCategory::sensor;
  Subcategories subcategories;
  std::string device_set;
  std::vector<int> node_indices;  // rebuilt after canonicalization
};

struct Violation {
  std::string code;
  std::string message;
};

// A single device's attack DAG, as produced by the system builder before the
// per-device graphs are joined into a SystemGraph.
struct DeviceGraph {
  DeviceInfo info;
  std::vector<VulnNode> nodes;
  std::vector<std::pair<int, int>> edges;  // indices into nodes
  std::vector<bool> edge_predicted;

  int find(const std::string& id) const;
};

// Union of all device graphs plus inter-device edges. Nodes and edges are kept
// in canonical (id-sorted) order so every traversal is reproducible.
class SystemGraph {
 public:
  SystemGraph() = default;

  // Takes ownership of fully built device graphs plus inter-device edges
  // expressed as (from id, to id) pairs.
  static SystemGraph assemble(std::vector<DeviceGraph> devices,
                              const std::vector<std::pair<std::string, std::string>>& inter_edges);

  const std::vector<VulnNode>& nodes() const { return nodes_; }
  std::vector<VulnNode>& nodes() { return nodes_; }
  const std::vector<ExploitEdge>& edges() const { return edges_; }
  std::vector<ExploitEdge>& edges() { return edges_; }
  const std::vector<DeviceInfo>& devices() const { return devices_; }
  std::vector<DeviceInfo>& devices() { return devices_; }

  int node_index(const std::string& id) const;  // -1 if unknown
  const VulnNode* find_node(const std::string& id) const;

  const std::vector<int>& entry_nodes() const { return entry_nodes_; }
  const std::vector<int>& goal_nodes() const { return goal_nodes_; }
  const std::vector<int>& child_edges(int node) const { return child_edges_[node]; }
  const std::vector<int>& parent_nodes(int node) const { return parent_nodes_[node]; }

  bool has_inter_device_out_edge(int node) const;

  std::vector<std::string> applied_defenses;

  // Recomputes the index, adjacency lists and entry/goal sets. Must be called
  // after any structural mutation (deserialization does this).
  void rebuild();

 private:
  std::vector<VulnNode> nodes_;
  std::vector<ExploitEdge> edges_;
  std::vector<DeviceInfo> devices_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> child_edges_;
  std::vector<std::vector<int>> parent_nodes_;
  std::vector<int> entry_nodes_;
  std::vector<int> goal_nodes_;

  friend SystemGraph graph_from_parts(std::vector<VulnNode> nodes, std::vector<ExploitEdge> edges,
                                      std::vector<DeviceInfo> devices,
                                      std::vector<std::string> applied);
};

// Used by deserialization and tests to construct a graph from raw parts.
SystemGraph graph_from_parts(std::vector<VulnNode> nodes, std::vector<ExploitEdge> edges,
                             std::vector<DeviceInfo> devices,
                             std::vector<std::string> applied = {});

// Structural lint of one device graph: acyclicity, edge sanity, and the
// requirement that every entry node reaches at least one exploit goal.
// Violations are data, not errors, so a caller can print all of them at once.
std::vector<Violation> validate_device_graph(const DeviceGraph& g);

// Exact forward reachability restricted to exploit goals; cycle-safe.
// Throws std::out_of_range for an unknown node id.
std::unordered_set<std::string> reachable_goals(const SystemGraph& g, const std::string& node_id);

const char* to_string(NodeKind k);
const char* to_string(AttackVector v);
const char* to_string(AttackComplexity v);
const char* to_string(PrivilegesRequired v);
const char* to_string(UserInteraction v);
const char* to_string(Scope v);
const char* to_string(DeviceCategory v);
const char* to_string(Updatability v);
const char* to_string(NetworkAccess v);
const char* to_string(Comms v);
const char* to_string(PermissionType v);

NodeKind node_kind_from_string(const std::string& s);
AttackVector attack_vector_from_string(const std::string& s);
AttackComplexity attack_complexity_from_string(const std::string& s);
PrivilegesRequired privileges_required_from_string(const std::string& s);
UserInteraction user_interaction_from_string(const std::string& s);
Scope scope_from_string(const std::string& s);
DeviceCategory device_category_from_string(const std::string& s);
Updatability updatability_from_string(const std::string& s);
NetworkAccess network_access_from_string(const std::string& s);
Comms comms_from_string(const std::string& s);
PermissionType permission_type_from_string(const std::string& s);

}  // namespace gravitas
