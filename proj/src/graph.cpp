#include "gravitas/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace gravitas {

int DeviceGraph::find(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

SystemGraph SystemGraph::assemble(std::vector<DeviceGraph> devices,
                                  const std::vector<std::pair<std::string, std::string>>& inter_edges) {
  std::vector<VulnNode> nodes;
  std::vector<ExploitEdge> edges;
  std::vector<DeviceInfo> infos;

  for (auto& dev : devices) {
    infos.push_back(dev.info);
    int base = static_cast<int>(nodes.size());
    for (auto& n : dev.nodes) nodes.push_back(std::move(n));
    for (std::size_t e = 0; e < dev.edges.size(); ++e) {
      ExploitEdge edge;
      edge.from = base + dev.edges[e].first;
      edge.to = base + dev.edges[e].second;
      edge.predicted = e < dev.edge_predicted.size() && dev.edge_predicted[e];
      edges.push_back(edge);
    }
  }

  std::unordered_map<std::string, int> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) idx[nodes[i].id] = static_cast<int>(i);
  for (const auto& [from, to] : inter_edges) {
    auto fi = idx.find(from);
    auto ti = idx.find(to);
    if (fi == idx.end() || ti == idx.end())
      throw std::runtime_error("inter-device edge references unknown node: " + from + " -> " + to);
    ExploitEdge edge;
    edge.from = fi->second;
    edge.to = ti->second;
    edge.inter_device = true;
    edges.push_back(edge);
  }

  return graph_from_parts(std::move(nodes), std::move(edges), std::move(infos));
}

SystemGraph graph_from_parts(std::vector<VulnNode> nodes, std::vector<ExploitEdge> edges,
                             std::vector<DeviceInfo> devices, std::vector<std::string> applied) {
  SystemGraph g;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.devices_ = std::move(devices);
  g.applied_defenses = std::move(applied);

  // Canonical order: nodes by id, edges by (from id, to id).
  std::vector<int> order(g.nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return g.nodes_[a].id < g.nodes_[b].id; });
  std::vector<int> rank(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

  std::vector<VulnNode> sorted;
  sorted.reserve(g.nodes_.size());
  for (int i : order) sorted.push_back(std::move(g.nodes_[i]));
  g.nodes_ = std::move(sorted);

  for (std::size_t i = 1; i < g.nodes_.size(); ++i) {
    if (g.nodes_[i].id == g.nodes_[i - 1].id)
      throw std::runtime_error("duplicate node id: " + g.nodes_[i].id);
  }

  for (auto& e : g.edges_) {
    e.from = rank[e.from];
    e.to = rank[e.to];
    if (e.from == e.to)
      throw std::runtime_error("self-loop on node " + g.nodes_[e.from].id);
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [&](const ExploitEdge& a, const ExploitEdge& b) {
    if (a.from != b.from) return g.nodes_[a.from].id < g.nodes_[b.from].id;
    return g.nodes_[a.to].id < g.nodes_[b.to].id;
  });
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end(),
                             [](const ExploitEdge& a, const ExploitEdge& b) {
                               return a.from == b.from && a.to == b.to;
                             }),
                 g.edges_.end());

  g.rebuild();
  return g;
}

void SystemGraph::rebuild() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = static_cast<int>(i);

  child_edges_.assign(nodes_.size(), {});
  parent_nodes_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& edge = edges_[e];
    edge.inter_device = nodes_[edge.from].device_id != nodes_[edge.to].device_id;
    child_edges_[edge.from].push_back(static_cast<int>(e));
    parent_nodes_[edge.to].push_back(edge.from);
  }
  // edges_ are sorted by (from id, to id), so child edge lists are already in
  // canonical order; parent lists need a sort of their own.
  for (auto& parents : parent_nodes_) {
    std::sort(parents.begin(), parents.end(),
              [&](int a, int b) { return nodes_[a].id < nodes_[b].id; });
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
  }

  entry_nodes_.clear();
  goal_nodes_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::entry) entry_nodes_.push_back(static_cast<int>(i));
    if (nodes_[i].kind == NodeKind::exploit_goal) goal_nodes_.push_back(static_cast<int>(i));
  }

  for (auto& dev : devices_) dev.node_indices.clear();
  std::unordered_map<std::string, int> dev_idx;
  for (std::size_t d = 0; d < devices_.size(); ++d) dev_idx[devices_[d].name] = static_cast<int>(d);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto it = dev_idx.find(nodes_[i].device_id);
    if (it != dev_idx.end()) devices_[it->second].node_indices.push_back(static_cast<int>(i));
  }
}

int SystemGraph::node_index(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

const VulnNode* SystemGraph::find_node(const std::string& id) const {
  int i = node_index(id);
  return i < 0 ? nullptr : &nodes_[i];
}

bool SystemGraph::has_inter_device_out_edge(int node) const {
  for (int e : child_edges_[node]) {
    if (edges_[e].inter_device) return true;
  }
  return false;
}

std::vector<Violation> validate_device_graph(const DeviceGraph& g) {
  std::vector<Violation> out;
  const int n = static_cast<int>(g.nodes.size());

  for (const auto& [from, to] : g.edges) {
    if (from < 0 || from >= n || to < 0 || to >= n) {
      out.push_back({"dangling-edge", "edge references a node outside the device graph"});
    } else if (from == to) {
      out.push_back({"self-loop", "self-loop on node " + g.nodes[from].id});
    }
  }

  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (const auto& [from, to] : g.edges) {
    if (from >= 0 && from < n && to >= 0 && to < n && from != to) {
      children[from].push_back(to);
      indegree[to]++;
    }
  }

  // Kahn's algorithm; leftover nodes sit on a cycle.
  std::deque<int> q;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) q.push_back(i);
  }
  int seen = 0;
  std::vector<int> degree = indegree;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    seen++;
    for (int v : children[u]) {
      if (--degree[v] == 0) q.push_back(v);
    }
  }
  if (seen != n) {
    std::string cyclic;
    for (int i = 0; i < n; ++i) {
      if (degree[i] > 0) {
        if (!cyclic.empty()) cyclic += ", ";
        cyclic += g.nodes[i].id;
      }
    }
    out.push_back({"cycle", "device graph contains a cycle through: " + cyclic});
  }

  // Every entry must reach an exploit goal.
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].kind != NodeKind::entry) continue;
    std::vector<bool> visited(n, false);
    std::deque<int> stack{i};
    bool found = false;
    while (!stack.empty() && !found) {
      int u = stack.back();
      stack.pop_back();
      if (visited[u]) continue;
      visited[u] = true;
      if (g.nodes[u].kind == NodeKind::exploit_goal) found = true;
      for (int v : children[u]) {
        if (!visited[v]) stack.push_back(v);
      }
    }
    if (!found) {
      out.push_back({"unreachable-goal",
                     "entry node " + g.nodes[i].id + " cannot reach any exploit goal"});
    }
  }

  return out;
}

std::unordered_set<std::string> reachable_goals(const SystemGraph& g, const std::string& node_id) {
  int start = g.node_index(node_id);
  if (start < 0) throw std::out_of_range("unknown node id: " + node_id);

  std::unordered_set<std::string> goals;
  std::vector<bool> visited(g.nodes().size(), false);
  std::deque<int> stack{start};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (visited[u]) continue;
    visited[u] = true;
    if (g.nodes()[u].kind == NodeKind::exploit_goal) goals.insert(g.nodes()[u].id);
    for (int e : g.child_edges(u)) {
      int v = g.edges()[e].to;
      if (!visited[v]) stack.push_back(v);
    }
  }
  return goals;
}

namespace {

[[noreturn]] void bad_enum(const char* what, const std::string& s) {
  throw std::invalid_argument(std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::entry: return "entry";
    case NodeKind::intermediate: return "intermediate";
    case NodeKind::exploit_goal: return "exploit_goal";
  }
  return "?";
}

const char* to_string(AttackVector v) {
  switch (v) {
    case AttackVector::network: return "network";
    case AttackVector::adjacent: return "adjacent";
    case AttackVector::local: return "local";
    case AttackVector::physical: return "physical";
  }
  return "?";
}

const char* to_string(AttackComplexity v) {
  switch (v) {
    case AttackComplexity::low: return "low";
    case AttackComplexity::medium: return "medium";
    case AttackComplexity::high: return "high";
  }
  return "?";
}

const char* to_string(PrivilegesRequired v) {
  switch (v) {
    case PrivilegesRequired::none: return "none";
    case PrivilegesRequired::low: return "low";
    case PrivilegesRequired::high: return "high";
  }
  return "?";
}

const char* to_string(UserInteraction v) {
  return v == UserInteraction::none ? "none" : "required";
}

const char* to_string(Scope v) { return v == Scope::unchanged ? "unchanged" : "changed"; }

const char* to_string(DeviceCategory v) {
  switch (v) {
    case DeviceCategory::sensor: return "sensor";
    case DeviceCategory::actuator: return "actuator";
    case DeviceCategory::local_controller: return "local_controller";
    case DeviceCategory::router_gateway: return "router_gateway";
    case DeviceCategory::user_device: return "user_device";
    case DeviceCategory::cloud_server: return "cloud_server";
  }
  return "?";
}

const char* to_string(Updatability v) {
  return v == Updatability::updatable ? "updatable" : "non_updatable";
}

const char* to_string(NetworkAccess v) { return v == NetworkAccess::local ? "local" : "external"; }

const char* to_string(Comms v) {
  switch (v) {
    case Comms::send: return "send";
    case Comms::receive: return "receive";
    case Comms::send_and_receive: return "send_and_receive";
  }
  return "?";
}

const char* to_string(PermissionType v) {
  switch (v) {
    case PermissionType::none: return "none";
    case PermissionType::login: return "login";
    case PermissionType::execute_command: return "execute_command";
    case PermissionType::general: return "general";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "entry") return NodeKind::entry;
  if (s == "intermediate") return NodeKind::intermediate;
  if (s == "exploit_goal") return NodeKind::exploit_goal;
  bad_enum("node kind", s);
}

AttackVector attack_vector_from_string(const std::string& s) {
  if (s == "network") return AttackVector::network;
  if (s == "adjacent") return AttackVector::adjacent;
  if (s == "local") return AttackVector::local;
  if (s == "physical") return AttackVector::physical;
  bad_enum("attack vector", s);
}

AttackComplexity attack_complexity_from_string(const std::string& s) {
  if (s == "low") return AttackComplexity::low;
  if (s == "medium") return AttackComplexity::medium;
  if (s == "high") return AttackComplexity::high;
  bad_enum("attack complexity", s);
}

PrivilegesRequired privileges_required_from_string(const std::string& s) {
  if (s == "none") return PrivilegesRequired::none;
  if (s == "low") return PrivilegesRequired::low;
  if (s == "high") return PrivilegesRequired::high;
  bad_enum("privileges required", s);
}

UserInteraction user_interaction_from_string(const std::string& s) {
  if (s == "none") return UserInteraction::none;
  if (s == "required") return UserInteraction::required;
  bad_enum("user interaction", s);
}

Scope scope_from_string(const std::string& s) {
  if (s == "unchanged") return Scope::unchanged;
  if (s == "changed") return Scope::changed;
  bad_enum("scope", s);
}

DeviceCategory device_category_from_string(const std::string& s) {
  if (s == "sensor") return DeviceCategory::sensor;
  if (s == "actuator") return DeviceCategory::actuator;
  if (s == "local_controller") return DeviceCategory::local_controller;
  if (s == "router_gateway") return DeviceCategory::router_gateway;
  if (s == "user_device") return DeviceCategory::user_device;
  if (s == "cloud_server") return DeviceCategory::cloud_server;
  bad_enum("device category", s);
}

Updatability updatability_from_string(const std::string& s) {
  if (s == "updatable") return Updatability::updatable;
  if (s == "non_updatable") return Updatability::non_updatable;
  bad_enum("updatability", s);
}

NetworkAccess network_access_from_string(const std::string& s) {
  if (s == "local") return NetworkAccess::local;
  if (s == "external") return NetworkAccess::external;
  bad_enum("network access", s);
}

Comms comms_from_string(const std::string& s) {
  if (s == "send") return Comms::send;
  if (s == "receive") return Comms::receive;
  if (s == "send_and_receive") return Comms::send_and_receive;
  bad_enum("comms", s);
}

PermissionType permission_type_from_string(const std::string& s) {
  if (s == "none") return PermissionType::none;
  if (s == "login") return PermissionType::login;
  if (s == "execute_command") return PermissionType::execute_command;
  if (s == "general") return PermissionType::general;
  bad_enum("permission type", s);
}

}  // namespace gravitas
