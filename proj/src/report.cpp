#include "gravitas/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace gravitas {

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

Json Provenance::to_json() const {
  Json j;
  j["engine_version"] = engine_version;
  j["template_version"] = template_version;
  j["rng"] = rng;
  j["seed"] = seed;
  j["stage"] = stage;
  j["parameters"] = parameters;
  return j;
}

Provenance Provenance::from_json(const Json& j) {
  Provenance p;
  p.engine_version = j.value("engine_version", p.engine_version);
  p.template_version = j.value("template_version", "");
  p.rng = j.value("rng", p.rng);
  p.seed = j.value("seed", 0ULL);
  p.stage = j.value("stage", "built");
  if (j.contains("parameters")) p.parameters = j.at("parameters");
  return p;
}

Json ExploitChain::to_json() const {
  Json j;
  j["risk"] = round6(chain_risk);
  j["length"] = node_ids.size();
  Json steps = Json::array();
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    steps.push_back({{"node", node_ids[i]}, {"label", labels[i]}, {"device", devices[i]}});
  }
  j["steps"] = steps;
  j["goal_impact"] = {{"confidentiality", round6(goal_impact.confidentiality)},
                      {"integrity", round6(goal_impact.integrity)},
                      {"availability", round6(goal_impact.availability)}};
  return j;
}

namespace {

struct ChainState {
  double cost = 0.0;  // -log(chain risk)
  std::vector<int> path;
};

struct ChainStateCompare {
  const SystemGraph* g;
  bool operator()(const ChainState& a, const ChainState& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;  // min-heap on cost
    // Deterministic tie-break: lexicographically smaller id sequence first.
    const std::size_t len = std::min(a.path.size(), b.path.size());
    for (std::size_t i = 0; i < len; ++i) {
      const auto& ida = g->nodes()[a.path[i]].id;
      const auto& idb = g->nodes()[b.path[i]].id;
      if (ida != idb) return ida > idb;
    }
    return a.path.size() > b.path.size();
  }
};

}  // namespace

std::vector<ExploitChain> extract_top_exploit_chains(const SystemGraph& g, int m, int max_len) {
  std::vector<ExploitChain> out;
  if (m <= 0) return out;

  ChainStateCompare cmp{&g};
  std::priority_queue<ChainState, std::vector<ChainState>, ChainStateCompare> heap(cmp);

  for (int i : g.entry_nodes()) {
    const double v = g.nodes()[i].vulnerability_score;
    if (v <= 0.0) continue;
    heap.push({-std::log(v), {i}});
  }

  // Simple-path best-first search. The expansion budget bounds the worst case
  // on dense graphs; reported chains are exact up to that budget.
  long expansions = 0;
  const long kMaxExpansions = 500000;

  while (!heap.empty() && static_cast<int>(out.size()) < m && expansions < kMaxExpansions) {
    ChainState state = heap.top();
    heap.pop();
    expansions++;

    const int tail = state.path.back();
    if (g.nodes()[tail].kind == NodeKind::exploit_goal) {
      ExploitChain chain;
      chain.chain_risk = std::exp(-state.cost);
      for (int idx : state.path) {
        chain.node_ids.push_back(g.nodes()[idx].id);
        chain.labels.push_back(g.nodes()[idx].label);
        chain.devices.push_back(g.nodes()[idx].device_id);
      }
      chain.goal_impact = g.nodes()[tail].impact;
      out.push_back(std::move(chain));
      // fall through: a chain may continue through this goal into another
      // device, so the path is still extendable below.
    }

    if (static_cast<int>(state.path.size()) >= max_len) continue;
    for (int e : g.child_edges(tail)) {
      const ExploitEdge& edge = g.edges()[e];
      const int next = edge.to;
      if (std::find(state.path.begin(), state.path.end(), next) != state.path.end()) continue;
      const double v = g.nodes()[next].vulnerability_score;
      if (v <= 0.0 || edge.edge_defense_score <= 0.0) continue;
      ChainState ns;
      ns.cost = state.cost - std::log(edge.edge_defense_score) - std::log(v);
      ns.path = state.path;
      ns.path.push_back(next);
      heap.push(std::move(ns));
    }
  }
  return out;
}

RiskReport weakest_link_report(const SystemGraph& g, int m, int k, int max_len) {
  RiskReport report;
  report.k_used = k;
  report.adversary = g.entry_nodes().empty() ? 0.0 : adversary_score(g, k);

  std::vector<int> order(g.nodes().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (g.nodes()[a].exploit_score != g.nodes()[b].exploit_score)
      return g.nodes()[a].exploit_score > g.nodes()[b].exploit_score;
    return g.nodes()[a].id < g.nodes()[b].id;
  });
  for (int i = 0; i < m && i < static_cast<int>(order.size()); ++i) {
    const VulnNode& n = g.nodes()[order[i]];
    report.top_nodes.push_back({n.device_id, n.label, n.id, n.kind, n.exploit_score});
  }

  report.top_chains = extract_top_exploit_chains(g, m, max_len);

  for (const auto& dev : g.devices()) {
    report.per_device_max.push_back({dev.name, device_max_exploit_score(g, dev)});
  }
  std::sort(report.per_device_max.begin(), report.per_device_max.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return report;
}

Json RiskReport::to_json(const Provenance& prov) const {
  Json j;
  j["provenance"] = prov.to_json();
  j["adversary_score"] = round6(adversary);
  j["k"] = k_used;
  Json nodes = Json::array();
  for (const auto& row : top_nodes) {
    nodes.push_back({{"device", row.device},
                     {"vulnerability", row.label},
                     {"node", row.node_id},
                     {"kind", to_string(row.kind)},
                     {"exploit_score", round6(row.exploit_score)}});
  }
  j["weakest_links"] = nodes;
  Json chains = Json::array();
  for (const auto& c : top_chains) chains.push_back(c.to_json());
  j["top_chains"] = chains;
  Json per_device = Json::array();
  for (const auto& [name, score] : per_device_max) {
    per_device.push_back({{"device", name}, {"max_exploit_score", round6(score)}});
  }
  j["per_device_max"] = per_device;
  return j;
}

std::string RiskReport::to_text() const {
  std::ostringstream os;
  os << "adversary score (k=" << k_used << "): " << format_score(adversary) << "\n\n";
  os << "weakest links:\n";
  for (const auto& row : top_nodes) {
    os << "  " << format_score(row.exploit_score) << "  " << row.device << "  " << row.label
       << "\n";
  }
  os << "\ntop exploit chains:\n";
  for (const auto& c : top_chains) {
    os << "  risk " << format_score(c.chain_risk) << ": ";
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      if (i) os << " -> ";
      os << c.labels[i] << " (" << c.devices[i] << ")";
    }
    os << "\n";
  }
  return os.str();
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void append_curve_row(std::ostringstream& os, const HistoryMoment& h, bool optimal) {
  os << h.round << "," << csv_quote(h.defense) << "," << format_score(h.total_cost) << ","
     << format_score(h.adversary_score) << "," << format_score(h.local_objective) << ","
     << format_score(h.global_objective) << "," << (optimal ? 1 : 0) << "\n";
}

}  // namespace

std::string curve_to_csv(const std::vector<HistoryMoment>& history, int best_index) {
  std::ostringstream os;
  os << "round,defense,total_cost,adversary_score,local_obj,global_obj,is_optimal\n";
  for (const auto& h : history) append_curve_row(os, h, false);
  if (best_index >= 0 && best_index < static_cast<int>(history.size()))
    append_curve_row(os, history[best_index], true);
  return os.str();
}

Json curve_to_json(const std::vector<HistoryMoment>& history, int best_index,
                   const Provenance& prov) {
  Json j;
  j["provenance"] = prov.to_json();
  Json rows = Json::array();
  for (const auto& h : history) {
    rows.push_back({{"round", h.round},
                    {"defense", h.defense},
                    {"total_cost", round6(h.total_cost)},
                    {"adversary_score", round6(h.adversary_score)},
                    {"local_obj", round6(h.local_objective)},
                    {"global_obj", round6(h.global_objective)},
                    {"is_optimal", false}});
  }
  j["rows"] = rows;
  if (best_index >= 0 && best_index < static_cast<int>(history.size())) {
    const auto& h = history[best_index];
    j["best"] = {{"round", h.round},
                 {"defense", h.defense},
                 {"defense_set", h.defense_set},
                 {"total_cost", round6(h.total_cost)},
                 {"adversary_score", round6(h.adversary_score)},
                 {"global_obj", round6(h.global_objective)},
                 {"is_optimal", true}};
  }
  return j;
}

namespace {

Json factors_to_json(const Exploitability& f) {
  return Json{{"attack_vector", to_string(f.attack_vector)},
              {"attack_complexity", to_string(f.attack_complexity)},
              {"privileges_required", to_string(f.privileges_required)},
              {"user_interaction", to_string(f.user_interaction)},
              {"scope", to_string(f.scope)}};
}

Exploitability factors_from_json(const Json& j) {
  Exploitability f;
  f.attack_vector = attack_vector_from_string(j.at("attack_vector"));
  f.attack_complexity = attack_complexity_from_string(j.at("attack_complexity"));
  f.privileges_required = privileges_required_from_string(j.at("privileges_required"));
  f.user_interaction = user_interaction_from_string(j.at("user_interaction"));
  f.scope = scope_from_string(j.at("scope"));
  return f;
}

}  // namespace

Json serialize_system_graph(const SystemGraph& g, const Provenance& prov) {
  Json j;
  j["format"] = kGraphFormat;
  j["format_version"] = 1;
  j["provenance"] = prov.to_json();

  Json devices = Json::array();
  for (const auto& d : g.devices()) {
    devices.push_back({{"name", d.name},
                       {"category", to_string(d.category)},
                       {"subcategory",
                        {{"updatability", to_string(d.subcategories.updatability)},
                         {"network_access", to_string(d.subcategories.network_access)},
                         {"comms", to_string(d.subcategories.comms)}}},
                       {"device_set", d.device_set}});
  }
  j["devices"] = devices;

  Json nodes = Json::array();
  for (const auto& n : g.nodes()) {
    Json jn;
    jn["id"] = n.id;
    jn["label"] = n.label;
    jn["slug"] = n.slug;
    jn["device"] = n.device_id;
    jn["kind"] = to_string(n.kind);
    jn["permission"] = n.permission;
    jn["permission_type"] = to_string(n.permission_type);
    jn["physical"] = n.physical;
    jn["template_factors"] = factors_to_json(n.template_factors);
    jn["factors"] = factors_to_json(n.factors);
    jn["impact"] = {{"confidentiality", n.impact.confidentiality},
                    {"integrity", n.impact.integrity},
                    {"availability", n.impact.availability}};
    jn["accessibility"] = n.accessibility;
    jn["node_defense_score"] = n.node_defense_score;
    jn["base_score"] = n.base_score;
    jn["vulnerability_score"] = n.vulnerability_score;
    jn["exploit_score"] = n.exploit_score;
    jn["exp_avg"] = n.exp_avg;
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = nodes;

  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"from", g.nodes()[e.from].id},
                     {"to", g.nodes()[e.to].id},
                     {"edge_defense_score", e.edge_defense_score},
                     {"inter_device", e.inter_device},
                     {"predicted", e.predicted}});
  }
  j["edges"] = edges;
  j["applied_defenses"] = g.applied_defenses;
  return j;
}

ParsedGraph parse_system_graph(const Json& doc) {
  if (doc.value("format", "") != kGraphFormat)
    throw std::runtime_error("not a gravitas graph document");

  ParsedGraph out;
  out.provenance = Provenance::from_json(doc.value("provenance", Json::object()));

  std::vector<DeviceInfo> devices;
  for (const auto& jd : doc.at("devices")) {
    DeviceInfo d;
    d.name = jd.at("name").get<std::string>();
    d.category = device_category_from_string(jd.at("category"));
    const auto& sub = jd.at("subcategory");
    d.subcategories.updatability = updatability_from_string(sub.at("updatability"));
    d.subcategories.network_access = network_access_from_string(sub.at("network_access"));
    d.subcategories.comms = comms_from_string(sub.at("comms"));
    d.device_set = jd.value("device_set", "");
    devices.push_back(std::move(d));
  }

  std::vector<VulnNode> nodes;
  std::unordered_map<std::string, int> idx;
  for (const auto& jn : doc.at("nodes")) {
    VulnNode n;
    n.id = jn.at("id").get<std::string>();
    n.label = jn.at("label").get<std::string>();
    n.slug = jn.at("slug").get<std::string>();
    n.device_id = jn.at("device").get<std::string>();
    n.kind = node_kind_from_string(jn.at("kind"));
    n.permission = jn.value("permission", "");
    n.permission_type = permission_type_from_string(jn.value("permission_type", "none"));
    n.physical = jn.value("physical", false);
    n.template_factors = factors_from_json(jn.at("template_factors"));
    n.factors = factors_from_json(jn.at("factors"));
    n.impact.confidentiality = jn.at("impact").at("confidentiality").get<double>();
    n.impact.integrity = jn.at("impact").at("integrity").get<double>();
    n.impact.availability = jn.at("impact").at("availability").get<double>();
    n.accessibility = jn.at("accessibility").get<double>();
    n.node_defense_score = jn.at("node_defense_score").get<double>();
    n.base_score = jn.at("base_score").get<double>();
    n.vulnerability_score = jn.at("vulnerability_score").get<double>();
    n.exploit_score = jn.at("exploit_score").get<double>();
    n.exp_avg = jn.at("exp_avg").get<double>();
    idx[n.id] = static_cast<int>(nodes.size());
    nodes.push_back(std::move(n));
  }

  std::vector<ExploitEdge> edges;
  for (const auto& je : doc.at("edges")) {
    ExploitEdge e;
    auto fi = idx.find(je.at("from").get<std::string>());
    auto ti = idx.find(je.at("to").get<std::string>());
    if (fi == idx.end() || ti == idx.end())
      throw std::runtime_error("graph document edge references unknown node");
    e.from = fi->second;
    e.to = ti->second;
    e.edge_defense_score = je.at("edge_defense_score").get<double>();
    e.predicted = je.value("predicted", false);
    edges.push_back(e);
  }

  std::vector<std::string> applied;
  if (doc.contains("applied_defenses")) {
    for (const auto& name : doc.at("applied_defenses")) applied.push_back(name.get<std::string>());
  }

  out.graph = graph_from_parts(std::move(nodes), std::move(edges), std::move(devices),
                               std::move(applied));
  return out;
}

double recompute_chain_risk(const SystemGraph& g, const std::vector<std::string>& node_ids) {
  if (node_ids.empty()) return 0.0;
  double risk = 1.0;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    int idx = g.node_index(node_ids[i]);
    if (idx < 0) throw std::out_of_range("unknown node id: " + node_ids[i]);
    risk *= g.nodes()[idx].vulnerability_score;
    if (i + 1 < node_ids.size()) {
      int next = g.node_index(node_ids[i + 1]);
      bool found = false;
      for (int e : g.child_edges(idx)) {
        if (g.edges()[e].to == next) {
          risk *= g.edges()[e].edge_defense_score;
          found = true;
          break;
        }
      }
      if (!found)
        throw std::runtime_error("chain nodes not connected: " + node_ids[i] + " -> " +
                                 node_ids[i + 1]);
    }
  }
  return risk;
}

}  // namespace gravitas
