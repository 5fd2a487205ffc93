#include "gravitas/template_catalog.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace gravitas {


const std::vector<std::string> kStandardGoalSlugs = {
    "eavesdropping-network", "dos-attack",      "disable-device", "actuator-malfunction",
    "data-leak",             "data-change",     "replay-attack",  "ransomware-attack",
    "obtain-auth-key",       "obtain-open-access",
};

int MasterTemplate::node_index(const std::string& slug) const {
  auto it = index_.find(slug);
  return it == index_.end() ? -1 : it->second;
}

const TemplateNode& MasterTemplate::node(const std::string& slug) const {
  int i = node_index(slug);
  if (i < 0) throw std::out_of_range("unknown template node: " + slug);
  return nodes[i];
}

std::vector<std::string> MasterTemplate::missing_standard_goals() const {
  std::vector<std::string> missing;
  for (const auto& slug : kStandardGoalSlugs) {
    if (node_index(slug) < 0) missing.push_back(slug);
  }
  return missing;
}

void MasterTemplate::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index_.emplace(nodes[i].slug, static_cast<int>(i)).second)
      throw std::runtime_error("duplicate template slug: " + nodes[i].slug);
  }
}

namespace {

Exploitability parse_factors(const Json& j) {
  Exploitability f;
  if (j.contains("attack_vector")) f.attack_vector = attack_vector_from_string(j.at("attack_vector"));
  if (j.contains("attack_complexity"))
    f.attack_complexity = attack_complexity_from_string(j.at("attack_complexity"));
  if (j.contains("privileges_required"))
    f.privileges_required = privileges_required_from_string(j.at("privileges_required"));
  if (j.contains("user_interaction"))
    f.user_interaction = user_interaction_from_string(j.at("user_interaction"));
  return f;
}

void check_acyclic(const MasterTemplate& t) {
  const int n = static_cast<int>(t.nodes.size());
  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : t.edges) {
    int from = t.node_index(e.from);
    int to = t.node_index(e.to);
    if (from < 0 || to < 0)
      throw std::runtime_error("template edge references unknown slug: " + e.from + " -> " + e.to);
    if (from == to) throw std::runtime_error("template self-loop on: " + e.from);
    children[from].push_back(to);
    indegree[to]++;
  }
  std::deque<int> q;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) q.push_back(i);
  }
  int seen = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    seen++;
    for (int v : children[u]) {
      if (--indegree[v] == 0) q.push_back(v);
    }
  }
  if (seen != n) throw std::runtime_error("template contains a cycle");
}

}  // namespace

MasterTemplate load_master_template(const Json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
    throw std::runtime_error("template document must be an object with 'nodes' and 'edges'");

  MasterTemplate t;
  t.version = doc.value("version", "0");

  for (const auto& jn : doc.at("nodes")) {
    TemplateNode n;
    n.slug = jn.at("slug").get<std::string>();
    n.label = jn.at("label").get<std::string>();
    n.kind = node_kind_from_string(jn.at("kind").get<std::string>());
    if (jn.contains("factors")) {
      n.factors = parse_factors(jn.at("factors"));
      n.physical = jn.at("factors").value("physical", false);
    }
    if (jn.contains("permission_flags")) {
      const auto& pf = jn.at("permission_flags");
      n.login_flag = pf.value("login", false);
      n.execute_flag = pf.value("execute", false);
      n.permission_head = pf.value("head", false);
    }
    if (jn.contains("parameterized")) {
      const std::string p = jn.at("parameterized").get<std::string>();
      if (p == "login")
        n.parameterized = Parameterized::login;
      else if (p == "execute")
        n.parameterized = Parameterized::execute;
      else
        throw std::runtime_error("unknown parameterized kind '" + p + "' on " + n.slug);
      if (n.kind != NodeKind::exploit_goal)
        throw std::runtime_error("parameterized node must be an exploit goal: " + n.slug);
    }
    if (jn.contains("requires")) {
      for (const auto& tag : jn.at("requires")) n.requires_tags.push_back(tag.get<std::string>());
    }
    t.nodes.push_back(std::move(n));
  }

  for (const auto& je : doc.at("edges")) {
    TemplateEdge e;
    e.from = je.at("from").get<std::string>();
    e.to = je.at("to").get<std::string>();
    e.predicted = je.value("predicted", false);
    t.edges.push_back(std::move(e));
  }

  t.build_index();
  check_acyclic(t);

  bool has_goal = std::any_of(t.nodes.begin(), t.nodes.end(),
                              [](const TemplateNode& n) { return n.kind == NodeKind::exploit_goal; });
  if (!has_goal) throw std::runtime_error("template has no exploit goal node");

  return t;
}

MasterTemplate load_master_template_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template file: " + path);
  Json doc = Json::parse(in);
  return load_master_template(doc);
}

bool tag_satisfied(const std::string& tag, DeviceCategory category, const Subcategories& sub) {
  if (tag == "updatable") return sub.updatability == Updatability::updatable;
  if (tag == "external") return sub.network_access == NetworkAccess::external;
  if (tag == "send") return sub.comms == Comms::send || sub.comms == Comms::send_and_receive;
  if (tag == "receive") return sub.comms == Comms::receive || sub.comms == Comms::send_and_receive;
  if (tag.rfind("cat:", 0) == 0) return device_category_from_string(tag.substr(4)) == category;
  throw std::invalid_argument("unknown requirement tag: '" + tag + "'");
}

bool DeviceTemplate::contains(const std::string& slug) const {
  int idx = master->node_index(slug);
  if (idx < 0) return false;
  return std::binary_search(node_indices.begin(), node_indices.end(), idx);
}

std::vector<const TemplateNode*> DeviceTemplate::base_nodes() const {
  std::vector<const TemplateNode*> out;
  for (int i : node_indices) {
    if (master->nodes[i].parameterized == Parameterized::no) out.push_back(&master->nodes[i]);
  }
  return out;
}

std::vector<std::string> DeviceTemplate::goal_slugs() const {
  std::vector<std::string> out;
  for (const auto* n : base_nodes()) {
    if (n->kind == NodeKind::exploit_goal) out.push_back(n->slug);
  }
  return out;
}

std::vector<std::string> DeviceTemplate::entry_slugs() const {
  std::vector<std::string> out;
  for (const auto* n : base_nodes()) {
    if (n->kind == NodeKind::entry) out.push_back(n->slug);
  }
  return out;
}

DeviceTemplate derive_device_template(const MasterTemplate& m, DeviceCategory category,
                                      const Subcategories& sub) {
  DeviceTemplate t;
  t.category = category;
  t.subcategories = sub;
  t.master = &m;

  const int n = static_cast<int>(m.nodes.size());
  std::vector<bool> keep(n, false);
  for (int i = 0; i < n; ++i) {
    bool ok = true;
    bool any_cat_tag = false;
    bool cat_ok = false;
    for (const auto& tag : m.nodes[i].requires_tags) {
      if (tag.rfind("cat:", 0) == 0) {
        any_cat_tag = true;
        cat_ok = cat_ok || tag_satisfied(tag, category, sub);
      } else if (!tag_satisfied(tag, category, sub)) {
        ok = false;
        break;
      }
    }
    keep[i] = ok && (!any_cat_tag || cat_ok);
  }

  // Prune everything that cannot reach a retained goal. Parameterized goals
  // count as goals here: they become real nodes once a grant is held.
  std::vector<std::vector<int>> parents(n);
  for (const auto& e : m.edges) {
    int from = m.node_index(e.from);
    int to = m.node_index(e.to);
    if (keep[from] && keep[to]) parents[to].push_back(from);
  }
  std::vector<bool> reaches_goal(n, false);
  std::deque<int> q;
  for (int i = 0; i < n; ++i) {
    if (keep[i] && m.nodes[i].kind == NodeKind::exploit_goal) {
      reaches_goal[i] = true;
      q.push_back(i);
    }
  }
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int p : parents[u]) {
      if (!reaches_goal[p]) {
        reaches_goal[p] = true;
        q.push_back(p);
      }
    }
  }
  for (int i = 0; i < n; ++i) keep[i] = keep[i] && reaches_goal[i];

  for (int i = 0; i < n; ++i) {
    if (keep[i]) t.node_indices.push_back(i);
  }
  for (const auto& e : m.edges) {
    int from = m.node_index(e.from);
    int to = m.node_index(e.to);
    if (keep[from] && keep[to]) t.edge_indices.emplace_back(from, to);
  }
  return t;
}

}  // namespace gravitas
