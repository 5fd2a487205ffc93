#include "gravitas/system_builder.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gravitas {


namespace {

// Node-id layout: "<device>/<permission or '-'>/<slug>". Parameterized goal
// instances extend the slug with "@<target>@<permission>".
std::string base_id(const std::string& device, const std::string& slug) {
  return device + "/-/" + slug;
}

std::string copy_id(const std::string& device, const std::string& permission,
                    const std::string& slug) {
  return device + "/" + permission + "/" + slug;
}

std::string param_slug(const std::string& slug, const std::string& target,
                       const std::string& permission) {
  return slug + "@" + target + "@" + permission;
}

std::string replace_all(std::string text, const std::string& what, const std::string& with) {
  std::size_t pos = 0;
  while ((pos = text.find(what, pos)) != std::string::npos) {
    text.replace(pos, what.size(), with);
    pos += with.size();
  }
  return text;
}

double resolve_score_value(const Json& v, const FactorTable& table, bool accessibility,
                           std::vector<std::string>& problems, const std::string& where) {
  double score = -1.0;
  if (v.is_number()) {
    score = v.get<double>();
  } else if (v.is_string()) {
    try {
      score = accessibility ? table.accessibility_level(v.get<std::string>())
                            : table.impact_level(v.get<std::string>());
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
      return 0.0;
    }
  } else {
    problems.push_back(where + ": score must be a number or level name");
    return 0.0;
  }
  if (score < 0.0 || score > 1.0) {
    problems.push_back(where + ": score " + std::to_string(score) + " outside [0,1]");
    return 0.0;
  }
  return score;
}

ScoreAssignment parse_score_assignment(const Json& v, const FactorTable& table, bool accessibility,
                                       std::vector<std::string>& problems,
                                       const std::string& where) {
  ScoreAssignment out;
  if (v.is_array()) {
    out.is_list = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.list.push_back(resolve_score_value(v[i], table, accessibility, problems,
                                             where + "[" + std::to_string(i) + "]"));
    }
  } else if (v.is_object()) {
    out.is_map = true;
    for (const auto& [slug, item] : v.items()) {
      out.by_slug[slug] = resolve_score_value(item, table, accessibility, problems,
                                              where + "." + slug);
    }
  } else {
    problems.push_back(where + ": expected a list or a slug-keyed object");
  }
  return out;
}

std::vector<PermissionGrant> parse_grants(const Json& arr, PermissionType type,
                                          const std::string& target,
                                          std::vector<std::string>& problems) {
  std::vector<PermissionGrant> out;
  for (const auto& g : arr) {
    PermissionGrant grant;
    grant.type = type;
    grant.target = target;
    if (g.is_object()) {
      if (!g.contains("name") || !g.contains("devices")) {
        problems.push_back("device '" + target + "': permission entries need 'name' and 'devices'");
        continue;
      }
      grant.name = g.at("name").get<std::string>();
      for (const auto& h : g.at("devices")) grant.holders.push_back(h.get<std::string>());
    } else {
      problems.push_back("device '" + target + "': permission entry must be an object");
      continue;
    }
    if (grant.name.find('/') != std::string::npos || grant.name.empty() || grant.name == "-") {
      problems.push_back("device '" + target + "': invalid permission name '" + grant.name + "'");
      continue;
    }
    // A device holding credentials to itself would close a cycle inside its
    // own DAG.
    if (std::find(grant.holders.begin(), grant.holders.end(), target) != grant.holders.end()) {
      problems.push_back("device '" + target + "': permission '" + grant.name +
                         "' lists the device itself as a holder");
      continue;
    }
    out.push_back(std::move(grant));
  }
  return out;
}

}  // namespace

const DeviceSpecEntry* SystemSpec::find_device(const std::string& name) const {
  for (const auto& d : devices) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

SystemSpec parse_system_spec(const Json& doc, const FactorTable& table) {
  std::vector<std::string> problems;
  SystemSpec spec;

  if (!doc.is_object() || !doc.contains("devices") || !doc.at("devices").is_array())
    throw std::runtime_error("system spec must be an object with a 'devices' array");

  std::set<std::string> names;
  for (const auto& jd : doc.at("devices")) {
    DeviceSpecEntry dev;
    if (!jd.contains("name") || !jd.contains("category") || !jd.contains("subcategory")) {
      problems.push_back("every device needs 'name', 'category' and 'subcategory'");
      continue;
    }
    dev.name = jd.at("name").get<std::string>();
    if (dev.name.empty() || dev.name.find('/') != std::string::npos) {
      problems.push_back("invalid device name '" + dev.name + "'");
      continue;
    }
    if (!names.insert(dev.name).second) {
      problems.push_back("duplicate device name '" + dev.name + "'");
      continue;
    }
    try {
      dev.category = device_category_from_string(jd.at("category").get<std::string>());
      const auto& sub = jd.at("subcategory");
      dev.subcategories.updatability =
          updatability_from_string(sub.value("updatability", "updatable"));
      dev.subcategories.network_access =
          network_access_from_string(sub.value("network_access", "local"));
      dev.subcategories.comms = comms_from_string(sub.value("comms", "send_and_receive"));
    } catch (const std::exception& e) {
      problems.push_back("device '" + dev.name + "': " + e.what());
      continue;
    }
    dev.device_set = jd.value("device_set", "");

    if (jd.contains("impact")) {
      const auto& imp = jd.at("impact");
      if (imp.contains("confidentiality"))
        dev.confidentiality = parse_score_assignment(imp.at("confidentiality"), table, false,
                                                     problems, dev.name + ".confidentiality");
      if (imp.contains("integrity"))
        dev.integrity = parse_score_assignment(imp.at("integrity"), table, false, problems,
                                               dev.name + ".integrity");
      if (imp.contains("availability"))
        dev.availability = parse_score_assignment(imp.at("availability"), table, false, problems,
                                                  dev.name + ".availability");
    }
    if (jd.contains("accessibility"))
      dev.accessibility = parse_score_assignment(jd.at("accessibility"), table, true, problems,
                                                 dev.name + ".accessibility");

    if (jd.contains("login_permissions"))
      dev.login_permissions =
          parse_grants(jd.at("login_permissions"), PermissionType::login, dev.name, problems);
    if (jd.contains("execute_permissions"))
      dev.execute_permissions = parse_grants(jd.at("execute_permissions"),
                                             PermissionType::execute_command, dev.name, problems);
    dev.general_permissions = jd.value("general_permissions", false);
    if (jd.contains("local_network")) {
      for (const auto& n : jd.at("local_network")) dev.local_network.push_back(n.get<std::string>());
    }

    // Permission names must be unique per device so copy node ids stay unique.
    std::set<std::string> perm_names;
    for (const auto& g : dev.login_permissions) {
      if (!perm_names.insert(g.name).second)
        problems.push_back("device '" + dev.name + "': duplicate permission name '" + g.name + "'");
    }
    for (const auto& g : dev.execute_permissions) {
      if (!perm_names.insert(g.name).second)
        problems.push_back("device '" + dev.name + "': duplicate permission name '" + g.name + "'");
    }

    spec.devices.push_back(std::move(dev));
  }

  // Dangling references: permission holders and local-network members must
  // name existing devices.
  for (const auto& dev : spec.devices) {
    auto check_ref = [&](const std::string& ref, const char* what) {
      if (names.find(ref) == names.end())
        problems.push_back("device '" + dev.name + "': " + what + " references unknown device '" +
                           ref + "'");
    };
    for (const auto& g : dev.login_permissions)
      for (const auto& h : g.holders) check_ref(h, "login permission");
    for (const auto& g : dev.execute_permissions)
      for (const auto& h : g.holders) check_ref(h, "execute permission");
    for (const auto& n : dev.local_network) check_ref(n, "local network list");
  }

  if (doc.contains("parameters")) {
    const auto& params = doc.at("parameters");
    if (params.contains("propagation")) {
      const auto& p = params.at("propagation");
      spec.propagation.sum_ratio = p.value("sum_ratio", spec.propagation.sum_ratio);
      spec.propagation.exp_weight = p.value("exp_weight", spec.propagation.exp_weight);
      spec.propagation.max_cycle = p.value("max_cycle", spec.propagation.max_cycle);
      spec.propagation.activation_base =
          p.value("activation_base", spec.propagation.activation_base);
      try {
        spec.propagation.validate();
      } catch (const std::exception& e) {
        problems.push_back(std::string("parameters.propagation: ") + e.what());
      }
    }
    if (params.contains("optimizer")) spec.optimizer_params = params.at("optimizer");
    spec.k = params.value("k", -1);
    spec.defense_catalog = params.value("defense_catalog", "");
    if (params.contains("auto_fill")) {
      const auto& af = params.at("auto_fill");
      AutoFill fill;
      fill.seed = af.value("seed", 0ULL);
      try {
        if (af.contains("impact_distribution"))
          fill.impact = DistSpec::parse(af.at("impact_distribution"));
        if (af.contains("accessibility_distribution"))
          fill.accessibility = DistSpec::parse(af.at("accessibility_distribution"));
      } catch (const std::exception& e) {
        problems.push_back(std::string("parameters.auto_fill: ") + e.what());
      }
      spec.auto_fill = fill;
    }
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "system spec has " << problems.size() << " problem(s):";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw std::runtime_error(msg.str());
  }
  return spec;
}

SystemSpec parse_system_spec_file(const std::string& path, const FactorTable& table) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system spec: " + path);
  return parse_system_spec(Json::parse(in), table);
}

std::vector<std::pair<std::string, std::string>> device_adjacency(const SystemSpec& spec) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& dev : spec.devices) {
    for (const auto& other : dev.local_network) {
      if (other == dev.name) continue;
      pairs.insert(dev.name < other ? std::make_pair(dev.name, other)
                                    : std::make_pair(other, dev.name));
    }
  }
  return {pairs.begin(), pairs.end()};
}

std::vector<PermissionGrant> all_grants(const SystemSpec& spec) {
  std::vector<PermissionGrant> out;
  for (const auto& dev : spec.devices) {
    out.insert(out.end(), dev.login_permissions.begin(), dev.login_permissions.end());
    out.insert(out.end(), dev.execute_permissions.begin(), dev.execute_permissions.end());
  }
  std::sort(out.begin(), out.end(), [](const PermissionGrant& a, const PermissionGrant& b) {
    if (a.target != b.target) return a.target < b.target;
    return a.name < b.name;
  });
  return out;
}

std::vector<HeldGrant> grants_held_by(const SystemSpec& spec, const std::string& holder) {
  std::vector<HeldGrant> out;
  for (const auto& grant : all_grants(spec)) {
    if (std::find(grant.holders.begin(), grant.holders.end(), holder) != grant.holders.end())
      out.push_back({grant.target, grant.name, grant.type});
  }
  // A device with general permissions is controllable by everything adjacent
  // to it: each neighbour holds a synthesized execute-style "general" grant.
  for (const auto& [a, b] : device_adjacency(spec)) {
    const std::string* other = nullptr;
    if (a == holder) other = &b;
    if (b == holder) other = &a;
    if (!other) continue;
    const DeviceSpecEntry* dev = spec.find_device(*other);
    if (dev && dev->general_permissions)
      out.push_back({dev->name, "general", PermissionType::general});
  }
  std::sort(out.begin(), out.end(), [](const HeldGrant& a, const HeldGrant& b) {
    if (a.target != b.target) return a.target < b.target;
    return a.permission < b.permission;
  });
  return out;
}

namespace {

std::map<std::string, double> resolve_assignment(const ScoreAssignment& assign,
                                                 const std::vector<std::string>& slugs,
                                                 const std::string& device, const char* what) {
  std::map<std::string, double> out;
  if (assign.is_list) {
    if (assign.list.size() != slugs.size()) {
      std::ostringstream msg;
      msg << "device '" << device << "': " << what << " list has " << assign.list.size()
          << " entries, expected " << slugs.size() << " (";
      for (std::size_t i = 0; i < slugs.size(); ++i) msg << (i ? ", " : "") << slugs[i];
      msg << ")";
      throw std::runtime_error(msg.str());
    }
    for (std::size_t i = 0; i < slugs.size(); ++i) out[slugs[i]] = assign.list[i];
  } else if (assign.is_map) {
    for (const auto& [slug, value] : assign.by_slug) {
      if (std::find(slugs.begin(), slugs.end(), slug) == slugs.end())
        throw std::runtime_error("device '" + device + "': " + what +
                                 " references slug '" + slug + "' not present in its template");
      out[slug] = value;
    }
  }
  return out;
}

}  // namespace

DeviceGraph instantiate_device(const DeviceSpecEntry& dev, const DeviceTemplate& tmpl,
                               const std::vector<PermissionGrant>& grants_on_device,
                               const std::vector<HeldGrant>& grants_held,
                               const FactorTable& table) {
  DeviceGraph g;
  g.info.name = dev.name;
  g.info.category = dev.category;
  g.info.subcategories = dev.subcategories;
  g.info.device_set = dev.device_set;

  const auto base_nodes = tmpl.base_nodes();
  const auto goal_slugs = tmpl.goal_slugs();
  const auto entry_slugs = tmpl.entry_slugs();

  const auto conf = resolve_assignment(dev.confidentiality, goal_slugs, dev.name, "confidentiality");
  const auto integ = resolve_assignment(dev.integrity, goal_slugs, dev.name, "integrity");
  const auto avail = resolve_assignment(dev.availability, goal_slugs, dev.name, "availability");
  const auto access = resolve_assignment(dev.accessibility, entry_slugs, dev.name, "accessibility");

  auto lookup = [](const std::map<std::string, double>& m, const std::string& slug, double dflt) {
    auto it = m.find(slug);
    return it == m.end() ? dflt : it->second;
  };

  std::unordered_map<std::string, int> idx;
  auto add_node = [&](VulnNode n) {
    idx[n.id] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(std::move(n));
  };

  auto make_node = [&](const TemplateNode& tn) {
    VulnNode n;
    n.slug = tn.slug;
    n.label = tn.label;
    n.kind = tn.kind;
    n.device_id = dev.name;
    n.template_factors = tn.factors;
    n.factors = tn.factors;
    n.physical = tn.physical;
    if (tn.kind == NodeKind::exploit_goal) {
      n.impact.confidentiality = lookup(conf, tn.slug, 0.0);
      n.impact.integrity = lookup(integ, tn.slug, 0.0);
      n.impact.availability = lookup(avail, tn.slug, 0.0);
    }
    if (tn.kind == NodeKind::entry) n.accessibility = lookup(access, tn.slug, table.acc_low);
    return n;
  };

  // Base copy: every retained non-parameterized node.
  for (const auto* tn : base_nodes) {
    VulnNode n = make_node(*tn);
    n.id = base_id(dev.name, tn->slug);
    add_node(std::move(n));
  }

  // One permission-subgraph copy per grant on this device. The copy holds the
  // nodes flagged for the grant type plus the head node the inter-device
  // edges land on.
  struct Copy {
    const PermissionGrant* grant;
    std::set<std::string> slugs;
  };
  std::vector<Copy> copies;
  std::vector<const PermissionGrant*> ordered_grants;
  for (const auto& gr : grants_on_device)
    if (gr.type == PermissionType::login) ordered_grants.push_back(&gr);
  for (const auto& gr : grants_on_device)
    if (gr.type == PermissionType::execute_command) ordered_grants.push_back(&gr);

  for (const auto* gr : ordered_grants) {
    Copy copy;
    copy.grant = gr;
    for (const auto* tn : base_nodes) {
      const bool flagged = (gr->type == PermissionType::login && tn->login_flag) ||
                           (gr->type == PermissionType::execute_command && tn->execute_flag);
      if (flagged || tn->permission_head) copy.slugs.insert(tn->slug);
    }
    for (const auto& slug : copy.slugs) {
      VulnNode n = make_node(tmpl.master->node(slug));
      n.id = copy_id(dev.name, gr->name, slug);
      n.permission = gr->name;
      n.permission_type = gr->type;
      add_node(std::move(n));
    }
    copies.push_back(std::move(copy));
  }

  // Parameterized goal instances for every grant this device holds.
  struct ParamInstance {
    std::string slug;  // template slug of the parameterized goal
    std::string id;
  };
  std::vector<ParamInstance> param_instances;
  for (const auto& held : grants_held) {
    for (int ti : tmpl.node_indices) {
      const TemplateNode& tn = tmpl.master->nodes[ti];
      if (tn.parameterized == Parameterized::no) continue;
      const bool match =
          (held.type == PermissionType::login && tn.parameterized == Parameterized::login) ||
          ((held.type == PermissionType::execute_command || held.type == PermissionType::general) &&
           tn.parameterized == Parameterized::execute);
      if (!match) continue;
      VulnNode n = make_node(tn);
      n.slug = param_slug(tn.slug, held.target, held.permission);
      n.label = replace_all(replace_all(tn.label, "device i", held.target), "permissions j",
                            "permissions " + held.permission);
      n.label = replace_all(n.label, "permission j", "permission " + held.permission);
      n.id = base_id(dev.name, n.slug);
      add_node(n);
      param_instances.push_back({tn.slug, n.id});
    }
  }

  // Edges. Base copies take every retained template edge; permission copies
  // take edges internal to the copy plus copy->base exits. Edges from the
  // base into a copy are not added: a copy is entered only through its head.
  auto add_edge = [&](const std::string& from, const std::string& to, bool predicted) {
    auto fi = idx.find(from);
    auto ti = idx.find(to);
    if (fi == idx.end() || ti == idx.end()) return;
    g.edges.emplace_back(fi->second, ti->second);
    g.edge_predicted.push_back(predicted);
  };

  std::map<std::pair<std::string, std::string>, bool> predicted_map;
  for (const auto& e : tmpl.master->edges) predicted_map[{e.from, e.to}] = e.predicted;

  for (const auto& [from_i, to_i] : tmpl.edge_indices) {
    const TemplateNode& u = tmpl.master->nodes[from_i];
    const TemplateNode& v = tmpl.master->nodes[to_i];
    if (u.parameterized != Parameterized::no) continue;  // goals have no out-edges

    const bool predicted = predicted_map[{u.slug, v.slug}];

    if (v.parameterized != Parameterized::no) {
      // Every instance of u (base and copies) feeds every instance of this
      // parameterized goal.
      for (const auto& inst : param_instances) {
        if (inst.slug != v.slug) continue;
        add_edge(base_id(dev.name, u.slug), inst.id, predicted);
        for (const auto& copy : copies) {
          if (copy.slugs.count(u.slug))
            add_edge(copy_id(dev.name, copy.grant->name, u.slug), inst.id, predicted);
        }
      }
      continue;
    }

    add_edge(base_id(dev.name, u.slug), base_id(dev.name, v.slug), predicted);
    for (const auto& copy : copies) {
      const bool u_in = copy.slugs.count(u.slug) > 0;
      const bool v_in = copy.slugs.count(v.slug) > 0;
      if (u_in && v_in) {
        add_edge(copy_id(dev.name, copy.grant->name, u.slug),
                 copy_id(dev.name, copy.grant->name, v.slug), predicted);
      } else if (u_in) {
        add_edge(copy_id(dev.name, copy.grant->name, u.slug), base_id(dev.name, v.slug), predicted);
      }
    }
  }

  return g;
}

BuildResult connect_devices(std::vector<DeviceGraph> devices, const SystemSpec& spec) {
  BuildResult result;
  std::vector<std::pair<std::string, std::string>> inter;

  std::unordered_map<std::string, const DeviceGraph*> by_name;
  for (const auto& d : devices) by_name[d.info.name] = &d;
  auto has_node = [&](const std::string& device, const std::string& id) {
    auto it = by_name.find(device);
    return it != by_name.end() && it->second->find(id) >= 0;
  };

  auto connect = [&](const std::string& from_dev, const std::string& from_id,
                     const std::string& to_dev, const std::string& to_id, const char* rule) {
    if (!has_node(from_dev, from_id) || !has_node(to_dev, to_id)) {
      result.warnings.push_back(
          {"connect-skip", std::string(rule) + ": node missing for edge " + from_id + " -> " + to_id});
      return;
    }
    inter.emplace_back(from_id, to_id);
  };

  // (a)/(b): permission grants. Login grants wire the holder's
  // "obtain authentication key" goal into the target's permission copy and
  // the "open access" goal into the target's base head node; execute grants
  // wire "manipulate commands" into the permission copy.
  int grant_links = 0;
  for (const auto& grant : all_grants(spec)) {
    for (const auto& holder : grant.holders) {
      grant_links++;
      const std::string head_copy = copy_id(grant.target, grant.name, "access-network-address");
      const std::string head_base = base_id(grant.target, "access-network-address");
      if (grant.type == PermissionType::login) {
        connect(holder, base_id(holder, param_slug("obtain-auth-key", grant.target, grant.name)),
                grant.target, head_copy, "login permission");
        connect(holder, base_id(holder, param_slug("obtain-open-access", grant.target, grant.name)),
                grant.target, head_base, "open access");
      } else {
        connect(holder,
                base_id(holder, param_slug("manipulate-commands", grant.target, grant.name)),
                grant.target, head_copy, "execute permission");
      }
    }
  }

  // General permissions: every adjacent device can steer the device directly,
  // landing on the base head node (no credential subgraph involved).
  const auto adjacency = device_adjacency(spec);
  for (const auto& [a, b] : adjacency) {
    for (const auto& [holder, target] : {std::make_pair(a, b), std::make_pair(b, a)}) {
      const DeviceSpecEntry* t = spec.find_device(target);
      if (!t || !t->general_permissions) continue;
      grant_links++;
      connect(holder, base_id(holder, param_slug("manipulate-commands", target, "general")), target,
              base_id(target, "access-network-address"), "general permission");
    }
  }

  // (c)/(d): topology rules.
  for (const auto& [a, b] : adjacency) {
    const DeviceSpecEntry* da = spec.find_device(a);
    const DeviceSpecEntry* db = spec.find_device(b);
    if (!da || !db) continue;

    auto is_router = [](const DeviceSpecEntry& d) {
      return d.category == DeviceCategory::router_gateway;
    };
    auto is_sensor_like = [](const DeviceSpecEntry& d) {
      return d.category == DeviceCategory::sensor || d.category == DeviceCategory::actuator;
    };
    auto is_controller = [](const DeviceSpecEntry& d) {
      return d.category == DeviceCategory::local_controller;
    };

    // (c) sensor/actuator wired to a local controller: tamper-side nodes feed
    // the controller's network ports. Applies with whichever source node the
    // reduced template kept.
    for (const auto& [s, c] : {std::make_pair(da, db), std::make_pair(db, da)}) {
      if (!is_sensor_like(*s) || !is_controller(*c)) continue;
      const std::string target = base_id(c->name, "access-ports-network");
      for (const char* slug : {"sensor-tampering", "no-digital-signature-sensor-firmware"}) {
        if (has_node(s->name, base_id(s->name, slug)))
          connect(s->name, base_id(s->name, slug), c->name, target, "sensor-controller link");
      }
    }

    // (d) router adjacency.
    if (is_router(*da) && is_router(*db)) {
      connect(da->name, base_id(da->name, "no-strong-authentication"), db->name,
              base_id(db->name, "no-strong-authentication"), "router-router link");
      connect(db->name, base_id(db->name, "no-strong-authentication"), da->name,
              base_id(da->name, "no-strong-authentication"), "router-router link");
    } else if (is_router(*da) != is_router(*db)) {
      const DeviceSpecEntry* router = is_router(*da) ? da : db;
      const DeviceSpecEntry* other = is_router(*da) ? db : da;
      connect(router->name, base_id(router->name, "no-strong-authentication"), other->name,
              base_id(other->name, "access-requested"), "router-device link");
    }
  }

  result.connection_count = static_cast<int>(adjacency.size()) + grant_links;
  result.graph = SystemGraph::assemble(std::move(devices), inter);
  return result;
}

namespace {

// Draws the scores the administrator left unset from the system spec's auto-fill
// distributions. One pass over devices in spec order and template slugs in
// document order keeps the stream reproducible from the recorded seed.
void apply_auto_fill(SystemSpec& spec, const std::map<std::string, DeviceTemplate>& templates,
                     const std::map<std::string, std::string>& template_key) {
  if (!spec.auto_fill) return;
  Rng rng(spec.auto_fill->seed);
  for (auto& dev : spec.devices) {
    const DeviceTemplate& tmpl = templates.at(template_key.at(dev.name));
    auto fill_impact = [&](ScoreAssignment& assign) {
      if (assign.is_list) return;
      assign.is_map = true;
      for (const auto& slug : tmpl.goal_slugs()) {
        if (!assign.by_slug.count(slug)) assign.by_slug[slug] = spec.auto_fill->impact.sample(rng);
      }
    };
    fill_impact(dev.confidentiality);
    fill_impact(dev.integrity);
    fill_impact(dev.availability);
    if (!dev.accessibility.is_list) {
      dev.accessibility.is_map = true;
      for (const auto& slug : tmpl.entry_slugs()) {
        if (!dev.accessibility.by_slug.count(slug))
          dev.accessibility.by_slug[slug] = spec.auto_fill->accessibility.sample(rng);
      }
    }
  }
}

}  // namespace

BuildResult build_system(const SystemSpec& spec_in, const MasterTemplate& master,
                         const FactorTable& table, bool parallel) {
  SystemSpec spec = spec_in;
  // Templates are cheap to derive; share them across devices with the same
  // (category, subcategory) tuple.
  std::map<std::string, DeviceTemplate> templates;
  std::map<std::string, std::string> template_key;
  for (const auto& dev : spec.devices) {
    std::string key = std::string(to_string(dev.category)) + "|" +
                      to_string(dev.subcategories.updatability) + "|" +
                      to_string(dev.subcategories.network_access) + "|" +
                      to_string(dev.subcategories.comms);
    template_key[dev.name] = key;
    if (!templates.count(key))
      templates.emplace(key, derive_device_template(master, dev.category, dev.subcategories));
  }

  apply_auto_fill(spec, templates, template_key);

  const int n = static_cast<int>(spec.devices.size());
  std::vector<DeviceGraph> graphs(n);
  std::vector<std::string> errors(n);

  auto build_one = [&](int i) {
    const auto& dev = spec.devices[i];
    std::string key = std::string(to_string(dev.category)) + "|" +
                      to_string(dev.subcategories.updatability) + "|" +
                      to_string(dev.subcategories.network_access) + "|" +
                      to_string(dev.subcategories.comms);
    std::vector<PermissionGrant> on_device = dev.login_permissions;
    on_device.insert(on_device.end(), dev.execute_permissions.begin(),
                     dev.execute_permissions.end());
    try {
      graphs[i] = instantiate_device(dev, templates.at(key), on_device,
                                     grants_held_by(spec, dev.name), table);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) build_one(i);
  } else {
    for (int i = 0; i < n; ++i) build_one(i);
  }

  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error(err);
  }

  return connect_devices(std::move(graphs), spec);
}

}  // namespace gravitas
