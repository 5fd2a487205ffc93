#include "gravitas/tasc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace gravitas {

GenParams GenParams::defaults() {
  GenParams p;
  p.category_mix = {
      {DeviceCategory::router_gateway, 0.12}, {DeviceCategory::local_controller, 0.16},
      {DeviceCategory::sensor, 0.30},         {DeviceCategory::actuator, 0.18},
      {DeviceCategory::user_device, 0.14},    {DeviceCategory::cloud_server, 0.10},
  };
  p.connection_degree["default"] = DistSpec::categorical({1.0, 2.0}, {0.75, 0.25});
  p.impact_dist["default"] = DistSpec::categorical({0.0, 0.2, 0.56}, {0.35, 0.35, 0.30});
  p.accessibility_dist = DistSpec::categorical({0.4, 0.6, 0.8}, {0.5, 0.3, 0.2});
  p.defense_cost_dist = DistSpec::categorical({1.0, 2.0, 3.0}, {0.4, 0.4, 0.2});
  p.defense_density = 1.5;
  return p;
}

void GenParams::validate() const {
  if (device_count < 1) throw std::invalid_argument("device count must be >= 1");
  double total = 0.0;
  for (const auto& [cat, share] : category_mix) {
    if (share < 0.0) throw std::invalid_argument("category mix share must be >= 0");
    total += share;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("category mix proportions must sum to 1");
  for (double prob : {p_updatable, p_external, p_send_only, p_receive_only,
                      permission_grant_probability}) {
    if (prob < 0.0 || prob > 1.0) throw std::invalid_argument("probability outside [0,1]");
  }
  if (defense_density < 0.0) throw std::invalid_argument("defense density must be >= 0");
}

GenParams GenParams::parse(const Json& j) {
  GenParams p = defaults();
  p.seed = j.value("seed", p.seed);
  p.device_count = j.value("device_count", p.device_count);
  if (j.contains("category_mix")) {
    p.category_mix.clear();
    for (const auto& [key, value] : j.at("category_mix").items())
      p.category_mix[device_category_from_string(key)] = value.get<double>();
  }
  if (j.contains("subcategory_probabilities")) {
    const auto& s = j.at("subcategory_probabilities");
    p.p_updatable = s.value("updatable", p.p_updatable);
    p.p_external = s.value("external", p.p_external);
    p.p_send_only = s.value("send_only", p.p_send_only);
    p.p_receive_only = s.value("receive_only", p.p_receive_only);
  }
  if (j.contains("connection_degree")) {
    for (const auto& [key, value] : j.at("connection_degree").items())
      p.connection_degree[key] = DistSpec::parse(value);
  }
  p.permission_grant_probability =
      j.value("permission_grant_probability", p.permission_grant_probability);
  if (j.contains("impact_distribution")) {
    for (const auto& [key, value] : j.at("impact_distribution").items())
      p.impact_dist[key] = DistSpec::parse(value);
  }
  if (j.contains("accessibility_distribution"))
    p.accessibility_dist = DistSpec::parse(j.at("accessibility_distribution"));
  if (j.contains("defense_cost_distribution"))
    p.defense_cost_dist = DistSpec::parse(j.at("defense_cost_distribution"));
  p.defense_density = j.value("defense_density", p.defense_density);
  p.validate();
  return p;
}

namespace {

const char* category_prefix(DeviceCategory c) {
  switch (c) {
    case DeviceCategory::router_gateway: return "router";
    case DeviceCategory::local_controller: return "controller";
    case DeviceCategory::sensor: return "sensor";
    case DeviceCategory::actuator: return "actuator";
    case DeviceCategory::user_device: return "user-device";
    case DeviceCategory::cloud_server: return "cloud";
  }
  return "device";
}

// Defense archetypes the generator draws from. Node/edge selectors reference
// master-template slugs; an archetype is applicable to a device only when the
// device's derived template kept at least one of the referenced nodes.
struct Archetype {
  const char* name;
  std::vector<DeviceCategory> categories;  // empty = any
  std::vector<std::pair<const char*, const char*>> node_updates;            // slug, level
  std::vector<std::tuple<const char*, const char*, const char*>> edge_updates;  // from, to, level
  double cost_scale;
};

const std::vector<Archetype>& archetypes() {
  static const std::vector<Archetype> kArchetypes = {
      {"multifactor-authentication", {}, {{"no-mutual-authentication", "definite"}}, {}, 1.0},
      {"password-hashing", {}, {{"plaintext-key-in-memory", "definite"}}, {}, 0.5},
      {"software-whitelisting", {}, {{"download-unwhitelisted-malware", "definite"}}, {}, 0.5},
      {"port-lockdown",
       {DeviceCategory::sensor, DeviceCategory::actuator, DeviceCategory::local_controller},
       {{"sensor-tampering", "definite"},
        {"side-channel-analysis", "definite"},
        {"exposed-debug-port", "definite"}},
       {},
       1.5},
      {"strong-passwords", {}, {}, {{"access-requested", "no-strong-authentication", "definite"}}, 1.0},
      {"ssl-pinning", {}, {{"no-ssl-pinning", "definite"}}, {}, 0.5},
      {"signed-firmware",
       {DeviceCategory::sensor, DeviceCategory::actuator},
       {{"no-digital-signature-sensor-firmware", "definite"}},
       {},
       1.0},
      {"rate-limiting",
       {},
       {{"resource-exhaustion", "definite"}, {"dos-attack", "temporary"}},
       {},
       1.0},
      {"network-segmentation",
       {DeviceCategory::router_gateway},
       {},
       {{"no-strong-authentication", "access-requested", "temporary"}},
       1.5},
      {"disk-encryption", {DeviceCategory::user_device}, {{"physical-theft", "definite"}}, {}, 0.5},
      {"intrusion-detection",
       {DeviceCategory::local_controller, DeviceCategory::router_gateway,
        DeviceCategory::cloud_server},
       {{"access-requested", "workaround"}},
       {},
       1.5},
      {"secure-pairing", {}, {{"bluetooth-pairing-weakness", "definite"}}, {}, 0.5},
      {"api-authentication",
       {DeviceCategory::cloud_server, DeviceCategory::user_device},
       {{"unauthenticated-api", "definite"}},
       {},
       1.0},
      {"channel-encryption", {}, {{"unencrypted-broadcast", "definite"}}, {}, 1.0},
      {"credential-vault",
       {},
       {{"intercept-credentials", "temporary"}, {"hardcoded-crypto-key", "definite"}},
       {},
       1.0},
      {"wpa3-enforcement",
       {DeviceCategory::router_gateway},
       {{"open-wifi-network", "definite"}},
       {},
       1.0},
      {"user-training",
       {DeviceCategory::user_device},
       {{"phishing-message", "temporary"}},
       {},
       0.5},
      {"default-credential-rotation", {}, {{"default-credentials", "definite"}}, {}, 0.5},
      {"storage-hardening",
       {DeviceCategory::cloud_server},
       {{"cloud-misconfiguration", "definite"}},
       {},
       1.0},
  };
  return kArchetypes;
}

bool archetype_applicable(const Archetype& a, DeviceCategory cat, const DeviceTemplate& tmpl) {
  if (!a.categories.empty() &&
      std::find(a.categories.begin(), a.categories.end(), cat) == a.categories.end())
    return false;
  for (const auto& [slug, level] : a.node_updates) {
    if (tmpl.contains(slug)) return true;
  }
  for (const auto& [from, to, level] : a.edge_updates) {
    if (tmpl.contains(from) && tmpl.contains(to)) return true;
  }
  return false;
}

struct DeviceDraft {
  std::string name;
  DeviceCategory category;
  Subcategories sub;
  std::vector<std::string> local_network;  // hub-side listing
  Json impact_c = Json::object();
  Json impact_i = Json::object();
  Json impact_a = Json::object();
  Json accessibility = Json::object();
  // grants on this device: name -> (type, holders)
  std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> grants;
};

}  // namespace

GeneratedSystem generate_system(const GenParams& p, const MasterTemplate& master,
                                const FactorTable& table) {
  p.validate();
  Rng rng(p.seed);

  // Category counts by largest remainder.
  std::vector<std::pair<DeviceCategory, double>> mix(p.category_mix.begin(), p.category_mix.end());
  std::vector<int> counts(mix.size(), 0);
  int assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    double exact = mix[i].second * p.device_count;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; assigned < p.device_count; ++i, ++assigned) counts[remainders[i % remainders.size()].second]++;

  std::vector<DeviceDraft> devices;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    for (int n = 0; n < counts[i]; ++n) {
      DeviceDraft d;
      d.category = mix[i].first;
      d.name = std::string(category_prefix(d.category)) + "-" + std::to_string(n + 1);
      devices.push_back(std::move(d));
    }
  }

  // Subcategories. Routers and clouds are pinned to the shapes that make them
  // useful as infrastructure; everything else is sampled.
  for (auto& d : devices) {
    if (d.category == DeviceCategory::router_gateway) {
      d.sub = {Updatability::updatable, NetworkAccess::external, Comms::send_and_receive};
      continue;
    }
    if (d.category == DeviceCategory::cloud_server) {
      d.sub = {rng.bernoulli(p.p_updatable) ? Updatability::updatable : Updatability::non_updatable,
               NetworkAccess::external, Comms::send_and_receive};
      continue;
    }
    d.sub.updatability =
        rng.bernoulli(p.p_updatable) ? Updatability::updatable : Updatability::non_updatable;
    d.sub.network_access =
        rng.bernoulli(p.p_external) ? NetworkAccess::external : NetworkAccess::local;
    double roll = rng.uniform01();
    if (roll < p.p_send_only)
      d.sub.comms = Comms::send;
    else if (roll < p.p_send_only + p.p_receive_only)
      d.sub.comms = Comms::receive;
    else
      d.sub.comms = Comms::send_and_receive;
  }

  // Topology: spanning tree over the hubs first, then leaf attachment.
  std::vector<int> hubs;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].category == DeviceCategory::router_gateway) hubs.push_back(static_cast<int>(i));
  }
  if (hubs.empty()) {
    for (std::size_t i = 0; i < devices.size(); ++i) {
      if (devices[i].category == DeviceCategory::local_controller)
        hubs.push_back(static_cast<int>(i));
    }
  }
  if (devices.size() > 1 && hubs.empty())
    throw std::runtime_error(
        "infeasible category mix: multiple devices but no router or controller hubs to attach "
        "them to");

  std::set<std::pair<int, int>> adjacency;
  auto add_adjacent = [&](int a, int b) {
    if (a == b) return;
    adjacency.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    devices[a].local_network.push_back(devices[b].name);
  };

  for (std::size_t i = 1; i < hubs.size(); ++i) {
    int parent = hubs[rng.below(i)];
    add_adjacent(parent, hubs[i]);
  }

  auto degree_for = [&](DeviceCategory cat, DeviceCategory hub_cat) {
    std::string key = std::string(to_string(cat)) + "-" + to_string(hub_cat);
    auto it = p.connection_degree.find(key);
    if (it == p.connection_degree.end()) it = p.connection_degree.find("default");
    if (it == p.connection_degree.end()) return 1;
    return std::max(1, static_cast<int>(std::lround(it->second.sample(rng))));
  };

  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (std::find(hubs.begin(), hubs.end(), static_cast<int>(i)) != hubs.end()) continue;
    if (hubs.empty()) break;  // single-device system
    int want = degree_for(devices[i].category, devices[hubs[0]].category);
    want = std::min(want, static_cast<int>(hubs.size()));
    std::vector<int> pool = hubs;
    for (int n = 0; n < want; ++n) {
      std::size_t j = rng.below(pool.size());
      add_adjacent(pool[j], static_cast<int>(i));
      pool.erase(pool.begin() + static_cast<long>(j));
    }
    // Sensors and actuators also get a direct controller uplink when one
    // exists, mirroring wired sensor/controller pairs.
    if (devices[i].category == DeviceCategory::sensor ||
        devices[i].category == DeviceCategory::actuator) {
      std::vector<int> controllers;
      for (std::size_t c = 0; c < devices.size(); ++c) {
        if (devices[c].category == DeviceCategory::local_controller) controllers.push_back(static_cast<int>(c));
      }
      if (!controllers.empty() && rng.bernoulli(0.8)) {
        add_adjacent(controllers[rng.below(controllers.size())], static_cast<int>(i));
      }
    }
  }

  // Permission grants. Controllers command their attached sensors/actuators;
  // user devices log into controllers and clouds; extra grants appear per
  // adjacency with the configured probability.
  int grant_counter = 0;
  auto add_grant = [&](int target, const std::string& type, int holder) {
    std::string name = "p" + std::to_string(++grant_counter);
    devices[target].grants.push_back({name, type, {devices[holder].name}});
  };

  for (const auto& [a, b] : adjacency) {
    const DeviceCategory ca = devices[a].category;
    const DeviceCategory cb = devices[b].category;
    auto is_leaf = [](DeviceCategory c) {
      return c == DeviceCategory::sensor || c == DeviceCategory::actuator;
    };
    if (ca == DeviceCategory::local_controller && is_leaf(cb)) {
      if (rng.bernoulli(0.8)) add_grant(b, "execute", a);
    } else if (cb == DeviceCategory::local_controller && is_leaf(ca)) {
      if (rng.bernoulli(0.8)) add_grant(a, "execute", b);
    } else if (rng.bernoulli(p.permission_grant_probability)) {
      bool a_holds = rng.bernoulli(0.5);
      bool login = rng.bernoulli(0.5);
      add_grant(a_holds ? b : a, login ? "login" : "execute", a_holds ? a : b);
    }
  }
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].category != DeviceCategory::user_device) continue;
    std::vector<int> targets;
    for (std::size_t t = 0; t < devices.size(); ++t) {
      if (devices[t].category == DeviceCategory::local_controller ||
          devices[t].category == DeviceCategory::cloud_server)
        targets.push_back(static_cast<int>(t));
    }
    if (targets.empty()) continue;
    int want = 1 + (rng.bernoulli(0.4) ? 1 : 0);
    for (int n = 0; n < want && !targets.empty(); ++n) {
      std::size_t j = rng.below(targets.size());
      add_grant(targets[j], "login", static_cast<int>(i));
      targets.erase(targets.begin() + static_cast<long>(j));
    }
  }

  // Impact and accessibility maps per derived template.
  std::vector<Defense> catalog;
  Json catalog_doc = Json::array();
  for (auto& d : devices) {
    DeviceTemplate tmpl = derive_device_template(master, d.category, d.sub);
    for (const auto& slug : tmpl.goal_slugs()) {
      auto it = p.impact_dist.find(slug);
      if (it == p.impact_dist.end()) it = p.impact_dist.find("default");
      auto sample_impact = [&]() {
        return it == p.impact_dist.end() ? 0.0 : it->second.sample(rng);
      };
      d.impact_c[slug] = sample_impact();
      d.impact_i[slug] = sample_impact();
      d.impact_a[slug] = sample_impact();
    }
    for (const auto& slug : tmpl.entry_slugs()) d.accessibility[slug] = p.accessibility_dist.sample(rng);

    // Defense draws for this device.
    double density = p.defense_density;
    int count = static_cast<int>(std::floor(density));
    if (rng.bernoulli(density - count)) count++;
    std::vector<const Archetype*> applicable;
    for (const auto& a : archetypes()) {
      if (archetype_applicable(a, d.category, tmpl)) applicable.push_back(&a);
    }
    count = std::min<int>(count, static_cast<int>(applicable.size()));
    for (int n = 0; n < count; ++n) {
      std::size_t j = rng.below(applicable.size());
      const Archetype* a = applicable[j];
      applicable.erase(applicable.begin() + static_cast<long>(j));

      Json jd = Json::object();
      jd["name"] = std::string(a->name) + ":" + d.name;
      jd["devices"] = Json::array({d.name});
      double cost = std::max(0.5, std::round(p.defense_cost_dist.sample(rng) * a->cost_scale * 100.0) / 100.0);
      jd["cost"] = cost;
      Json node_updates = Json::array();
      for (const auto& [slug, level] : a->node_updates) {
        if (!tmpl.contains(slug)) continue;
        node_updates.push_back({{"node", slug}, {"score", level}});
      }
      Json edge_updates = Json::array();
      for (const auto& [from, to, level] : a->edge_updates) {
        if (!tmpl.contains(from) || !tmpl.contains(to)) continue;
        edge_updates.push_back({{"from", from}, {"to", to}, {"score", level}});
      }
      if (!node_updates.empty()) jd["node_updates"] = node_updates;
      if (!edge_updates.empty()) jd["edge_updates"] = edge_updates;
      catalog_doc.push_back(jd);
    }
  }

  // Assemble the system-spec document.
  Json doc = Json::object();
  doc["generator"] = {{"name", "tasc"},
                      {"rng", "mt19937_64/v1"},
                      {"seed", p.seed},
                      {"device_count", p.device_count}};
  Json jdevices = Json::array();
  for (const auto& d : devices) {
    Json jd = Json::object();
    jd["name"] = d.name;
    jd["category"] = to_string(d.category);
    jd["subcategory"] = {{"updatability", to_string(d.sub.updatability)},
                         {"network_access", to_string(d.sub.network_access)},
                         {"comms", to_string(d.sub.comms)}};
    jd["device_set"] = to_string(d.category);
    jd["impact"] = {{"confidentiality", d.impact_c},
                    {"integrity", d.impact_i},
                    {"availability", d.impact_a}};
    jd["accessibility"] = d.accessibility;
    Json logins = Json::array();
    Json executes = Json::array();
    for (const auto& [name, type, holders] : d.grants) {
      Json grant = {{"name", name}, {"devices", holders}};
      if (type == "login")
        logins.push_back(grant);
      else
        executes.push_back(grant);
    }
    if (!logins.empty()) jd["login_permissions"] = logins;
    if (!executes.empty()) jd["execute_permissions"] = executes;
    if (!d.local_network.empty()) jd["local_network"] = d.local_network;
    jdevices.push_back(jd);
  }
  doc["devices"] = jdevices;
  doc["parameters"] = {
      {"propagation",
       {{"sum_ratio", 1e-5}, {"exp_weight", 0.2}, {"max_cycle", 100}, {"activation_base", 7.0}}},
      {"k", p.device_count}};

  GeneratedSystem out;
  out.spec_doc = doc;
  out.catalog_doc = catalog_doc;
  out.spec = parse_system_spec(doc, table);
  out.catalog = load_defense_catalog(catalog_doc, table);
  return out;
}

bool device_level_connected(const SystemSpec& spec) {
  if (spec.devices.size() <= 1) return true;
  std::map<std::string, std::set<std::string>> links;
  for (const auto& [a, b] : device_adjacency(spec)) {
    links[a].insert(b);
    links[b].insert(a);
  }
  for (const auto& grant : all_grants(spec)) {
    for (const auto& holder : grant.holders) {
      links[grant.target].insert(holder);
      links[holder].insert(grant.target);
    }
  }
  std::set<std::string> seen;
  std::deque<std::string> q{spec.devices.front().name};
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    if (!seen.insert(cur).second) continue;
    for (const auto& next : links[cur]) {
      if (!seen.count(next)) q.push_back(next);
    }
  }
  return seen.size() == spec.devices.size();
}

double curve_noise(const std::vector<double>& curve) {
  if (curve.size() < 2) return 0.0;
  std::vector<double> diffs;
  for (std::size_t i = 1; i < curve.size(); ++i) diffs.push_back(curve[i] - curve[i - 1]);
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= static_cast<double>(diffs.size());
  return std::sqrt(var);
}

CurveComparison compare_optimization_curves(const std::vector<std::vector<double>>& curves) {
  if (curves.size() < 2) throw std::invalid_argument("need at least 2 curves to compare");

  std::size_t rounds = 0;
  for (const auto& c : curves) rounds = std::max(rounds, c.size());
  std::vector<std::vector<double>> padded = curves;
  for (auto& c : padded) {
    if (c.empty()) throw std::invalid_argument("curves must be non-empty");
    while (c.size() < rounds) c.push_back(c.back());
  }

  CurveComparison out;
  out.rounds = rounds;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    for (std::size_t j = i + 1; j < padded.size(); ++j) {
      double dev = 0.0;
      for (std::size_t r = 0; r < rounds; ++r)
        dev = std::max(dev, std::abs(padded[i][r] - padded[j][r]));
      out.max_pairwise_deviation = std::max(out.max_pairwise_deviation, dev);
    }
  }
  double tmin = padded[0].back(), tmax = padded[0].back(), tsum = 0.0;
  for (const auto& c : padded) {
    tmin = std::min(tmin, c.back());
    tmax = std::max(tmax, c.back());
    tsum += c.back();
  }
  out.terminal_spread = tmax - tmin;
  out.mean_terminal = tsum / static_cast<double>(padded.size());
  for (const auto& c : padded) out.noise.push_back(curve_noise(c));
  return out;
}

Json CurveComparison::to_json() const {
  Json j;
  j["rounds"] = rounds;
  j["max_pairwise_deviation"] = max_pairwise_deviation;
  j["terminal_spread"] = terminal_spread;
  j["mean_terminal"] = mean_terminal;
  j["noise_per_curve"] = noise;
  return j;
}

}  // namespace gravitas
