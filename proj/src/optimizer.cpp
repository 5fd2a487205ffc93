#include "gravitas/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gravitas {


std::vector<std::string> Defense::resolve_devices(const SystemGraph& g) const {
  std::set<std::string> out(devices.begin(), devices.end());
  if (!device_set.empty()) {
    for (const auto& dev : g.devices()) {
      if (dev.device_set == device_set) out.insert(dev.name);
    }
  }
  return {out.begin(), out.end()};
}

namespace {

double parse_defense_score(const Json& v, const FactorTable& table) {
  if (v.is_string()) return table.defense_level(v.get<std::string>());
  double s = v.get<double>();
  if (s < 0.0 || s > 1.0) throw std::runtime_error("defense score outside [0,1]");
  return s;
}

}  // namespace

std::vector<Defense> load_defense_catalog(const Json& doc, const FactorTable& table) {
  const Json& arr = doc.is_array() ? doc : doc.at("defenses");
  std::vector<Defense> catalog;
  std::set<std::string> names;
  for (const auto& jd : arr) {
    Defense d;
    d.name = jd.at("name").get<std::string>();
    if (!names.insert(d.name).second)
      throw std::runtime_error("duplicate defense name: " + d.name);
    if (jd.contains("devices")) {
      for (const auto& dev : jd.at("devices")) d.devices.push_back(dev.get<std::string>());
    }
    d.device_set = jd.value("device_set", "");
    if (d.devices.empty() && d.device_set.empty())
      throw std::runtime_error("defense '" + d.name + "' names no devices or device_set");
    d.cost = jd.at("cost").get<double>();
    if (!(d.cost > 0.0)) throw std::runtime_error("defense '" + d.name + "' needs cost > 0");
    if (jd.contains("node_updates")) {
      for (const auto& ju : jd.at("node_updates")) {
        NodeScoreUpdate u;
        u.slug = ju.at("node").get<std::string>();
        if (ju.contains("permission")) u.permission = ju.at("permission").get<std::string>();
        u.score = parse_defense_score(ju.at("score"), table);
        d.node_updates.push_back(std::move(u));
      }
    }
    if (jd.contains("edge_updates")) {
      for (const auto& ju : jd.at("edge_updates")) {
        EdgeScoreUpdate u;
        u.from_slug = ju.at("from").get<std::string>();
        u.to_slug = ju.at("to").get<std::string>();
        if (ju.contains("permission")) u.permission = ju.at("permission").get<std::string>();
        u.score = parse_defense_score(ju.at("score"), table);
        d.edge_updates.push_back(std::move(u));
      }
    }
    if (d.node_updates.empty() && d.edge_updates.empty())
      throw std::runtime_error("defense '" + d.name + "' updates nothing");
    catalog.push_back(std::move(d));
  }
  return catalog;
}

std::vector<Defense> load_defense_catalog_file(const std::string& path, const FactorTable& table) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open defense catalog: " + path);
  return load_defense_catalog(Json::parse(in), table);
}

std::vector<int> apply_defense(SystemGraph& g, const Defense& d) {
  const auto devs = d.resolve_devices(g);
  std::set<std::string> dev_set(devs.begin(), devs.end());
  std::vector<int> affected;

  auto& nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    VulnNode& n = nodes[i];
    if (!dev_set.count(n.device_id)) continue;
    for (const auto& upd : d.node_updates) {
      if (upd.slug != n.slug) continue;
      if (upd.permission && *upd.permission != n.permission) continue;
      if (upd.score < n.node_defense_score) {
        n.node_defense_score = upd.score;
        refresh_vulnerability_score(n);
      }
      affected.push_back(static_cast<int>(i));
    }
  }

  for (auto& e : g.edges()) {
    const VulnNode& from = nodes[e.from];
    const VulnNode& to = nodes[e.to];
    if (!dev_set.count(from.device_id)) continue;
    for (const auto& upd : d.edge_updates) {
      if (upd.from_slug != from.slug || upd.to_slug != to.slug) continue;
      if (upd.permission && *upd.permission != from.permission) continue;
      if (upd.score < e.edge_defense_score) e.edge_defense_score = upd.score;
      affected.push_back(e.from);
    }
  }

  std::sort(affected.begin(), affected.end());
  affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
  g.applied_defenses.push_back(d.name);
  return affected;
}

void OptimizerParams::validate() const {
  if (alpha_local < 0.0 || alpha_local > 1.0)
    throw std::invalid_argument("alpha_local must be in [0,1]");
  if (alpha_global < 0.0 || alpha_global > 1.0)
    throw std::invalid_argument("alpha_global must be in [0,1]");
  if (max_set_time < 0) throw std::invalid_argument("max_set_time must be >= 0");
}

int OptimizerParams::effective_set_size(int device_count) const {
  if (set_size > 0) return set_size;
  return std::max(1, static_cast<int>(std::ceil(0.05 * device_count)));
}

int OptimizerParams::effective_k(int device_count) const {
  return k > 0 ? k : std::max(1, device_count);
}

double local_objective(double alpha_local, double cost, double adv_prev, double adv_candidate,
                       bool invert_delta) {
  const double delta = invert_delta ? adv_prev - adv_candidate : adv_candidate - adv_prev;
  return alpha_local * cost + (1.0 - alpha_local) * delta;
}

double global_objective(double alpha_global, double total_cost, double adversary_score) {
  return alpha_global * total_cost + (1.0 - alpha_global) * adversary_score;
}

namespace {

double effective_cost(const Defense& d, const SystemGraph& g, const OptimizerParams& params) {
  if (!params.per_device_cost_scaling) return d.cost;
  return d.cost * static_cast<double>(d.resolve_devices(g).size());
}

// Device with the highest exploit risk; name order breaks ties.
std::string max_risk_device(const SystemGraph& g) {
  std::string best_name;
  double best = -1.0;
  for (const auto& dev : g.devices()) {
    double s = device_max_exploit_score(g, dev);
    if (s > best || (s == best && (best_name.empty() || dev.name < best_name))) {
      best = s;
      best_name = dev.name;
    }
  }
  return best_name;
}

bool defense_applies_to_device(const Defense& d, const SystemGraph& g, const std::string& device) {
  const auto devs = d.resolve_devices(g);
  return std::find(devs.begin(), devs.end(), device) != devs.end();
}

}  // namespace

void refresh_defense_set(OptimizerState& state, std::optional<int> chosen, const SystemGraph& g,
                         const std::vector<Defense>& catalog, const OptimizerParams& params,
                         const PropagationParams& prop) {
  // Evict defenses that overstayed; they go back to the available pool.
  std::vector<DefenseSetEntry> kept;
  for (auto& entry : state.set) {
    if (entry.time_in_set > params.max_set_time) {
      state.available.push_back(entry.defense_index);
    } else {
      kept.push_back(std::move(entry));
    }
  }
  state.set = std::move(kept);
  std::sort(state.available.begin(), state.available.end());

  // Fold the newly chosen defense into every surviving candidate graph.
  if (chosen) {
    const int n = static_cast<int>(state.set.size());
#pragma omp parallel for schedule(dynamic) if (params.parallel)
    for (int i = 0; i < n; ++i) {
      auto affected = apply_defense(state.set[i].graph, catalog[*chosen]);
      propagate_from_defense(state.set[i].graph, affected, prop);
    }
  }

  // Refill, preferring unused defenses of the riskiest device. Draws are
  // serialized so the stream of random numbers is thread-count independent.
  const int target = params.effective_set_size(static_cast<int>(g.devices().size()));
  const std::string risky = max_risk_device(g);
  std::vector<int> preferred;
  for (int idx : state.available) {
    if (defense_applies_to_device(catalog[idx], g, risky)) preferred.push_back(idx);
  }

  std::vector<int> drawn;
  while (static_cast<int>(state.set.size()) + static_cast<int>(drawn.size()) < target &&
         !state.available.empty()) {
    int pick;
    if (!preferred.empty()) {
      std::size_t j = state.rng.below(preferred.size());
      pick = preferred[j];
      preferred.erase(preferred.begin() + static_cast<long>(j));
    } else {
      std::size_t j = state.rng.below(state.available.size());
      pick = state.available[j];
    }
    auto it = std::find(state.available.begin(), state.available.end(), pick);
    state.available.erase(it);
    auto pit = std::find(preferred.begin(), preferred.end(), pick);
    if (pit != preferred.end()) preferred.erase(pit);
    drawn.push_back(pick);
  }

  const std::size_t first_new = state.set.size();
  for (int idx : drawn) {
    DefenseSetEntry entry;
    entry.defense_index = idx;
    state.set.push_back(std::move(entry));
  }
  const int total = static_cast<int>(state.set.size());
#pragma omp parallel for schedule(dynamic) if (params.parallel)
  for (int i = static_cast<int>(first_new); i < total; ++i) {
    auto& entry = state.set[i];
    entry.graph = g;  // deep copy of the base graph
    auto affected = apply_defense(entry.graph, catalog[entry.defense_index]);
    propagate_from_defense(entry.graph, affected, prop);
  }
}

OptimizeResult optimize(const SystemGraph& g, const std::vector<Defense>& catalog,
                        const OptimizerParams& params, const PropagationParams& prop) {
  params.validate();
  prop.validate();
  if (catalog.empty()) throw std::invalid_argument("defense catalog is empty");

  OptimizeResult result;
  SystemGraph base = g;
  propagate_scores(base, prop);

  const int k = params.effective_k(static_cast<int>(base.devices().size()));
  double adv_prev = adversary_score(base, k);

  HistoryMoment baseline;
  baseline.round = 0;
  baseline.total_cost = 0.0;
  baseline.adversary_score = adv_prev;
  baseline.global_objective = global_objective(params.alpha_global, 0.0, adv_prev);
  result.history.push_back(baseline);
  if (params.keep_graphs) result.graphs.push_back(base);

  OptimizerState state(params.seed);
  state.available.resize(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) state.available[i] = static_cast<int>(i);

  refresh_defense_set(state, std::nullopt, base, catalog, params, prop);

  std::vector<std::string> chosen_names;
  double total_cost = 0.0;
  int round = 1;

  while (!state.set.empty()) {
    if (params.max_defenses >= 0 && round > params.max_defenses) break;

    // Pick the local-objective minimizer; ties fall to the cheaper defense,
    // then to the lexicographically smaller name.
    int best = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.set.size(); ++i) {
      auto& entry = state.set[i];
      const Defense& d = catalog[entry.defense_index];
      const double cost = effective_cost(d, base, params);
      const double adv = adversary_score(entry.graph, k);
      const double obj = local_objective(params.alpha_local, cost, adv_prev, adv,
                                         params.invert_local_delta);
      entry.time_in_set++;
      bool wins = obj < best_obj;
      if (!wins && obj == best_obj && best >= 0) {
        const Defense& b = catalog[state.set[best].defense_index];
        const double bcost = effective_cost(b, base, params);
        wins = cost < bcost || (cost == bcost && d.name < b.name);
      }
      if (wins) {
        best = static_cast<int>(i);
        best_obj = obj;
      }
    }

    DefenseSetEntry chosen = std::move(state.set[best]);
    state.set.erase(state.set.begin() + best);

    const Defense& d = catalog[chosen.defense_index];
    total_cost += effective_cost(d, base, params);
    adv_prev = adversary_score(chosen.graph, k);
    chosen_names.push_back(d.name);

    HistoryMoment moment;
    moment.round = round;
    moment.defense = d.name;
    moment.defense_set = chosen_names;
    moment.total_cost = total_cost;
    moment.adversary_score = adv_prev;
    moment.local_objective = best_obj;
    moment.global_objective = global_objective(params.alpha_global, total_cost, adv_prev);
    result.history.push_back(moment);

    base = std::move(chosen.graph);
    if (params.keep_graphs) result.graphs.push_back(base);

    if (params.opt_halt_value >= 0.0 && moment.global_objective <= params.opt_halt_value) break;

    refresh_defense_set(state, chosen.defense_index, base, catalog, params, prop);
    round++;
  }

  // Global scan over the whole history, baseline included.
  int best_idx = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    if (result.history[i].global_objective < best_obj) {
      best_obj = result.history[i].global_objective;
      best_idx = static_cast<int>(i);
    }
  }
  result.best_index = best_idx;
  result.final_graph = std::move(base);
  return result;
}

SystemGraph rebuild_moment_graph(const SystemGraph& base, const std::vector<Defense>& catalog,
                                 const HistoryMoment& moment, const PropagationParams& prop) {
  SystemGraph g = base;
  g.applied_defenses.clear();
  for (const auto& name : moment.defense_set) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const Defense& d) { return d.name == name; });
    if (it == catalog.end()) throw std::runtime_error("moment references unknown defense: " + name);
    apply_defense(g, *it);
  }
  propagate_scores(g, prop);
  return g;
}

OptimizerParams parse_optimizer_params(const Json& doc) {
  OptimizerParams p;
  if (!doc.is_object()) return p;
  p.max_defenses = doc.value("max_defenses", p.max_defenses);
  p.opt_halt_value = doc.value("opt_halt_value", p.opt_halt_value);
  p.alpha_local = doc.value("alpha_local", p.alpha_local);
  p.alpha_global = doc.value("alpha_global", p.alpha_global);
  p.max_set_time = doc.value("max_set_time", p.max_set_time);
  p.set_size = doc.value("set_size", p.set_size);
  p.k = doc.value("k", p.k);
  p.seed = doc.value("seed", p.seed);
  p.per_device_cost_scaling = doc.value("per_device_cost_scaling", p.per_device_cost_scaling);
  p.invert_local_delta = doc.value("invert_local_delta", p.invert_local_delta);
  p.validate();
  return p;
}

}  // namespace gravitas
