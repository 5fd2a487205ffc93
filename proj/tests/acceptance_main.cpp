// Acceptance suite: exercises every shipping criterion end to end and prints
// one [PASS]/[FAIL] line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cvss_oracle.hpp"
#include "gravitas/cvss.hpp"
#include "gravitas/optimizer.hpp"
#include "gravitas/propagation.hpp"
#include "gravitas/report.hpp"
#include "gravitas/system_builder.hpp"
#include "gravitas/tasc.hpp"
#include "test_support.hpp"

using namespace gravitas;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Check = std::function<Outcome()>;

// ---------------------------------------------------------------------------
// 1. CVSS oracle equivalence over the 2,592-combination base-metric grid.
Outcome criterion_cvss_grid() {
  FactorTable t;
  const AttackVector avs[] = {AttackVector::network, AttackVector::adjacent, AttackVector::local,
                              AttackVector::physical};
  const AttackComplexity acs[] = {AttackComplexity::low, AttackComplexity::high};
  const PrivilegesRequired prs[] = {PrivilegesRequired::none, PrivilegesRequired::low,
                                    PrivilegesRequired::high};
  const UserInteraction uis[] = {UserInteraction::none, UserInteraction::required};
  const Scope scopes[] = {Scope::unchanged, Scope::changed};
  const double impacts[] = {0.0, 0.2, 0.56};

  int combos = 0, mismatches = 0, official_checked = 0;
  for (auto av : avs)
    for (auto ac : acs)
      for (auto pr : prs)
        for (auto ui : uis)
          for (auto s : scopes)
            for (double c : impacts)
              for (double i : impacts)
                for (double a : impacts) {
                  combos++;
                  Exploitability f;
                  f.attack_vector = av;
                  f.attack_complexity = ac;
                  f.privileges_required = pr;
                  f.user_interaction = ui;
                  f.scope = s;
                  const double engine =
                      compute_vulnerability_score(f, ImpactScores{c, i, a}, 0.0, 1.0, t);

                  cvss_oracle::Metrics m;
                  m.attack_vector = t.attack_vector(av);
                  m.attack_complexity = t.attack_complexity(ac);
                  m.privileges_required = t.privileges_required(pr, s);
                  m.user_interaction = t.user_interaction(ui);
                  m.scope_changed = s == Scope::changed;
                  m.confidentiality = c;
                  m.integrity = i;
                  m.availability = a;

                  const double rounded = cvss_oracle::roundup(engine * 10.0);
                  if (rounded != cvss_oracle::base_score(m, false)) mismatches++;
                  // On vectors where the official zero rule is inert the
                  // engine must also match the full official base score.
                  const double official = cvss_oracle::base_score(m, true);
                  if (official > 0.0) {
                    official_checked++;
                    if (rounded != official) mismatches++;
                  }
                }
  Outcome out;
  out.pass = combos == 2592 && mismatches == 0;
  std::ostringstream os;
  os << combos << " combinations, " << mismatches << " mismatches, " << official_checked
     << " checked against the full official score";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// 2. Propagation convergence on the fixture and 100 generated systems.
Outcome criterion_convergence() {
  Outcome out;
  SystemGraph fixture = test_support::scored_smart_home();
  PropagationParams prop = test_support::smart_home_spec().propagation;
  const int fixture_cycles = propagate_scores(fixture, prop);
  const bool fixture_ok = fixture_cycles < prop.max_cycle && fixture_cycles <= 100;

  int worst = fixture_cycles;
  int failures = fixture_ok ? 0 : 1;
  for (int s = 1; s <= 100; ++s) {
    GenParams p = GenParams::defaults();
    p.seed = static_cast<std::uint64_t>(s);
    p.device_count = 20 + (s * 7) % 31;  // 20..50
    GeneratedSystem sys = generate_system(p, test_support::master_template(), FactorTable{});
    BuildResult build = build_system(sys.spec, test_support::master_template(), FactorTable{});
    score_all_nodes(build.graph, FactorTable{});
    const int cycles = propagate_scores(build.graph, sys.spec.propagation);
    worst = std::max(worst, cycles);
    if (!(cycles < sys.spec.propagation.max_cycle && cycles <= 100)) failures++;
  }
  out.pass = failures == 0;
  std::ostringstream os;
  os << "fixture " << fixture_cycles << " cycles; 100 TASC systems (20-50 devices) worst " << worst
     << " cycles; " << failures << " non-convergent";
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// 3. Monotone defense effect across 100 random (graph, defense) pairs.
Outcome criterion_monotone_defense() {
  Outcome out;
  int violations = 0;
  for (int s = 1; s <= 100; ++s) {
    GenParams p = GenParams::defaults();
    p.seed = static_cast<std::uint64_t>(1000 + s);
    p.device_count = 8 + s % 8;
    p.defense_density = 2.0;
    GeneratedSystem sys = generate_system(p, test_support::master_template(), FactorTable{});
    if (sys.catalog.empty()) continue;
    BuildResult build = build_system(sys.spec, test_support::master_template(), FactorTable{});
    score_all_nodes(build.graph, FactorTable{});

    PropagationParams prop = sys.spec.propagation;
    prop.sum_ratio = 1e-6;
    prop.max_cycle = 250;
    SystemGraph base = build.graph;
    propagate_scores(base, prop);

    Rng rng(p.seed * 31 + 7);
    const Defense& d = sys.catalog[rng.below(sys.catalog.size())];
    SystemGraph defended = base;
    apply_defense(defended, d);
    propagate_scores(defended, prop);

    for (std::size_t i = 0; i < base.nodes().size(); ++i) {
      if (defended.nodes()[i].exploit_score > base.nodes()[i].exploit_score + 1e-9) violations++;
    }
    const int a = static_cast<int>(base.entry_nodes().size());
    for (int k : {1, 5, a}) {
      if (k < 1 || k > a) continue;
      if (adversary_score(defended, k) > adversary_score(base, k) + 1e-9) violations++;
    }
  }
  out.pass = violations == 0;
  out.detail = "100 (graph, defense) pairs, " + std::to_string(violations) +
               " monotonicity violations (slack 1e-9)";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Greedy first round equals exhaustive single-defense search.
Outcome criterion_greedy_round() {
  Outcome out;
  int mismatches = 0;
  for (int s = 1; s <= 20; ++s) {
    test_support::RandomGraphSpec spec;
    spec.nodes = 10 + (s * 3) % 21;  // <= 30
    spec.extra_edges = spec.nodes;
    spec.entries = 3;
    spec.goals = 2;
    spec.seed = static_cast<std::uint64_t>(s);
    SystemGraph g = test_support::random_dag(spec);
    auto catalog = test_support::random_defenses(g, 10, spec.seed + 555);

    PropagationParams prop;
    OptimizerParams params;
    params.alpha_local = 0.0;
    params.set_size = static_cast<int>(catalog.size());
    params.max_set_time = 1 << 20;
    params.max_defenses = 1;
    params.k = 3;
    params.seed = spec.seed;
    OptimizeResult result = optimize(g, catalog, params, prop);

    // Exhaustive oracle with full re-propagation per candidate.
    SystemGraph base = g;
    propagate_scores(base, prop);
    std::string best_name;
    double best_adv = 1e300;
    double best_cost = 0;
    for (const auto& d : catalog) {
      SystemGraph trial = base;
      apply_defense(trial, d);
      propagate_scores(trial, prop);
      const double adv = adversary_score(trial, params.k);
      const bool wins =
          best_name.empty() || adv < best_adv ||
          (adv == best_adv && (d.cost < best_cost || (d.cost == best_cost && d.name < best_name)));
      if (wins) {
        best_name = d.name;
        best_adv = adv;
        best_cost = d.cost;
      }
    }
    if (result.history.size() < 2 || result.history[1].defense != best_name) mismatches++;
  }
  out.pass = mismatches == 0;
  out.detail = "20 random graphs <= 30 nodes, " + std::to_string(mismatches) +
               " first-round mismatches vs exhaustive search";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Optimization-curve shape on the fixture for k in {1, 12, 23}.
Outcome criterion_curve_shape() {
  Outcome out;
  SystemGraph g = test_support::scored_smart_home();
  auto catalog = test_support::smart_home_catalog();
  PropagationParams prop = test_support::smart_home_spec().propagation;

  std::map<int, double> noise;
  bool monotone = true;
  for (int k : {1, 12, 23}) {
    OptimizerParams params;
    params.alpha_local = 5e-5;
    params.alpha_global = 0.00032;
    params.set_size = 8;
    params.max_set_time = 25;
    params.k = k;
    params.seed = 7;
    OptimizeResult result = optimize(g, catalog, params, prop);
    std::vector<double> curve;
    for (const auto& h : result.history) curve.push_back(h.adversary_score);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      if (curve[i] > curve[i - 1] + 1e-9) monotone = false;
    }
    noise[k] = curve_noise(curve);
  }
  const bool noise_ok = noise[1] > noise[12] && noise[12] > noise[23];
  out.pass = monotone && noise_ok;
  std::ostringstream os;
  os << "monotone=" << (monotone ? "yes" : "NO") << ", noise k=1: " << noise[1]
     << ", k=12: " << noise[12] << ", k=23: " << noise[23];
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// 6. Weakest-link shape (Table-9 values substituted by the documented
//    label/kind/range property at desk scale).
Outcome criterion_weakest_link() {
  Outcome out;
  SystemGraph g = test_support::propagated_smart_home();
  RiskReport r = weakest_link_report(g, 3, 23);
  std::ostringstream os;
  bool ok = r.top_nodes.size() == 3;
  for (const auto& row : r.top_nodes) {
    const VulnNode* n = g.find_node(row.node_id);
    const bool label_ok = row.label == "Access requested" || row.label == "Sensor tampering";
    const bool kind_ok = row.kind == NodeKind::entry || (n && n->physical);
    const bool range_ok = row.exploit_score > 0.5 && row.exploit_score < 1.0;
    DeviceCategory cat = DeviceCategory::sensor;
    for (const auto& dev : g.devices()) {
      if (dev.name == row.device) cat = dev.category;
    }
    const bool perimeter_ok = cat == DeviceCategory::sensor || cat == DeviceCategory::actuator ||
                              cat == DeviceCategory::local_controller;
    ok = ok && label_ok && kind_ok && range_ok && perimeter_ok;
    os << row.device << "/" << row.label << "=" << format_score(row.exploit_score) << " ";
  }
  out.pass = ok;
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// 7. Eq.-3 brute-force equivalence for every k on graphs with |A| <= 10.
Outcome criterion_adversary_bruteforce() {
  Outcome out;
  int mismatches = 0;
  int checks = 0;
  for (int s = 1; s <= 50; ++s) {
    test_support::RandomGraphSpec spec;
    spec.nodes = 12 + s % 14;
    spec.entries = 2 + s % 9;  // <= 10 entries
    spec.goals = 2;
    spec.seed = static_cast<std::uint64_t>(s + 4000);
    SystemGraph g = test_support::random_dag(spec);
    PropagationParams prop;
    propagate_scores(g, prop);
    const int a = static_cast<int>(g.entry_nodes().size());
    for (int k = 1; k <= a; ++k) {
      checks++;
      if (adversary_score(g, k) != test_support::brute_force_adversary(g, k)) mismatches++;
    }
  }
  out.pass = mismatches == 0;
  out.detail = std::to_string(checks) + " (graph, k) pairs over 50 graphs, " +
               std::to_string(mismatches) + " mismatches (exact compare)";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism across runs and thread counts; serialization round trip.
Outcome criterion_determinism() {
  Outcome out;
  SystemGraph g = test_support::scored_smart_home();
  auto catalog = test_support::smart_home_catalog();
  PropagationParams prop = test_support::smart_home_spec().propagation;

  auto run = [&](int threads) {
#ifdef _OPENMP
    omp_set_num_threads(threads);
#else
    (void)threads;
#endif
    OptimizerParams params;
    params.alpha_local = 5e-5;
    params.set_size = 8;
    params.k = 23;
    params.seed = 7;
    params.parallel = true;
    OptimizeResult result = optimize(g, catalog, params, prop);
    Provenance prov;
    prov.seed = params.seed;
    Json doc = curve_to_json(result.history, result.best_index, prov);
    doc["final_graph"] = serialize_system_graph(result.final_graph, prov);
    return dump_json(doc);
  };

  const std::string run1 = run(1);
  const std::string run1_again = run(1);
  const std::string run8 = run(8);
#ifdef _OPENMP
  omp_set_num_threads(0);
#endif

  SystemGraph prop_graph = test_support::propagated_smart_home();
  Provenance prov;
  const std::string ser1 = dump_json(serialize_system_graph(prop_graph, prov));
  ParsedGraph parsed = parse_system_graph(Json::parse(ser1));
  const std::string ser2 = dump_json(serialize_system_graph(parsed.graph, parsed.provenance));

  const bool reruns_equal = run1 == run1_again;
  const bool threads_equal = run1 == run8;
  const bool roundtrip_equal = ser1 == ser2;
  out.pass = reruns_equal && threads_equal && roundtrip_equal;
  std::ostringstream os;
  os << "rerun=" << (reruns_equal ? "identical" : "DIFFERS") << ", threads 1 vs 8="
     << (threads_equal ? "identical" : "DIFFERS") << ", round-trip="
     << (roundtrip_equal ? "identical" : "DIFFERS");
  out.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// 9. TASC consistency: 5 seeds, identical parameters, similar curves.
Outcome criterion_tasc_consistency() {
  Outcome out;
  std::vector<std::vector<double>> curves;
  for (int s = 1; s <= 5; ++s) {
    GenParams p = GenParams::defaults();
    p.seed = static_cast<std::uint64_t>(9000 + s);
    p.device_count = 30;
    p.defense_density = 1.8;
    GeneratedSystem sys = generate_system(p, test_support::master_template(), FactorTable{});
    BuildResult build = build_system(sys.spec, test_support::master_template(), FactorTable{});
    score_all_nodes(build.graph, FactorTable{});

    OptimizerParams params;
    params.alpha_local = 5e-5;
    params.set_size = 10;
    params.max_set_time = 25;
    params.k = 30;
    params.seed = 11;
    OptimizeResult result = optimize(build.graph, sys.catalog, params, sys.spec.propagation);
    std::vector<double> curve;
    for (const auto& h : result.history) curve.push_back(h.adversary_score);
    curves.push_back(std::move(curve));
  }
  CurveComparison cmp = compare_optimization_curves(curves);
  out.pass = cmp.terminal_spread <= 0.1;
  std::ostringstream os;
  os << "terminal spread " << cmp.terminal_spread << " (<= 0.1), pairwise max deviation "
     << cmp.max_pairwise_deviation << ", mean terminal " << cmp.mean_terminal;
  out.detail = os.str();
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Check check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "CVSS oracle equivalence (2,592 base-metric combinations)", 1.0, criterion_cvss_grid},
      {2, "propagation convergence within 100 cycles", 60.0, criterion_convergence},
      {3, "monotone defense effect", 600.0, criterion_monotone_defense},
      {4, "greedy first round equals exhaustive search", 600.0, criterion_greedy_round},
      {5, "optimization-curve shape (monotone; noise falls with k)", 300.0,
       criterion_curve_shape},
      {6, "weakest-link top-3 labels, kinds and score range", 600.0, criterion_weakest_link},
      {7, "adversary score equals subset brute force", 600.0, criterion_adversary_bruteforce},
      {8, "determinism across runs/threads and byte-exact round trip", 600.0,
       criterion_determinism},
      {9, "TASC consistency across seeds", 600.0, criterion_tasc_consistency},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail += " [exceeded " + std::to_string(c.budget_seconds) + "s budget]";
    }
    std::printf("[%s] criterion %d: %s (%.2fs) - %s\n", outcome.pass ? "PASS" : "FAIL", c.id,
                c.name, elapsed, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) failures++;
  }

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
