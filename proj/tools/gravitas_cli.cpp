// gravitas command-line interface: build, score, propagate, optimize, report,
// generate and validate subcommands over the JSON file formats.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gravitas/cvss.hpp"
#include "gravitas/json_util.hpp"
#include "gravitas/optimizer.hpp"
#include "gravitas/propagation.hpp"
#include "gravitas/report.hpp"
#include "gravitas/system_builder.hpp"
#include "gravitas/tasc.hpp"
#include "gravitas/template_catalog.hpp"
#include "gravitas/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace gravitas;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct GlobalOpts {
  std::string template_path = "data/master_template.json";
  std::string factors_path;
  bool json_output = false;
  int threads = 0;
};

FactorTable load_factor_table(const GlobalOpts& opts) {
  FactorTable table;
  if (!opts.factors_path.empty()) {
    Json overrides = read_json_file(opts.factors_path);
    std::unordered_map<std::string, double> map;
    for (const auto& [key, value] : overrides.items()) map[key] = value.get<double>();
    table.apply_overrides(map);
  }
  return table;
}

void apply_threads(const GlobalOpts& opts) {
#ifdef _OPENMP
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif
}

PropagationParams propagation_from_cli(const PropagationParams& base, double sum_ratio,
                                       double exp_weight, int max_cycle, double activation_base) {
  PropagationParams p = base;
  if (sum_ratio > 0) p.sum_ratio = sum_ratio;
  if (exp_weight > 0) p.exp_weight = exp_weight;
  if (max_cycle > 0) p.max_cycle = max_cycle;
  if (activation_base > 0) p.activation_base = activation_base;
  p.validate();
  return p;
}

int cmd_validate(const GlobalOpts& opts, const std::string& spec_path,
                 const std::string& catalog_path) {
  const FactorTable table = load_factor_table(opts);
  const MasterTemplate master = load_master_template_file(opts.template_path);

  int problems = 0;
  for (const auto& missing : master.missing_standard_goals()) {
    std::cout << "warning: template lacks standard goal '" << missing << "'\n";
  }

  if (!spec_path.empty()) {
    const SystemSpec spec = parse_system_spec_file(spec_path, table);
    BuildResult build = build_system(spec, master, table);
    for (const auto& warning : build.warnings) {
      std::cout << "warning: " << warning.code << ": " << warning.message << "\n";
    }
    // Per-device structural lint.
    for (const auto& dev : spec.devices) {
      DeviceTemplate tmpl = derive_device_template(master, dev.category, dev.subcategories);
      std::vector<PermissionGrant> on_device = dev.login_permissions;
      on_device.insert(on_device.end(), dev.execute_permissions.begin(),
                       dev.execute_permissions.end());
      DeviceGraph g =
          instantiate_device(dev, tmpl, on_device, grants_held_by(spec, dev.name), table);
      for (const auto& v : validate_device_graph(g)) {
        std::cout << "violation: " << dev.name << ": " << v.code << ": " << v.message << "\n";
        problems++;
      }
    }
    std::cout << "devices: " << spec.devices.size() << ", connections: " << build.connection_count
              << ", nodes: " << build.graph.nodes().size() << ", edges: "
              << build.graph.edges().size() << "\n";
  }

  if (!catalog_path.empty()) {
    auto catalog = load_defense_catalog_file(catalog_path, table);
    if (!spec_path.empty()) {
      // Every defense must land somewhere on the built system.
      const SystemSpec spec = parse_system_spec_file(spec_path, table);
      BuildResult build = build_system(spec, master, table);
      for (const auto& d : catalog) {
        SystemGraph scratch = build.graph;
        if (apply_defense(scratch, d).empty()) {
          std::cout << "warning: defense '" << d.name
                    << "' resolves to no node or edge on this system\n";
        }
      }
    }
    std::cout << "defense catalog: " << catalog.size() << " defenses\n";
  }

  if (problems > 0) {
    std::cout << "validation failed with " << problems << " violation(s)\n";
    return kExitInput;
  }
  std::cout << "ok\n";
  return kExitOk;
}

int cmd_build(const GlobalOpts& opts, const std::string& spec_path, const std::string& out_path) {
  const FactorTable table = load_factor_table(opts);
  const MasterTemplate master = load_master_template_file(opts.template_path);
  const SystemSpec spec = parse_system_spec_file(spec_path, table);

  BuildResult build = build_system(spec, master, table, opts.threads != 1);
  for (const auto& warning : build.warnings) {
    std::cerr << "warning: " << warning.code << ": " << warning.message << "\n";
  }

  Provenance prov;
  prov.template_version = master.version;
  prov.stage = "built";
  prov.parameters = {{"spec", spec_path},
                     {"k", spec.k},
                     {"propagation",
                      {{"sum_ratio", spec.propagation.sum_ratio},
                       {"exp_weight", spec.propagation.exp_weight},
                       {"max_cycle", spec.propagation.max_cycle},
                       {"activation_base", spec.propagation.activation_base}}}};
  if (spec.auto_fill) {
    prov.seed = spec.auto_fill->seed;
    prov.parameters["auto_fill_seed"] = spec.auto_fill->seed;
  }
  write_text_file(out_path, dump_json(serialize_system_graph(build.graph, prov)));
  if (opts.json_output) {
    Json j = {{"devices", spec.devices.size()},
              {"connections", build.connection_count},
              {"nodes", build.graph.nodes().size()},
              {"edges", build.graph.edges().size()},
              {"warnings", build.warnings.size()},
              {"out", out_path}};
    std::cout << dump_json(j);
  } else {
    std::cout << "built " << build.graph.nodes().size() << " nodes, "
              << build.graph.edges().size() << " edges -> " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_score(const GlobalOpts& opts, const std::string& graph_path, const std::string& out_path) {
  const FactorTable table = load_factor_table(opts);
  apply_threads(opts);
  ParsedGraph parsed = parse_system_graph(read_json_file(graph_path));
  score_all_nodes(parsed.graph, table, opts.threads != 1);
  parsed.provenance.stage = "scored";
  write_text_file(out_path, dump_json(serialize_system_graph(parsed.graph, parsed.provenance)));
  if (opts.json_output) {
    std::cout << dump_json(Json{{"nodes", parsed.graph.nodes().size()}, {"out", out_path}});
  } else {
    std::cout << "scored " << parsed.graph.nodes().size() << " nodes -> " << out_path << "\n";
  }
  return kExitOk;
}

PropagationParams params_from_provenance(const Provenance& prov) {
  PropagationParams p;
  if (prov.parameters.contains("propagation")) {
    const auto& jp = prov.parameters.at("propagation");
    p.sum_ratio = jp.value("sum_ratio", p.sum_ratio);
    p.exp_weight = jp.value("exp_weight", p.exp_weight);
    p.max_cycle = jp.value("max_cycle", p.max_cycle);
    p.activation_base = jp.value("activation_base", p.activation_base);
  }
  return p;
}

int cmd_propagate(const GlobalOpts& opts, const std::string& graph_path,
                  const std::string& out_path, double sum_ratio, double exp_weight, int max_cycle,
                  double activation_base, int k) {
  ParsedGraph parsed = parse_system_graph(read_json_file(graph_path));
  if (parsed.provenance.stage == "built") {
    std::cerr << "error: graph has no vulnerability scores; run 'score' first\n";
    return kExitInput;
  }
  PropagationParams p = propagation_from_cli(params_from_provenance(parsed.provenance), sum_ratio,
                                             exp_weight, max_cycle, activation_base);
  const int cycles = propagate_scores(parsed.graph, p);
  const int kk = k > 0 ? k : static_cast<int>(parsed.graph.devices().size());
  const double adv = parsed.graph.entry_nodes().empty() ? 0.0 : adversary_score(parsed.graph, kk);

  parsed.provenance.stage = "propagated";
  parsed.provenance.parameters["propagation"] = {{"sum_ratio", p.sum_ratio},
                                                 {"exp_weight", p.exp_weight},
                                                 {"max_cycle", p.max_cycle},
                                                 {"activation_base", p.activation_base}};
  if (!out_path.empty())
    write_text_file(out_path, dump_json(serialize_system_graph(parsed.graph, parsed.provenance)));

  if (opts.json_output) {
    std::cout << dump_json(Json{{"cycles", cycles},
                                {"converged", cycles < p.max_cycle},
                                {"k", kk},
                                {"adversary_score", round6(adv)}});
  } else {
    std::cout << "converged in " << cycles << " cycle(s); adversary score (k=" << kk
              << "): " << format_score(adv) << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const GlobalOpts& opts, const std::string& graph_path,
                 const std::string& catalog_path, const std::string& out_path,
                 const std::string& csv_path, OptimizerParams params, bool params_seed_set) {
  const FactorTable table = load_factor_table(opts);
  apply_threads(opts);

  ParsedGraph parsed = parse_system_graph(read_json_file(graph_path));
  if (parsed.provenance.stage == "built") {
    std::cerr << "error: graph has no vulnerability scores; run 'score' first\n";
    return kExitInput;
  }
  auto catalog = load_defense_catalog_file(catalog_path, table);
  PropagationParams prop = params_from_provenance(parsed.provenance);
  params.parallel = opts.threads != 1;
  if (!params_seed_set && parsed.provenance.seed != 0) params.seed = parsed.provenance.seed;

  OptimizeResult result = optimize(parsed.graph, catalog, params, prop);

  Provenance prov = parsed.provenance;
  prov.stage = "propagated";
  prov.seed = params.seed;
  prov.parameters["optimizer"] = {{"alpha_local", params.alpha_local},
                                  {"alpha_global", params.alpha_global},
                                  {"max_defenses", params.max_defenses},
                                  {"opt_halt_value", params.opt_halt_value},
                                  {"max_set_time", params.max_set_time},
                                  {"set_size", params.set_size},
                                  {"k", params.k},
                                  {"seed", params.seed}};

  Json out = curve_to_json(result.history, result.best_index, prov);
  out["final_graph"] = serialize_system_graph(result.final_graph, prov);
  write_text_file(out_path, dump_json(out));
  if (!csv_path.empty()) write_text_file(csv_path, curve_to_csv(result.history, result.best_index));

  const auto& best = result.history[result.best_index];
  if (opts.json_output) {
    Json j = {{"rounds", result.history.size() - 1},
              {"best_round", best.round},
              {"best_total_cost", round6(best.total_cost)},
              {"best_adversary_score", round6(best.adversary_score)},
              {"recommended_defenses", best.defense_set}};
    std::cout << dump_json(j);
  } else {
    std::cout << "optimization ran " << result.history.size() - 1 << " round(s)\n";
    std::cout << "recommended moment: round " << best.round << ", cost "
              << format_score(best.total_cost) << ", adversary score "
              << format_score(best.adversary_score) << "\n";
    for (const auto& name : best.defense_set) std::cout << "  + " << name << "\n";
  }
  return kExitOk;
}

int cmd_report(const GlobalOpts& opts, const std::string& graph_path, int top, int max_len, int k,
               const std::string& out_path) {
  ParsedGraph parsed = parse_system_graph(read_json_file(graph_path));
  if (parsed.provenance.stage != "propagated") {
    std::cerr << "error: graph has no exploit scores; run 'propagate' first\n";
    return kExitInput;
  }
  const int kk = k > 0 ? k : static_cast<int>(parsed.graph.devices().size());
  RiskReport report = weakest_link_report(parsed.graph, top, kk, max_len);
  Json j = report.to_json(parsed.provenance);
  if (!out_path.empty()) write_text_file(out_path, dump_json(j));
  if (opts.json_output) {
    std::cout << dump_json(j);
  } else {
    std::cout << report.to_text();
  }
  return kExitOk;
}

int cmd_generate(const GlobalOpts& opts, const std::string& params_path,
                 const std::string& out_spec, const std::string& out_catalog,
                 std::uint64_t seed_override, bool seed_set) {
  const FactorTable table = load_factor_table(opts);
  const MasterTemplate master = load_master_template_file(opts.template_path);
  GenParams params =
      params_path.empty() ? GenParams::defaults() : GenParams::parse(read_json_file(params_path));
  if (seed_set) params.seed = seed_override;

  GeneratedSystem sys = generate_system(params, master, table);
  write_text_file(out_spec, dump_json(sys.spec_doc));
  write_text_file(out_catalog, dump_json(sys.catalog_doc));
  if (opts.json_output) {
    std::cout << dump_json(Json{{"devices", sys.spec.devices.size()},
                                {"defenses", sys.catalog.size()},
                                {"seed", params.seed},
                                {"spec", out_spec},
                                {"catalog", out_catalog}});
  } else {
    std::cout << "generated " << sys.spec.devices.size() << " devices, " << sys.catalog.size()
              << " defenses (seed " << params.seed << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GRAVITAS: attack-graph risk management for IoT/CPS"};
  app.set_version_flag("--version", std::string(gravitas::kEngineVersion));
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--template", opts.template_path, "master template document")
      ->envname("GRAVITAS_TEMPLATE");
  app.add_option("--factors", opts.factors_path, "factor override JSON");
  app.add_flag("--json", opts.json_output, "machine-readable output");
  app.add_option("--threads", opts.threads, "OpenMP thread count (0 = runtime default)");

  // validate
  std::string spec_path, catalog_path, graph_path, out_path, csv_path, params_path;
  auto* validate = app.add_subcommand("validate", "lint a system spec / template / catalog");
  validate->add_option("--spec", spec_path, "system spec JSON");
  validate->add_option("--catalog", catalog_path, "defense catalog JSON");

  // build
  auto* build = app.add_subcommand("build", "spec -> serialized attack graph");
  build->add_option("--spec", spec_path, "system spec JSON")->required();
  build->add_option("--out", out_path, "output graph JSON")->required();

  // score
  auto* score = app.add_subcommand("score", "compute vulnerability scores");
  score->add_option("--graph", graph_path, "graph JSON")->required();
  score->add_option("--out", out_path, "output graph JSON")->required();

  // propagate
  double sum_ratio = 0, exp_weight = 0, activation_base = 0;
  int max_cycle = 0, k = 0;
  auto* propagate = app.add_subcommand("propagate", "fixed-point exploit risk propagation");
  propagate->add_option("--graph", graph_path, "graph JSON")->required();
  propagate->add_option("--out", out_path, "output graph JSON");
  propagate->add_option("--sum-ratio", sum_ratio, "convergence floor");
  propagate->add_option("--exp-weight", exp_weight, "moving-average weight");
  propagate->add_option("--max-cycle", max_cycle, "cycle ceiling");
  propagate->add_option("--activation-base", activation_base, "activation base (default 7)");
  propagate->add_option("--k", k, "adversary score k (default: device count)");

  // optimize
  gravitas::OptimizerParams oparams;
  std::uint64_t seed = 0;
  auto* optimize = app.add_subcommand("optimize", "greedy defense-placement optimization");
  optimize->add_option("--graph", graph_path, "scored graph JSON")->required();
  optimize->add_option("--catalog", catalog_path, "defense catalog JSON")->required();
  optimize->add_option("--out", out_path, "output history JSON")->required();
  optimize->add_option("--csv", csv_path, "optimization curve CSV");
  optimize->add_option("--alpha-local", oparams.alpha_local, "local objective weighting");
  optimize->add_option("--alpha-global", oparams.alpha_global, "global objective weighting");
  optimize->add_option("--max-defenses", oparams.max_defenses, "round cap (-1 = unlimited)");
  optimize->add_option("--opt-halt", oparams.opt_halt_value, "global objective halt floor");
  optimize->add_option("--max-set-time", oparams.max_set_time, "defense-set residency cap");
  optimize->add_option("--set-size", oparams.set_size, "defense set size");
  optimize->add_option("--k", oparams.k, "adversary score k");
  auto* seed_opt = optimize->add_option("--seed", seed, "RNG seed");
  optimize->add_flag("--per-device-cost", oparams.per_device_cost_scaling,
                     "scale device-set cost per member");
  optimize->add_flag("--invert-local-delta", oparams.invert_local_delta,
                     "negate the risk delta in the local objective");

  // report
  int top = 10, max_len = 25;
  auto* report = app.add_subcommand("report", "weakest links and top exploit chains");
  report->add_option("--graph", graph_path, "propagated graph JSON")->required();
  report->add_option("--top", top, "rows/chains to report");
  report->add_option("--max-len", max_len, "chain length cap");
  report->add_option("--k", k, "adversary score k");
  report->add_option("--out", out_path, "write report JSON here");

  // generate
  std::string out_spec = "generated_spec.json", out_catalog = "generated_catalog.json";
  auto* generate = app.add_subcommand("generate", "TASC quasi-random system generation");
  generate->add_option("--params", params_path, "GenParams JSON");
  generate->add_option("--out-spec", out_spec, "output spec JSON");
  generate->add_option("--out-catalog", out_catalog, "output catalog JSON");
  auto* gen_seed_opt = generate->add_option("--seed", seed, "seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (validate->parsed()) return cmd_validate(opts, spec_path, catalog_path);
    if (build->parsed()) return cmd_build(opts, spec_path, out_path);
    if (score->parsed()) return cmd_score(opts, graph_path, out_path);
    if (propagate->parsed())
      return cmd_propagate(opts, graph_path, out_path, sum_ratio, exp_weight, max_cycle,
                           activation_base, k);
    if (optimize->parsed()) {
      if (seed_opt->count() > 0) oparams.seed = seed;
      return cmd_optimize(opts, graph_path, catalog_path, out_path, csv_path, oparams,
                          seed_opt->count() > 0);
    }
    if (report->parsed()) return cmd_report(opts, graph_path, top, max_len, k, out_path);
    if (generate->parsed())
      return cmd_generate(opts, params_path, out_spec, out_catalog, seed,
                          gen_seed_opt->count() > 0);
  } catch (const gravitas::Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}
