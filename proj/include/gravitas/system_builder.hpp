#pragma once

#include <map>
#include <string>
#include <vector>

#include "gravitas/json_util.hpp"

#include "gravitas/cvss.hpp"
#include "gravitas/distributions.hpp"
#include "gravitas/graph.hpp"
#include "gravitas/propagation.hpp"
#include "gravitas/template_catalog.hpp"

namespace gravitas {

// One named credential on a device: `target` is the device being accessed,
// `holders` are the devices possessing the credential.
struct PermissionGrant {
  std::string name;
  PermissionType type = PermissionType::login;
  std::string target;
  std::vector<std::string> holders;
};

// Impact/accessibility assignment in either of the two accepted shapes: an
// ordered list matching the derived template's goal/entry order, or a map
// keyed by template slug. Values were already resolved to numbers at parse
// time (level strings like "high" go through the factor table).
struct ScoreAssignment {
  bool is_list = false;
  bool is_map = false;
  std::vector<double> list;
  std::map<std::string, double> by_slug;
};

struct DeviceSpecEntry {
  std::string name;
  DeviceCategory category = DeviceCategory::sensor;
  Subcategories subcategories;
  std::string device_set;

  ScoreAssignment confidentiality;
  ScoreAssignment integrity;
  ScoreAssignment availability;
  ScoreAssignment accessibility;

  std::vector<PermissionGrant> login_permissions;
  std::vector<PermissionGrant> execute_permissions;
  bool general_permissions = false;
  std::vector<std::string> local_network;
};

// Optional impact/accessibility auto-fill: scores a spec leaves unset are
// drawn from these distributions on one seeded stream at build time, so the
// seed plus the system spec reproduce the exact system.
struct AutoFill {
  std::uint64_t seed = 0;
  DistSpec impact = DistSpec::categorical({0.0, 0.2, 0.56}, {0.35, 0.35, 0.30});
  DistSpec accessibility = DistSpec::categorical({0.4, 0.6, 0.8}, {0.5, 0.3, 0.2});
};

struct SystemSpec {
  std::vector<DeviceSpecEntry> devices;
  PropagationParams propagation;
  int k = -1;  // adversary-score parameter; -1 = device count
  std::string defense_catalog;     // optional path reference
  Json optimizer_params; // raw optimizer parameter block, if any
  std::optional<AutoFill> auto_fill;

  const DeviceSpecEntry* find_device(const std::string& name) const;
};

// A grant held BY a device (the holder side of a PermissionGrant).
struct HeldGrant {
  std::string target;
  std::string permission;
  PermissionType type = PermissionType::login;
};

// Parses and validates the administrator's system specification. Defaults are
// filled per the documented rules (missing topology -> disconnected device,
// missing impacts -> 0, missing accessibility -> the "low" level). Throws
// std::runtime_error carrying every detected problem.
SystemSpec parse_system_spec(const Json& doc, const FactorTable& table);
SystemSpec parse_system_spec_file(const std::string& path, const FactorTable& table);

// Instantiates one device: base template copy, one permission-subgraph copy
// per grant on the device, and one parameterized goal instance per grant the
// device holds. Throws on score-list length mismatches.
DeviceGraph instantiate_device(const DeviceSpecEntry& dev, const DeviceTemplate& tmpl,
                               const std::vector<PermissionGrant>& grants_on_device,
                               const std::vector<HeldGrant>& grants_held,
                               const FactorTable& table);

struct BuildResult {
  SystemGraph graph;
  std::vector<Violation> warnings;  // skipped connection rules etc.
  int connection_count = 0;         // device-level links (adjacency + grants)
};

// Joins instantiated device graphs with the inter-device edges dictated by
// the system spec's permissions and topology. Connection rules referencing a node
// absent from a reduced template are skipped with a warning, not fatally.
BuildResult connect_devices(std::vector<DeviceGraph> devices, const SystemSpec& spec);

// Convenience pipeline: derive templates, instantiate every device (in
// parallel when asked; instantiation order never affects the result), then
// connect. Does not score.
BuildResult build_system(const SystemSpec& spec, const MasterTemplate& master,
                         const FactorTable& table, bool parallel = false);

// Symmetric device adjacency derived from the local_network lists, as sorted
// unique name pairs (first < second).
std::vector<std::pair<std::string, std::string>> device_adjacency(const SystemSpec& spec);

// All grants across the system spec (login + execute), ordered by (target, name).
std::vector<PermissionGrant> all_grants(const SystemSpec& spec);

// Grants held by `holder`, including synthesized "general" grants for
// adjacent devices with general_permissions, ordered by (target, permission).
std::vector<HeldGrant> grants_held_by(const SystemSpec& spec, const std::string& holder);

}  // namespace gravitas
