#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gravitas/json_util.hpp"

#include "gravitas/graph.hpp"

namespace gravitas {

// Which grant type instantiates a parameterized goal ("Obtain authentication
// key to device i with permissions j" and friends).
enum class Parameterized { no, login, execute };

struct TemplateNode {
  std::string slug;
  std::string label;
  NodeKind kind = NodeKind::intermediate;
  Exploitability factors;  // template defaults; PR resolved later by position
  bool physical = false;
  bool login_flag = false;
  bool execute_flag = false;
  bool permission_head = false;  // always included in a permission copy
  Parameterized parameterized = Parameterized::no;
  std::vector<std::string> requires_tags;
};

struct TemplateEdge {
  std::string from;
  std::string to;
  bool predicted = false;
};

// The master attack-graph template J: a DAG of every known and predicted
// vulnerability from which per-device templates are filtered. Immutable after
// load; safe for concurrent reads.
class MasterTemplate {
 public:
  std::string version;
  std::vector<TemplateNode> nodes;  // document order
  std::vector<TemplateEdge> edges;

  int node_index(const std::string& slug) const;
  const TemplateNode& node(const std::string& slug) const;

  // Table-3 goal slugs absent from this template; empty for the shipped data.
  std::vector<std::string> missing_standard_goals() const;

  void build_index();

 private:
  std::unordered_map<std::string, int> index_;
};

// Slugs of the exploit goals every standard template is expected to carry.
extern const std::vector<std::string> kStandardGoalSlugs;

// Parses and validates a template document. Throws std::runtime_error on a
// schema violation, a cycle, or a template without any exploit goal.
MasterTemplate load_master_template(const Json& doc);
MasterTemplate load_master_template_file(const std::string& path);

// Category/subcategory-filtered subgraph of the master template.
struct DeviceTemplate {
  DeviceCategory category = DeviceCategory::sensor;
  Subcategories subcategories;
  const MasterTemplate* master = nullptr;
  std::vector<int> node_indices;                  // retained, document order
  std::vector<std::pair<int, int>> edge_indices;  // retained edges as (from,to) node indices

  bool contains(const std::string& slug) const;

  // Retained non-parameterized nodes, in template-document order. These are
  // the slugs that administrator impact/accessibility lists map onto.
  std::vector<const TemplateNode*> base_nodes() const;
  std::vector<std::string> goal_slugs() const;   // non-parameterized goals
  std::vector<std::string> entry_slugs() const;
};

// Applies the per-node requirement tags ("updatable", "external", "send",
// "receive", "cat:<category>"), then prunes every non-goal node that cannot
// reach a retained goal. Deterministic and idempotent.
DeviceTemplate derive_device_template(const MasterTemplate& m, DeviceCategory category,
                                      const Subcategories& subcategories);

bool tag_satisfied(const std::string& tag, DeviceCategory category, const Subcategories& subcats);

}  // namespace gravitas
