#pragma once

#include <vector>

#include "gravitas/graph.hpp"

namespace gravitas {

struct PropagationParams {
  double sum_ratio = 1e-5;      // convergence floor on the mean entry delta
  double exp_weight = 0.1;      // weight of the newest score in the moving average
  int max_cycle = 100;          // ceiling on propagation cycles
  double activation_base = 7.0; // base of the activation 1 - b^(-union)

  void validate() const;  // throws std::invalid_argument outside legal ranges
};

// Algorithm-2 exploit risk for one node, reading the children's current
// exploit scores. Childless exploit goals return their vulnerability score so
// impact seeds the propagation; any other childless node evaluates to 0
// through the empty union product.
double calculate_exploit_score(const SystemGraph& g, int node_index, double activation_base);

// Full fixed-point propagation: exploit_score and exp_avg are reset to 0,
// then reverse breadth-first sweeps seeded from the exploit goals repeat until
// the mean over entry nodes of |new score - exp_avg| drops to sum_ratio or
// max_cycle is reached. Returns the number of cycles used (== max_cycle means
// the convergence test never fired).
int propagate_scores(SystemGraph& g, const PropagationParams& p);

// Incremental re-propagation after a defense landed on the given nodes (use
// the edge's source node for edge defenses). State is NOT reset: sweeps start
// from the affected set and walk to parents, converging to the same fixed
// point as a full propagation. Returns cycles used.
int propagate_from_defense(SystemGraph& g, const std::vector<int>& affected_nodes,
                           const PropagationParams& p);

// Eq.-3 adversary score: mean of the k largest entry-node exploit scores.
// Throws std::invalid_argument unless 1 <= k <= |A|.
double adversary_score(const SystemGraph& g, int k);

// Highest exploit score over a device's nodes; 0 for an unknown device.
double device_max_exploit_score(const SystemGraph& g, const DeviceInfo& device);

}  // namespace gravitas
