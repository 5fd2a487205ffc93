#pragma once

#include <vector>

#include "gravitas/json_util.hpp"
#include "gravitas/rng.hpp"

namespace gravitas {

// Sampling distribution: uniform(lo,hi), categorical over explicit values, or
// a normal clamped into [0,1]. Shared by the TASC generator and the system-spec
// auto-fill path so every random draw flows through one seeded stream.
struct DistSpec {
  enum class Family { uniform, categorical, truncated_normal };
  Family family = Family::uniform;
  std::vector<double> params;   // uniform: {lo,hi}; truncated_normal: {mean,stddev}
  std::vector<double> values;   // categorical support
  std::vector<double> weights;  // categorical weights

  double sample(Rng& rng) const;
  static DistSpec uniform(double lo, double hi);
  static DistSpec categorical(std::vector<double> values, std::vector<double> weights);
  static DistSpec truncated_normal(double mean, double stddev);
  static DistSpec parse(const Json& j);
};

}  // namespace gravitas
