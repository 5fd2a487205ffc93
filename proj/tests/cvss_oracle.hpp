#pragma once

// Test-only transcription of the CVSS v3.1 "Base Metrics Equations",
// independent of the engine's scoring path. Weights are passed in explicitly
// so the adapted IoT weight set can be cross-checked with the same equations.

#include <cmath>

namespace cvss_oracle {

// Appendix-A Roundup: smallest number, specified to 1 decimal place, that is
// equal to or higher than its input.
inline double roundup(double value) {
  long long int_input = std::llround(value * 100000.0);
  if (int_input % 10000 == 0) {
    return static_cast<double>(int_input) / 100000.0;
  }
  return (std::floor(static_cast<double>(int_input) / 10000.0) + 1.0) / 10.0;
}

struct Metrics {
  double attack_vector = 0.85;
  double attack_complexity = 0.77;
  double privileges_required = 0.85;
  double user_interaction = 0.85;
  bool scope_changed = false;
  double confidentiality = 0.0;
  double integrity = 0.0;
  double availability = 0.0;
};

// Base score on the 0..10 scale. `impact_zero_rule` applies the
// specification's "If Impact <= 0 the Base Score is 0" clause; disable it to
// obtain the exploitability-only score the engine assigns to impact-free
// nodes.
inline double base_score(const Metrics& m, bool impact_zero_rule) {
  const double iss = 1.0 - (1.0 - m.confidentiality) * (1.0 - m.integrity) *
                               (1.0 - m.availability);
  double impact;
  if (m.scope_changed) {
    impact = 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15.0);
  } else {
    impact = 6.42 * iss;
  }
  const double exploitability = 8.22 * m.attack_vector * m.attack_complexity *
                                m.privileges_required * m.user_interaction;
  if (impact_zero_rule && impact <= 0.0) return 0.0;
  if (impact < 0.0) impact = 0.0;
  double score;
  if (m.scope_changed) {
    score = std::fmin(1.08 * (impact + exploitability), 10.0);
  } else {
    score = std::fmin(impact + exploitability, 10.0);
  }
  return roundup(score);
}

}  // namespace cvss_oracle
