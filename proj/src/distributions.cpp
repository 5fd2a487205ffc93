#include "gravitas/distributions.hpp"

#include <algorithm>
#include <stdexcept>

namespace gravitas {

double DistSpec::sample(Rng& rng) const {
  switch (family) {
    case Family::uniform:
      return rng.uniform(params.at(0), params.at(1));
    case Family::categorical:
      return values.at(rng.categorical(weights.empty()
                                           ? std::vector<double>(values.size(), 1.0)
                                           : weights));
    case Family::truncated_normal:
      return std::clamp(rng.normal(params.at(0), params.at(1)), 0.0, 1.0);
  }
  return 0.0;
}

DistSpec DistSpec::uniform(double lo, double hi) {
  DistSpec d;
  d.family = Family::uniform;
  d.params = {lo, hi};
  return d;
}

DistSpec DistSpec::categorical(std::vector<double> values, std::vector<double> weights) {
  DistSpec d;
  d.family = Family::categorical;
  d.values = std::move(values);
  d.weights = std::move(weights);
  return d;
}

DistSpec DistSpec::truncated_normal(double mean, double stddev) {
  DistSpec d;
  d.family = Family::truncated_normal;
  d.params = {mean, stddev};
  return d;
}

DistSpec DistSpec::parse(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "uniform") return uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (family == "truncated_normal")
    return truncated_normal(j.at("mean").get<double>(), j.at("stddev").get<double>());
  if (family == "categorical") {
    DistSpec d;
    d.family = Family::categorical;
    for (const auto& v : j.at("values")) d.values.push_back(v.get<double>());
    if (j.contains("weights"))
      for (const auto& w : j.at("weights")) d.weights.push_back(w.get<double>());
    return d;
  }
  throw std::invalid_argument("unknown distribution family: '" + family + "'");
}

}  // namespace gravitas
