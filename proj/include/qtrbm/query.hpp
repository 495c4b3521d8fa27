#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtrbm/qtnn.hpp"
#include "qtrbm/rng.hpp"

namespace qtrbm {

/// Which variables a query leaves as outputs.
struct QueryDistribution {
  enum class Mode { kBernoulli, kSingleOutput };
  Mode mode = Mode::kBernoulli;
  double p = 0.5;  // probability that a unit is observed, bernoulli mode only

  static QueryDistribution bernoulli(double p = 0.5);
  static QueryDistribution single_output() { return {Mode::kSingleOutput, 0.5}; }

  /// Parses "bernoulli:P", "bernoulli" or "pl".
  static QueryDistribution parse(const std::string& text);
  std::string to_string() const;
};

/// Bernoulli mode resamples whole masks until at least one unit is an output;
/// single-output mode hides exactly one uniformly chosen unit.
QueryMask sample_query(std::size_t v_dim, const QueryDistribution& dist, Rng& rng);

/// One mask per test sample, reproducible from seed, never all-observed.
std::vector<QueryMask> generate_query_set(std::size_t n_samples, std::size_t v_dim, const QueryDistribution& dist,
                                          std::uint64_t seed);

}  // namespace qtrbm
