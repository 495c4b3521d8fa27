#include "qtrbm/query.hpp"

#include <cstdlib>
#include <sstream>

#include "qtrbm/errors.hpp"

namespace qtrbm {

QueryDistribution QueryDistribution::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("bernoulli query probability must lie strictly inside (0, 1)");
  return {Mode::kBernoulli, p};
}

QueryDistribution QueryDistribution::parse(const std::string& text) {
  if (text == "pl") return single_output();
  if (text == "bernoulli") return bernoulli(0.5);
  const std::string prefix = "bernoulli:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    char* end = nullptr;
    const double p = std::strtod(rest.c_str(), &end);
    if (rest.empty() || end != rest.c_str() + rest.size()) {
      throw DomainError("cannot parse query probability in '" + text + "'");
    }
    return bernoulli(p);
  }
  throw DomainError("unknown query distribution '" + text + "' (expected bernoulli:P or pl)");
}

std::string QueryDistribution::to_string() const {
  if (mode == Mode::kSingleOutput) return "pl";
  std::ostringstream out;
  out.precision(17);
  out << "bernoulli:" << p;
  return out.str();
}

QueryMask sample_query(std::size_t v_dim, const QueryDistribution& dist, Rng& rng) {
  if (v_dim == 0) throw DomainError("sample_query: v_dim must be at least 1");
  std::vector<std::uint8_t> bits(v_dim, 1);
  if (dist.mode == QueryDistribution::Mode::kSingleOutput) {
    bits[uniform_index(rng, v_dim)] = 0;
    return QueryMask(std::move(bits));
  }
  for (;;) {
    bool any_output = false;
    for (auto& b : bits) {
      b = bernoulli(rng, dist.p) ? 1 : 0;
      any_output |= (b == 0);
    }
    if (any_output) return QueryMask(std::move(bits));
  }
}

std::vector<QueryMask> generate_query_set(std::size_t n_samples, std::size_t v_dim, const QueryDistribution& dist,
                                          std::uint64_t seed) {
  std::vector<QueryMask> out;
  out.reserve(n_samples);
  Rng rng = make_stream({seed, tag(StreamTag::kEvalQueries)});
  for (std::size_t i = 0; i < n_samples; ++i) out.push_back(sample_query(v_dim, dist, rng));
  return out;
}

}  // namespace qtrbm
