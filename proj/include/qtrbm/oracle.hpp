#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qtrbm/dataset.hpp"
#include "qtrbm/model.hpp"
#include "qtrbm/qtnn.hpp"

namespace qtrbm {

/// Exact enumeration is refused above this many units (V + H).
inline constexpr Eigen::Index kMaxEnumerationUnits = 24;
/// Joint tables are only materialized up to this many units.
inline constexpr Eigen::Index kMaxMaterializedUnits = 20;

/// Throws SizeLimitError if V + H exceeds kMaxEnumerationUnits.
void check_enumeration_size(const RbmParamsQT& params);

/// Normalized joint log-probabilities over all 2^(V+H) states. State index
/// bit j (j < V) is v_j, bit V + i is h_i.
class JointTable {
 public:
  explicit JointTable(const RbmParamsQT& params);

  Eigen::Index visible() const { return params_.visible(); }
  Eigen::Index hidden() const { return params_.hidden(); }
  std::uint64_t state_count() const { return std::uint64_t{1} << (visible() + hidden()); }
  double log_partition() const { return log_z_; }
  bool materialized() const { return log_probs_.has_value(); }

  double log_prob(std::uint64_t state) const;

  /// p(v_j = 1) for every visible unit and p(h_i = 1) for every hidden unit.
  Vec visible_marginals() const;
  Vec hidden_marginals() const;

 private:
  RbmParamsQT params_;
  double log_z_ = 0.0;
  std::optional<std::vector<double>> log_probs_;
};

/// Builds the exact joint. Throws SizeLimitError above kMaxEnumerationUnits.
JointTable enumerate_joint(const RbmParamsQT& params);

/// log sum_h exp(phi(v, h)) with the hidden sum in closed form.
double visible_log_weight(const RbmParamsQT& params, const Vec& v);

/// Exact p(v_j = 1 | inputs of q) for every output j of q, in increasing
/// index order. Conditions on the evidence first and then sums over the
/// remaining outputs (hidden units in closed form).
std::vector<double> exact_conditional(const RbmParamsQT& params, const Vec& v, const QueryMask& q);

/// Same quantity via the full joint table: marginalize, then condition.
std::vector<double> exact_conditional_via_joint(const JointTable& joint, const Vec& v, const QueryMask& q);

/// NCE achieved by the exact conditionals of `params` as the predictor.
double exact_nce(const RbmParamsQT& params, const BinaryDataset& test, const std::vector<QueryMask>& queries,
                 int threads = 1);

}  // namespace qtrbm
