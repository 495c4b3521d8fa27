#include "qtrbm/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qtrbm/errors.hpp"
#include "qtrbm/eval.hpp"

namespace qtrbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Running log-sum-exp.
class LogSum {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Vec bits_to_vec(std::uint64_t bits, Eigen::Index offset, Eigen::Index n) {
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = static_cast<double>((bits >> (offset + k)) & 1U);
  return out;
}

// phi(v, h) = h'a(v) + b(v), with a(v) = 2Wv + c_h - W1_V and b(v) = v'(c_v - W'1_H).
struct VisibleTerms {
  Vec hidden_field;
  double visible_term;
};

VisibleTerms visible_terms(const RbmParamsQT& p, const Vec& v) {
  return {2.0 * (p.w * v) + p.c_h - p.w.rowwise().sum(), v.dot(p.c_v - p.w.colwise().sum().transpose())};
}

double dot_bits(const Vec& field, std::uint64_t h_bits) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    if ((h_bits >> i) & 1U) s += field[i];
  }
  return s;
}

void check_query(const RbmParamsQT& params, const Vec& v, const QueryMask& q) {
  if (v.size() != params.visible() || q.size() != static_cast<std::size_t>(params.visible())) {
    throw DimensionError("sample or query length does not match the model");
  }
}

}  // namespace

void check_enumeration_size(const RbmParamsQT& params) {
  const Eigen::Index units = params.visible() + params.hidden();
  if (units > kMaxEnumerationUnits) {
    throw SizeLimitError("exact enumeration refused: model has " + std::to_string(units) +
                         " units, limit is " + std::to_string(kMaxEnumerationUnits));
  }
}

JointTable::JointTable(const RbmParamsQT& params) : params_(params) {
  params_.validate();
  check_enumeration_size(params_);
  const Eigen::Index visible = params_.visible();
  const Eigen::Index hidden = params_.hidden();
  const bool keep = visible + hidden <= kMaxMaterializedUnits;
  std::vector<double> table;
  if (keep) table.resize(state_count());

  LogSum total;
  const std::uint64_t v_states = std::uint64_t{1} << visible;
  const std::uint64_t h_states = std::uint64_t{1} << hidden;
  for (std::uint64_t vb = 0; vb < v_states; ++vb) {
    const VisibleTerms terms = visible_terms(params_, bits_to_vec(vb, 0, visible));
    for (std::uint64_t hb = 0; hb < h_states; ++hb) {
      const double phi = dot_bits(terms.hidden_field, hb) + terms.visible_term;
      total.add(phi);
      if (keep) table[vb | (hb << visible)] = phi;
    }
  }
  log_z_ = total.value();
  if (keep) {
    for (double& x : table) x -= log_z_;
    log_probs_ = std::move(table);
  }
}

double JointTable::log_prob(std::uint64_t state) const {
  if (state >= state_count()) throw DomainError("joint state index out of range");
  if (log_probs_) return (*log_probs_)[state];
  const Eigen::Index visible = params_.visible();
  const VisibleTerms terms = visible_terms(params_, bits_to_vec(state, 0, visible));
  return dot_bits(terms.hidden_field, state >> visible) + terms.visible_term - log_z_;
}

Vec JointTable::visible_marginals() const {
  Vec out = Vec::Zero(visible());
  for (std::uint64_t s = 0; s < state_count(); ++s) {
    const double p = std::exp(log_prob(s));
    for (Eigen::Index j = 0; j < visible(); ++j) {
      if ((s >> j) & 1U) out[j] += p;
    }
  }
  return out;
}

Vec JointTable::hidden_marginals() const {
  Vec out = Vec::Zero(hidden());
  for (std::uint64_t s = 0; s < state_count(); ++s) {
    const double p = std::exp(log_prob(s));
    for (Eigen::Index i = 0; i < hidden(); ++i) {
      if ((s >> (visible() + i)) & 1U) out[i] += p;
    }
  }
  return out;
}

JointTable enumerate_joint(const RbmParamsQT& params) { return JointTable(params); }

double visible_log_weight(const RbmParamsQT& params, const Vec& v) {
  const VisibleTerms terms = visible_terms(params, v);
  double s = terms.visible_term;
  for (Eigen::Index i = 0; i < terms.hidden_field.size(); ++i) s += log1p_exp(terms.hidden_field[i]);
  return s;
}

std::vector<double> exact_conditional(const RbmParamsQT& params, const Vec& v, const QueryMask& q) {
  params.validate();
  check_enumeration_size(params);
  check_query(params, v, q);
  const std::vector<std::size_t> outputs = q.output_indices();
  const std::size_t k = outputs.size();
  if (k == 0) return {};

  Vec state = v;
  LogSum total;
  std::vector<LogSum> on(k);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << k); ++a) {
    for (std::size_t m = 0; m < k; ++m) state[static_cast<Eigen::Index>(outputs[m])] = static_cast<double>((a >> m) & 1U);
    const double lw = visible_log_weight(params, state);
    total.add(lw);
    for (std::size_t m = 0; m < k; ++m) {
      if ((a >> m) & 1U) on[m].add(lw);
    }
  }
  std::vector<double> out(k);
  for (std::size_t m = 0; m < k; ++m) out[m] = std::exp(on[m].value() - total.value());
  return out;
}

std::vector<double> exact_conditional_via_joint(const JointTable& joint, const Vec& v, const QueryMask& q) {
  const Eigen::Index visible = joint.visible();
  if (v.size() != visible || q.size() != static_cast<std::size_t>(visible)) {
    throw DimensionError("sample or query length does not match the model");
  }
  const std::vector<std::size_t> outputs = q.output_indices();
  if (outputs.empty()) return {};
  // Marginal over visible states first, then condition on the evidence.
  const std::uint64_t v_states = std::uint64_t{1} << visible;
  const std::uint64_t h_states = std::uint64_t{1} << joint.hidden();
  std::uint64_t evidence_mask = 0;
  std::uint64_t evidence_bits = 0;
  for (Eigen::Index j = 0; j < visible; ++j) {
    if (q.observed(static_cast<std::size_t>(j))) {
      evidence_mask |= std::uint64_t{1} << j;
      if (v[j] != 0.0) evidence_bits |= std::uint64_t{1} << j;
    }
  }
  LogSum denominator;
  std::vector<LogSum> on(outputs.size());
  for (std::uint64_t vb = 0; vb < v_states; ++vb) {
    LogSum marginal;
    for (std::uint64_t hb = 0; hb < h_states; ++hb) marginal.add(joint.log_prob(vb | (hb << visible)));
    if ((vb & evidence_mask) != evidence_bits) continue;
    const double lp = marginal.value();
    denominator.add(lp);
    for (std::size_t m = 0; m < outputs.size(); ++m) {
      if ((vb >> outputs[m]) & 1U) on[m].add(lp);
    }
  }
  std::vector<double> out(outputs.size());
  for (std::size_t m = 0; m < outputs.size(); ++m) out[m] = std::exp(on[m].value() - denominator.value());
  return out;
}

double exact_nce(const RbmParamsQT& params, const BinaryDataset& test, const std::vector<QueryMask>& queries,
                 int threads) {
  check_enumeration_size(params);
  return nce(OracleBackend(params), test, queries, 0, threads).nce;
}

}  // namespace qtrbm
