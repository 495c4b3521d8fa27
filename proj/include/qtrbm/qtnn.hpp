#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qtrbm/model.hpp"

namespace qtrbm {

/// Default logit clamp for hard evidence: sigma(20) = 1 - 2e-9.
inline constexpr double kDefaultClamp = 20.0;

/// Splits the visible units into inputs (1, observed) and outputs (0).
class QueryMask {
 public:
  QueryMask() = default;
  explicit QueryMask(std::vector<std::uint8_t> bits);

  static QueryMask all_observed(std::size_t n) { return QueryMask(std::vector<std::uint8_t>(n, 1)); }
  static QueryMask all_hidden(std::size_t n) { return QueryMask(std::vector<std::uint8_t>(n, 0)); }

  std::size_t size() const { return bits_.size(); }
  bool observed(std::size_t j) const { return bits_[j] != 0; }
  bool is_output(std::size_t j) const { return bits_[j] == 0; }
  std::size_t output_count() const;
  std::vector<std::size_t> output_indices() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const QueryMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Logit-space evidence. u_h is always zero for an RBM.
struct UnaryPotentials {
  Vec u_v;
  Vec u_h;
};

/// Directed logit messages between the two layers of the RBM.
struct MessageState {
  Mat hv;  // H x V, visible j -> hidden i
  Mat vh;  // V x H, hidden i -> visible j

  static MessageState zeros(Eigen::Index visible, Eigen::Index hidden);
};

struct Beliefs {
  Vec v_hat;
  Vec h_hat;
};

/// Everything needed to replay a forward pass in reverse.
struct ForwardTrace {
  std::vector<MessageState> states;  // N + 1 entries, states[0] is all zeros
  std::vector<Mat> pre_hv;           // N entries, transfer inputs producing states[n+1].hv
  std::vector<Mat> pre_vh;           // N entries, transfer inputs producing states[n+1].vh
  Vec v_logit;                       // pre-sigmoid visible outputs
  Vec h_logit;
  double temperature = 1.0;

  std::size_t layers() const { return pre_hv.size(); }
};

/// u_v[j] = q[j] * clamp(logit(v[j]), -clamp_l, clamp_l), u_h = 0.
/// Throws DomainError if any v[j] lies outside [0, 1].
UnaryPotentials encode_evidence(const Vec& v, const QueryMask& q, Eigen::Index hidden, double clamp_l = kDefaultClamp);

double sigmoid(double x);
double logit(double p);

/// sp(x, t) = t log(1 + exp(x / t)), evaluated as max(x, 0) + t log1p(exp(-|x| / t)).
double softplus_t(double x, double t);

/// Max-product transfer: sign(w) * clamp(x, -|w|, |w|).
double transfer_mp(double x, double w);

/// Temperature-t transfer through a binary pairwise factor scoring 0 on
/// agreement and -w on disagreement. t = 0 is exactly transfer_mp.
double transfer(double x, double w, double t);

/// One fully parallel message update; both new matrices are computed from `m`.
MessageState message_layer(const RbmParamsQT& params, const UnaryPotentials& u, const MessageState& m);

/// Runs n_layers message updates from the zero state and reads out beliefs.
std::pair<Beliefs, ForwardTrace> forward(const RbmParamsQT& params, const UnaryPotentials& u, int n_layers);

/// Same beliefs as forward() without recording a trace.
Beliefs infer(const RbmParamsQT& params, const UnaryPotentials& u, int n_layers);

/// Cross-entropy in nats summed over the output dimensions of q.
/// Throws DomainError if an output belief is not strictly inside (0, 1).
double masked_ce(const Vec& v, const Vec& v_hat, const QueryMask& q);

}  // namespace qtrbm
