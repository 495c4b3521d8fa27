#include "qtrbm/qtnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtrbm/errors.hpp"

namespace qtrbm {

QueryMask::QueryMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw DomainError("query mask entries must be 0 or 1");
  }
}

std::size_t QueryMask::output_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
}

std::vector<std::size_t> QueryMask::output_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < bits_.size(); ++j) {
    if (bits_[j] == 0) out.push_back(j);
  }
  return out;
}

MessageState MessageState::zeros(Eigen::Index visible, Eigen::Index hidden) {
  return {Mat::Zero(hidden, visible), Mat::Zero(visible, hidden)};
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

UnaryPotentials encode_evidence(const Vec& v, const QueryMask& q, Eigen::Index hidden, double clamp_l) {
  if (static_cast<std::size_t>(v.size()) != q.size()) {
    throw DimensionError("evidence has length " + std::to_string(v.size()) + " but query mask has " +
                         std::to_string(q.size()));
  }
  if (!(clamp_l > 0.0) || !std::isfinite(clamp_l)) throw DomainError("evidence clamp must be finite and positive");
  UnaryPotentials u{Vec::Zero(v.size()), Vec::Zero(hidden)};
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double x = v[j];
    if (!(x >= 0.0 && x <= 1.0)) {
      throw DomainError("evidence v[" + std::to_string(j) + "] = " + std::to_string(x) + " is outside [0, 1]");
    }
    if (!q.observed(static_cast<std::size_t>(j))) continue;
    // logit(0) = -inf and logit(1) = +inf both land on the clamp.
    u.u_v[j] = std::clamp(logit(x), -clamp_l, clamp_l);
  }
  return u;
}

double softplus_t(double x, double t) { return std::max(x, 0.0) + t * std::log1p(std::exp(-std::abs(x) / t)); }

double transfer_mp(double x, double w) {
  const double bound = std::abs(w);
  const double clamped = std::clamp(x, -bound, bound);
  return w > 0.0 ? clamped : (w < 0.0 ? -clamped : 0.0);
}

double transfer(double x, double w, double t) {
  if (t <= 0.0) return transfer_mp(x, w);
  return transfer_mp(x, w) + softplus_t(-std::abs(x + w), t) - softplus_t(-std::abs(x - w), t);
}

namespace {

// Transfer inputs for both directions, computed from the old state:
//   pre_hv(i, j) = u_v[j] + c_v[j] + sum_k vh(j, k) - vh(j, i)
//   pre_vh(j, i) = u_h[i] + c_h[i] + sum_k hv(i, k) - hv(i, j)
void layer_inputs(const RbmParamsQT& params, const UnaryPotentials& u, const MessageState& m, Mat& pre_hv,
                  Mat& pre_vh) {
  const Vec visible_field = u.u_v + params.c_v + m.vh.rowwise().sum();
  const Vec hidden_field = u.u_h + params.c_h + m.hv.rowwise().sum();
  pre_hv = (-m.vh.transpose()).rowwise() + visible_field.transpose();
  pre_vh = (-m.hv.transpose()).rowwise() + hidden_field.transpose();
}

MessageState apply_transfer(const RbmParamsQT& params, const Mat& pre_hv, const Mat& pre_vh, double t) {
  const Eigen::Index hidden = params.hidden();
  const Eigen::Index visible = params.visible();
  MessageState next{Mat(hidden, visible), Mat(visible, hidden)};
  for (Eigen::Index j = 0; j < visible; ++j) {
    for (Eigen::Index i = 0; i < hidden; ++i) {
      const double w = params.w(i, j);
      next.hv(i, j) = transfer(pre_hv(i, j), w, t);
      next.vh(j, i) = transfer(pre_vh(j, i), w, t);
    }
  }
  return next;
}

void check_layer_shapes(const RbmParamsQT& params, const UnaryPotentials& u) {
  params.validate();
  if (u.u_v.size() != params.visible() || u.u_h.size() != params.hidden()) {
    throw DimensionError("unary potentials do not match parameter shapes");
  }
}

Beliefs read_out(const RbmParamsQT& params, const UnaryPotentials& u, const MessageState& m, Vec* v_logit,
                 Vec* h_logit) {
  const Vec vz = u.u_v + params.c_v + m.vh.rowwise().sum();
  const Vec hz = u.u_h + params.c_h + m.hv.rowwise().sum();
  Beliefs b{vz.unaryExpr([](double x) { return sigmoid(x); }), hz.unaryExpr([](double x) { return sigmoid(x); })};
  if (v_logit) *v_logit = vz;
  if (h_logit) *h_logit = hz;
  return b;
}

}  // namespace

MessageState message_layer(const RbmParamsQT& params, const UnaryPotentials& u, const MessageState& m) {
  check_layer_shapes(params, u);
  if (m.hv.rows() != params.hidden() || m.hv.cols() != params.visible() || m.vh.rows() != params.visible() ||
      m.vh.cols() != params.hidden()) {
    throw DimensionError("message state does not match parameter shapes");
  }
  Mat pre_hv, pre_vh;
  layer_inputs(params, u, m, pre_hv, pre_vh);
  return apply_transfer(params, pre_hv, pre_vh, params.temperature());
}

std::pair<Beliefs, ForwardTrace> forward(const RbmParamsQT& params, const UnaryPotentials& u, int n_layers) {
  check_layer_shapes(params, u);
  if (n_layers < 1) throw DomainError("forward needs at least one layer");
  ForwardTrace trace;
  trace.temperature = params.temperature();
  trace.states.reserve(static_cast<std::size_t>(n_layers) + 1);
  trace.pre_hv.resize(static_cast<std::size_t>(n_layers));
  trace.pre_vh.resize(static_cast<std::size_t>(n_layers));
  trace.states.push_back(MessageState::zeros(params.visible(), params.hidden()));
  for (int n = 0; n < n_layers; ++n) {
    auto& pre_hv = trace.pre_hv[static_cast<std::size_t>(n)];
    auto& pre_vh = trace.pre_vh[static_cast<std::size_t>(n)];
    layer_inputs(params, u, trace.states.back(), pre_hv, pre_vh);
    trace.states.push_back(apply_transfer(params, pre_hv, pre_vh, trace.temperature));
  }
  Beliefs beliefs = read_out(params, u, trace.states.back(), &trace.v_logit, &trace.h_logit);
  return {std::move(beliefs), std::move(trace)};
}

Beliefs infer(const RbmParamsQT& params, const UnaryPotentials& u, int n_layers) {
  check_layer_shapes(params, u);
  if (n_layers < 1) throw DomainError("forward needs at least one layer");
  const double t = params.temperature();
  MessageState m = MessageState::zeros(params.visible(), params.hidden());
  Mat pre_hv, pre_vh;
  for (int n = 0; n < n_layers; ++n) {
    layer_inputs(params, u, m, pre_hv, pre_vh);
    m = apply_transfer(params, pre_hv, pre_vh, t);
  }
  return read_out(params, u, m, nullptr, nullptr);
}

double masked_ce(const Vec& v, const Vec& v_hat, const QueryMask& q) {
  if (v.size() != v_hat.size() || static_cast<std::size_t>(v.size()) != q.size()) {
    throw DimensionError("masked_ce: v, v_hat and q must have the same length");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (q.observed(static_cast<std::size_t>(j))) continue;
    const double p = v_hat[j];
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("masked_ce: belief " + std::to_string(p) + " at index " + std::to_string(j) +
                        " is not inside (0, 1)");
    }
    total -= v[j] * std::log(p) + (1.0 - v[j]) * std::log1p(-p);
  }
  return total;
}

}  // namespace qtrbm
