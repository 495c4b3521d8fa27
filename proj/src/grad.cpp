#include "qtrbm/grad.hpp"

#include <algorithm>
#include <cmath>

#include "qtrbm/errors.hpp"

namespace qtrbm {

ParamGradients ParamGradients::zeros(Eigen::Index visible, Eigen::Index hidden) {
  return {Mat::Zero(hidden, visible), Vec::Zero(visible), Vec::Zero(hidden), 0.0};
}

ParamGradients& ParamGradients::operator+=(const ParamGradients& other) {
  dw += other.dw;
  dc_v += other.dc_v;
  dc_h += other.dc_h;
  dlog_t += other.dlog_t;
  return *this;
}

ParamGradients& ParamGradients::operator*=(double s) {
  dw *= s;
  dc_v *= s;
  dc_h *= s;
  dlog_t *= s;
  return *this;
}

bool ParamGradients::all_finite() const {
  return dw.allFinite() && dc_v.allFinite() && dc_h.allFinite() && std::isfinite(dlog_t);
}

namespace {

using Wide = long double;
using WideMat = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;
using WideVec = Eigen::Matrix<Wide, Eigen::Dynamic, 1>;

Wide wide_softplus(Wide x) { return std::max(x, Wide{0}) + std::log1p(std::exp(-std::abs(x))); }

Wide wide_transfer(Wide x, Wide w, Wide t) {
  const Wide bound = std::abs(w);
  const Wide clamped = std::clamp(x, -bound, bound);
  const Wide mp = w > 0 ? clamped : (w < 0 ? -clamped : Wide{0});
  if (t <= 0) return mp;
  return mp + t * std::log1p(std::exp(-std::abs(x + w) / t)) - t * std::log1p(std::exp(-std::abs(x - w) / t));
}

// Masked CE in extended precision. Central differences of a double-precision
// loss carry ~1e-12 of cancellation noise, which swamps gradients of ~1e-9
// flowing through clamped evidence.
struct WideParams {
  WideMat w;
  WideVec c_v;
  WideVec c_h;
  Wide log_t = 0;
};

WideParams widen(const RbmParamsQT& p) { return {p.w.cast<Wide>(), p.c_v.cast<Wide>(), p.c_h.cast<Wide>(), p.log_t}; }

Wide wide_loss(const WideParams& p, const UnaryPotentials& u, const Vec& v, const QueryMask& q, int n_layers) {
  const Eigen::Index hidden = p.w.rows();
  const Eigen::Index visible = p.w.cols();
  const Wide t = std::exp(p.log_t);
  WideMat hv = WideMat::Zero(hidden, visible);
  WideMat vh = WideMat::Zero(visible, hidden);
  for (int n = 0; n < n_layers; ++n) {
    WideMat next_hv(hidden, visible);
    WideMat next_vh(visible, hidden);
    for (Eigen::Index j = 0; j < visible; ++j) {
      const Wide field_v = u.u_v[j] + p.c_v[j] + vh.row(j).sum();
      for (Eigen::Index i = 0; i < hidden; ++i) {
        const Wide field_h = u.u_h[i] + p.c_h[i] + hv.row(i).sum();
        next_hv(i, j) = wide_transfer(field_v - vh(j, i), p.w(i, j), t);
        next_vh(j, i) = wide_transfer(field_h - hv(i, j), p.w(i, j), t);
      }
    }
    hv = std::move(next_hv);
    vh = std::move(next_vh);
  }
  Wide total = 0;
  for (Eigen::Index j = 0; j < visible; ++j) {
    if (q.observed(static_cast<std::size_t>(j))) continue;
    const Wide z = u.u_v[j] + p.c_v[j] + vh.row(j).sum();
    total += v[j] * wide_softplus(-z) + (1 - v[j]) * wide_softplus(z);
  }
  return total;
}


// Entropy in nats of the Bernoulli distribution with logit z.
double bernoulli_entropy(double z) {
  const double a = std::abs(z);
  return std::log1p(std::exp(-a)) + a * sigmoid(-a);
}

}  // namespace

TransferPartials transfer_partials(double x, double w, double t) {
  if (t <= 0.0) {
    const double bound = std::abs(w);
    const double sign_w = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
    TransferPartials p;
    p.dx = std::abs(x) < bound ? sign_w : 0.0;
    p.dw = x > bound ? 1.0 : (x < -bound ? -1.0 : 0.0);
    return p;
  }
  // With the log-sum-exp form f = t lse(x/t, -w/t) - t lse((x-w)/t, 0) the
  // partials are smooth everywhere, including on |x| = |w|.
  const double a = (x + w) / t;
  const double b = (x - w) / t;
  const double s_a = sigmoid(a);
  const double s_b = sigmoid(b);
  return {s_a - s_b, s_a + s_b - 1.0, bernoulli_entropy(a) - bernoulli_entropy(b)};
}

double query_loss(const RbmParamsQT& params, const Vec& v, const QueryMask& q, int n_layers, double clamp_l) {
  const UnaryPotentials u = encode_evidence(v, q, params.hidden(), clamp_l);
  const Beliefs b = infer(params, u, n_layers);
  return masked_ce(v, b.v_hat, q);
}

ParamGradients backward(const RbmParamsQT& params, const ForwardTrace& trace, const Vec& v, const QueryMask& q) {
  const Eigen::Index hidden = params.hidden();
  const Eigen::Index visible = params.visible();
  const std::size_t layers = trace.layers();
  if (layers == 0 || trace.states.size() != layers + 1 || trace.pre_vh.size() != layers ||
      trace.v_logit.size() != visible || trace.pre_hv.front().rows() != hidden ||
      trace.pre_hv.front().cols() != visible) {
    throw InvariantError("backward: trace shape does not match parameters");
  }
  if (trace.temperature != params.temperature()) {
    throw InvariantError("backward: trace was recorded at a different temperature");
  }
  if (v.size() != visible || q.size() != static_cast<std::size_t>(visible)) {
    throw DimensionError("backward: sample or mask length does not match parameters");
  }

  const double t = trace.temperature;
  ParamGradients g = ParamGradients::zeros(visible, hidden);

  // d loss / d visible logit = v_hat - v on outputs.
  Vec dz = Vec::Zero(visible);
  for (Eigen::Index j = 0; j < visible; ++j) {
    if (q.is_output(static_cast<std::size_t>(j))) dz[j] = sigmoid(trace.v_logit[j]) - v[j];
  }
  g.dc_v += dz;

  // Gradients w.r.t. the message state entering the read-out. The hidden
  // read-out is not part of the loss, so M_HV^(N) receives nothing.
  Mat g_vh = dz.replicate(1, hidden);  // V x H
  Mat g_hv = Mat::Zero(hidden, visible);
  Mat gx_hv(hidden, visible);
  Mat gx_vh(visible, hidden);
  double dt = 0.0;

  for (std::size_t n = layers; n-- > 0;) {
    const Mat& pre_hv = trace.pre_hv[n];
    const Mat& pre_vh = trace.pre_vh[n];
    for (Eigen::Index j = 0; j < visible; ++j) {
      for (Eigen::Index i = 0; i < hidden; ++i) {
        const double w = params.w(i, j);
        const TransferPartials to_hidden = transfer_partials(pre_hv(i, j), w, t);
        const TransferPartials to_visible = transfer_partials(pre_vh(j, i), w, t);
        const double up = g_hv(i, j);
        const double down = g_vh(j, i);
        gx_hv(i, j) = up * to_hidden.dx;
        gx_vh(j, i) = down * to_visible.dx;
        g.dw(i, j) += up * to_hidden.dw + down * to_visible.dw;
        dt += up * to_hidden.dt + down * to_visible.dt;
      }
    }
    const Vec visible_field_grad = gx_hv.colwise().sum().transpose();  // V
    const Vec hidden_field_grad = gx_vh.colwise().sum().transpose();   // H
    g.dc_v += visible_field_grad;
    g.dc_h += hidden_field_grad;
    if (n == 0) break;  // the initial state is constant
    // pre_hv(i, j) = ... + sum_k vh(j, k) - vh(j, i)
    g_vh = (-gx_hv.transpose()).colwise() + visible_field_grad;
    // pre_vh(j, i) = ... + sum_k hv(i, k) - hv(i, j)
    g_hv = (-gx_vh.transpose()).colwise() + hidden_field_grad;
  }
  g.dlog_t = t * dt;
  return g;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

GradCheckReport finite_diff_check(const RbmParamsQT& params, const Vec& v, const QueryMask& q, int n_layers,
                                  double step, double tolerance, double clamp_l, double kink_margin) {
  if (!(step >= 1e-6 && step <= 1e-3)) throw DomainError("finite_diff_check: step must lie in [1e-6, 1e-3]");
  const UnaryPotentials u = encode_evidence(v, q, params.hidden(), clamp_l);
  const auto [beliefs, trace] = forward(params, u, n_layers);
  const ParamGradients analytic = backward(params, trace, v, q);

  // Near-zero temperatures behave like max-product; skip coordinates whose
  // weight sits on a kink of the clamp in any layer.
  auto near_kink = [&](Eigen::Index i, Eigen::Index j) {
    if (trace.temperature >= kink_margin) return false;
    const double bound = std::abs(params.w(i, j));
    for (std::size_t n = 0; n < trace.layers(); ++n) {
      if (std::abs(std::abs(trace.pre_hv[n](i, j)) - bound) < kink_margin) return true;
      if (std::abs(std::abs(trace.pre_vh[n](j, i)) - bound) < kink_margin) return true;
    }
    return false;
  };

  GradCheckReport report;
  report.tolerance = tolerance;
  const WideParams wide = widen(params);
  auto probe = [&](const char* name, Eigen::Index r, Eigen::Index c, double a, auto&& set) {
    WideParams plus = wide;
    WideParams minus = wide;
    set(plus, Wide{step});
    set(minus, -Wide{step});
    const double numeric = static_cast<double>((wide_loss(plus, u, v, q, n_layers) - wide_loss(minus, u, v, q, n_layers)) /
                                               (2 * Wide{step}));
    report.entries.push_back({name, r, c, a, numeric, relative_error(a, numeric)});
  };

  for (Eigen::Index i = 0; i < params.hidden(); ++i) {
    for (Eigen::Index j = 0; j < params.visible(); ++j) {
      if (near_kink(i, j)) {
        ++report.skipped;
        continue;
      }
      probe("w", i, j, analytic.dw(i, j), [i, j](WideParams& p, Wide d) { p.w(i, j) += d; });
    }
  }
  for (Eigen::Index j = 0; j < params.visible(); ++j) {
    probe("c_v", j, 0, analytic.dc_v[j], [j](WideParams& p, Wide d) { p.c_v[j] += d; });
  }
  for (Eigen::Index i = 0; i < params.hidden(); ++i) {
    probe("c_h", i, 0, analytic.dc_h[i], [i](WideParams& p, Wide d) { p.c_h[i] += d; });
  }
  if (trace.temperature >= kink_margin) {
    probe("log_t", 0, 0, analytic.dlog_t, [](WideParams& p, Wide d) { p.log_t += d; });
  } else {
    ++report.skipped;
  }

  double sum = 0.0;
  for (const auto& e : report.entries) {
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    sum += e.rel_error;
  }
  if (!report.entries.empty()) report.mean_rel_error = sum / static_cast<double>(report.entries.size());
  return report;
}

}  // namespace qtrbm
