#pragma once

#include <string>
#include <vector>

#include "qtrbm/model.hpp"
#include "qtrbm/qtnn.hpp"

namespace qtrbm {

struct ParamGradients {
  Mat dw;
  Vec dc_v;
  Vec dc_h;
  double dlog_t = 0.0;

  static ParamGradients zeros(Eigen::Index visible, Eigen::Index hidden);

  ParamGradients& operator+=(const ParamGradients& other);
  ParamGradients& operator*=(double s);
  bool all_finite() const;
};

/// Partial derivatives of transfer(x, w, t).
struct TransferPartials {
  double dx = 0.0;
  double dw = 0.0;
  double dt = 0.0;
};

/// For t > 0 the transfer function is smooth and these are its exact
/// partials. At t = 0 they are the max-product subgradient: clamp' = 1 on the
/// open band |x| < |w| and 0 elsewhere, dt = 0.
TransferPartials transfer_partials(double x, double w, double t);

/// Masked cross-entropy of forward(params, encode_evidence(v, q)).
double query_loss(const RbmParamsQT& params, const Vec& v, const QueryMask& q, int n_layers,
                  double clamp_l = kDefaultClamp);

/// Reverse-mode gradient of masked_ce through the trace produced by forward()
/// on the same params and the encoding of (v, q).
/// Throws InvariantError if the trace does not match params.
ParamGradients backward(const RbmParamsQT& params, const ForwardTrace& trace, const Vec& v, const QueryMask& q);

struct GradCheckEntry {
  std::string parameter;  // "w", "c_v", "c_h", "log_t"
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t skipped = 0;  // coordinates inside a kink neighborhood
  double tolerance = 0.0;

  bool passed() const { return max_rel_error < tolerance; }
};

/// rel = |a - b| / max(1e-8, |a| + |b|).
double relative_error(double a, double b);

/// Compares backward() against central differences of the masked CE for every
/// parameter coordinate. The loss is re-evaluated in long double for the
/// differences. step must lie in [1e-6, 1e-3]. Coordinates whose
/// perturbation would cross a transfer kink (only possible at temperature 0)
/// are skipped when within kink_margin.
GradCheckReport finite_diff_check(const RbmParamsQT& params, const Vec& v, const QueryMask& q, int n_layers,
                                  double step, double tolerance, double clamp_l = kDefaultClamp,
                                  double kink_margin = 1e-3);

}  // namespace qtrbm
