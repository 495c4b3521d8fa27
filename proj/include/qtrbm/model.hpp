#pragma once

#include <cmath>

#include "qtrbm/types.hpp"

namespace qtrbm {

/// RBM in the query-training parameterization.
///
/// The unnormalized log-density is
///   phi(v, h) = 2 h'Wv + h'(c_h - W 1_V) + v'(c_v - W'1_H),
/// under which each (h_i, v_j) pair scores 0 when the units agree and -w_ij
/// when they disagree. Message-passing temperature is T = exp(log_t).
struct RbmParamsQT {
  Mat w;    // H x V
  Vec c_v;  // V
  Vec c_h;  // H
  double log_t = 0.0;

  static RbmParamsQT zeros(Eigen::Index visible, Eigen::Index hidden);

  Eigen::Index visible() const { return w.cols(); }
  Eigen::Index hidden() const { return w.rows(); }
  double temperature() const { return std::exp(log_t); }

  /// Throws DimensionError on inconsistent shapes, DomainError on non-finite entries.
  void validate() const;
  bool all_finite() const;
};

/// RBM in the standard parameterization: E(v, h) = h'W v + b_h'h + b_v'v.
struct RbmParamsStd {
  Mat w;    // H x V
  Vec b_v;  // V
  Vec b_h;  // H

  static RbmParamsStd zeros(Eigen::Index visible, Eigen::Index hidden);

  Eigen::Index visible() const { return w.cols(); }
  Eigen::Index hidden() const { return w.rows(); }

  void validate() const;
  bool all_finite() const;
};

/// phi(v, h; theta) for binary v, h. Throws DimensionError on shape mismatch.
double energy_qt(const RbmParamsQT& params, const Vec& v, const Vec& h);

/// h'W_std v + b_h'h + b_v'v.
double energy_std(const RbmParamsStd& params, const Vec& v, const Vec& h);

/// W = W_std / 2, c_h = b_h + W 1_V, c_v = b_v + W'1_H, log_t = 0.
RbmParamsQT from_standard(const RbmParamsStd& std_params);

/// Exact inverse of from_standard; the temperature is dropped.
RbmParamsStd to_standard(const RbmParamsQT& params);

}  // namespace qtrbm
