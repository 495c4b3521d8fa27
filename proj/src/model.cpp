#include "qtrbm/model.hpp"

#include <string>

#include "qtrbm/errors.hpp"

namespace qtrbm {

namespace {

void check_shapes(const Mat& w, const Vec& a, const Vec& b, const char* a_name, const char* b_name) {
  if (a.size() != w.cols() || b.size() != w.rows()) {
    throw DimensionError("parameter shapes inconsistent: w is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + ", " + a_name + " has " + std::to_string(a.size()) + ", " +
                         b_name + " has " + std::to_string(b.size()));
  }
}

void check_binary_state(const Vec& x, Eigen::Index n, const char* what) {
  if (x.size() != n) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(n));
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (x[k] != 0.0 && x[k] != 1.0) throw DomainError(std::string(what) + " is not binary");
  }
}

}  // namespace

RbmParamsQT RbmParamsQT::zeros(Eigen::Index visible, Eigen::Index hidden) {
  return {Mat::Zero(hidden, visible), Vec::Zero(visible), Vec::Zero(hidden), 0.0};
}

bool RbmParamsQT::all_finite() const {
  return w.allFinite() && c_v.allFinite() && c_h.allFinite() && std::isfinite(log_t);
}

void RbmParamsQT::validate() const {
  check_shapes(w, c_v, c_h, "c_v", "c_h");
  if (!all_finite()) throw DomainError("parameters contain non-finite entries");
}

RbmParamsStd RbmParamsStd::zeros(Eigen::Index visible, Eigen::Index hidden) {
  return {Mat::Zero(hidden, visible), Vec::Zero(visible), Vec::Zero(hidden)};
}

bool RbmParamsStd::all_finite() const { return w.allFinite() && b_v.allFinite() && b_h.allFinite(); }

void RbmParamsStd::validate() const {
  check_shapes(w, b_v, b_h, "b_v", "b_h");
  if (!all_finite()) throw DomainError("parameters contain non-finite entries");
}

double energy_qt(const RbmParamsQT& params, const Vec& v, const Vec& h) {
  params.validate();
  check_binary_state(v, params.visible(), "v");
  check_binary_state(h, params.hidden(), "h");
  const Vec w_row_sums = params.w.rowwise().sum();     // W 1_V
  const Vec w_col_sums = params.w.colwise().sum().transpose();  // W'1_H
  return 2.0 * h.dot(params.w * v) + h.dot(params.c_h - w_row_sums) + v.dot(params.c_v - w_col_sums);
}

double energy_std(const RbmParamsStd& params, const Vec& v, const Vec& h) {
  params.validate();
  check_binary_state(v, params.visible(), "v");
  check_binary_state(h, params.hidden(), "h");
  return h.dot(params.w * v) + params.b_h.dot(h) + params.b_v.dot(v);
}

RbmParamsQT from_standard(const RbmParamsStd& std_params) {
  std_params.validate();
  RbmParamsQT out;
  out.w = std_params.w * 0.5;
  out.c_h = std_params.b_h + out.w.rowwise().sum();
  out.c_v = std_params.b_v + out.w.colwise().sum().transpose();
  out.log_t = 0.0;
  return out;
}

RbmParamsStd to_standard(const RbmParamsQT& params) {
  params.validate();
  RbmParamsStd out;
  out.w = params.w * 2.0;
  out.b_h = params.c_h - params.w.rowwise().sum();
  out.b_v = params.c_v - params.w.colwise().sum().transpose();
  return out;
}

}  // namespace qtrbm
