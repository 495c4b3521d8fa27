#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qtrbm/dataset.hpp"
#include "qtrbm/model.hpp"
#include "qtrbm/qtnn.hpp"
#include "qtrbm/query.hpp"

namespace qtrbm {

/// (v, q) -> beliefs p(v_j = 1) for all visible units. Only entries where
/// q[j] = 0 are read by the caller. Implementations must be thread-safe.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual std::string name() const = 0;
  virtual Eigen::Index visible() const = 0;
  /// sample_index lets stochastic backends derive a per-sample stream.
  virtual Vec predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const = 0;
};

class UniformBackend final : public InferenceBackend {
 public:
  explicit UniformBackend(Eigen::Index visible) : visible_(visible) {}
  std::string name() const override { return "uniform"; }
  Eigen::Index visible() const override { return visible_; }
  Vec predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const override;

 private:
  Eigen::Index visible_;
};

class QtnnBackend final : public InferenceBackend {
 public:
  QtnnBackend(RbmParamsQT params, int n_layers, double clamp_l = kDefaultClamp, std::string name = "qtnn");
  std::string name() const override { return name_; }
  Eigen::Index visible() const override { return params_.visible(); }
  Vec predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const override;

  const RbmParamsQT& params() const { return params_; }

 private:
  RbmParamsQT params_;
  int n_layers_;
  double clamp_l_;
  std::string name_;
};

class OracleBackend final : public InferenceBackend {
 public:
  explicit OracleBackend(RbmParamsQT params);
  std::string name() const override { return "oracle"; }
  Eigen::Index visible() const override { return params_.visible(); }
  Vec predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const override;

 private:
  RbmParamsQT params_;
};

struct EvalReport {
  std::string backend;
  std::string dataset;
  std::uint64_t query_seed = 0;
  std::vector<double> per_sample_ce;  // nats
  std::size_t total_outputs = 0;
  double nce = 0.0;
};

/// Sum of per-sample masked CE divided by total_outputs * log 2.
/// Backend failures are rethrown as Error with the sample index attached.
EvalReport nce(const InferenceBackend& backend, const BinaryDataset& test, const std::vector<QueryMask>& queries,
               std::uint64_t query_seed = 0, int threads = 1);

/// Same ratio computed with base-2 logarithms throughout.
double nce_base2(const EvalReport& report);

/// One report per backend on the identical query set.
std::vector<EvalReport> compare(const std::vector<const InferenceBackend*>& backends, const BinaryDataset& test,
                                const std::vector<QueryMask>& queries, std::uint64_t query_seed = 0,
                                int threads = 1);

/// "backend,dataset,seed,nce" header plus one row per report, nce to 6 decimals.
void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports);

/// Full-scale NCE values on the standard binary benchmark suite,
/// kept as reference rows for report output.
struct ReferenceNce {
  const char* method;
  const char* dataset;
  double nce;
};
const std::vector<ReferenceNce>& reference_nce_table();

}  // namespace qtrbm
