#include "qtrbm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "qtrbm/errors.hpp"
#include "qtrbm/oracle.hpp"
#include "qtrbm/parallel.hpp"

namespace qtrbm {

namespace {

// Beliefs of exactly 0 or 1 would make the cross-entropy infinite.
constexpr double kBeliefFloor = 1e-15;

void check_sample(Eigen::Index visible, const Vec& v, const QueryMask& q) {
  if (v.size() != visible || q.size() != static_cast<std::size_t>(visible)) {
    throw DimensionError("sample or query length does not match the backend");
  }
}

}  // namespace

Vec UniformBackend::predict(const Vec& v, const QueryMask& q, std::size_t) const {
  check_sample(visible_, v, q);
  return Vec::Constant(visible_, 0.5);
}

QtnnBackend::QtnnBackend(RbmParamsQT params, int n_layers, double clamp_l, std::string name)
    : params_(std::move(params)), n_layers_(n_layers), clamp_l_(clamp_l), name_(std::move(name)) {
  params_.validate();
  if (n_layers_ < 1) throw DomainError("qtnn backend needs at least one layer");
}

Vec QtnnBackend::predict(const Vec& v, const QueryMask& q, std::size_t) const {
  const UnaryPotentials u = encode_evidence(v, q, params_.hidden(), clamp_l_);
  return infer(params_, u, n_layers_).v_hat;
}

OracleBackend::OracleBackend(RbmParamsQT params) : params_(std::move(params)) {
  params_.validate();
  check_enumeration_size(params_);
}

Vec OracleBackend::predict(const Vec& v, const QueryMask& q, std::size_t) const {
  Vec out = v;
  const std::vector<double> marginals = exact_conditional(params_, v, q);
  const std::vector<std::size_t> outputs = q.output_indices();
  for (std::size_t m = 0; m < outputs.size(); ++m) out[static_cast<Eigen::Index>(outputs[m])] = marginals[m];
  return out;
}

EvalReport nce(const InferenceBackend& backend, const BinaryDataset& test, const std::vector<QueryMask>& queries,
               std::uint64_t query_seed, int threads) {
  if (queries.size() != test.size()) {
    throw DimensionError("nce: " + std::to_string(queries.size()) + " queries for " + std::to_string(test.size()) +
                         " samples");
  }
  if (test.visible() != backend.visible()) throw DimensionError("nce: dataset and backend disagree on V");

  EvalReport report;
  report.backend = backend.name();
  report.dataset = test.name;
  report.query_seed = query_seed;
  report.per_sample_ce.assign(test.size(), 0.0);
  parallel_for(test.size(), threads, [&](std::size_t k) {
    const Vec v = test.sample(k);
    try {
      Vec beliefs = backend.predict(v, queries[k], k);
      beliefs = beliefs.cwiseMax(kBeliefFloor).cwiseMin(1.0 - kBeliefFloor);
      report.per_sample_ce[k] = masked_ce(v, beliefs, queries[k]);
    } catch (const Error& e) {
      throw Error("backend '" + backend.name() + "' failed on sample " + std::to_string(k) + ": " + e.what());
    }
  });
  double total = 0.0;
  for (double ce : report.per_sample_ce) total += ce;
  for (const auto& q : queries) report.total_outputs += q.output_count();
  report.nce = report.total_outputs == 0 ? 0.0 : total / (static_cast<double>(report.total_outputs) * std::numbers::ln2);
  return report;
}

double nce_base2(const EvalReport& report) {
  if (report.total_outputs == 0) return 0.0;
  double bits = 0.0;
  for (double ce : report.per_sample_ce) bits += ce / std::numbers::ln2;
  // A uniform predictor costs exactly one bit per output.
  return bits / static_cast<double>(report.total_outputs);
}

std::vector<EvalReport> compare(const std::vector<const InferenceBackend*>& backends, const BinaryDataset& test,
                                const std::vector<QueryMask>& queries, std::uint64_t query_seed, int threads) {
  std::vector<EvalReport> out;
  out.reserve(backends.size());
  for (const InferenceBackend* b : backends) out.push_back(nce(*b, test, queries, query_seed, threads));
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "backend,dataset,seed,nce\n";
  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.6f", r.nce);
    out << r.backend << ',' << r.dataset << ',' << r.query_seed << ',' << buf << '\n';
  }
}

const std::vector<ReferenceNce>& reference_nce_table() {
  static const std::vector<ReferenceNce> table = {
      {"pcd-bp", "adult", 0.215},  {"pcd-bp", "conn4", 0.285},  {"pcd-bp", "digits", 0.530},
      {"pcd-bp", "dna", 0.763},    {"pcd-bp", "mushrooms", 0.159}, {"pcd-bp", "nips", 0.801},
      {"pcd-bp", "ocr", 0.428},    {"pcd-bp", "rcv1", 0.457},   {"pcd-bp", "web", 0.140},
      {"pcd-gibbs", "adult", 0.218}, {"pcd-gibbs", "conn4", 0.288}, {"pcd-gibbs", "digits", 0.516},
      {"pcd-gibbs", "dna", 0.765},   {"pcd-gibbs", "mushrooms", 0.159}, {"pcd-gibbs", "nips", 0.804},
      {"pcd-gibbs", "ocr", 0.427},   {"pcd-gibbs", "rcv1", 0.458},  {"pcd-gibbs", "web", 0.144},
      {"qtnn", "adult", 0.167},    {"qtnn", "conn4", 0.148},    {"qtnn", "digits", 0.472},
      {"qtnn", "dna", 0.766},      {"qtnn", "mushrooms", 0.124}, {"qtnn", "nips", 0.787},
      {"qtnn", "ocr", 0.377},      {"qtnn", "rcv1", 0.452},     {"qtnn", "web", 0.133},
  };
  return table;
}

}  // namespace qtrbm
