#pragma once

#include <cstdint>
#include <vector>

#include "qtrbm/dataset.hpp"
#include "qtrbm/eval.hpp"
#include "qtrbm/model.hpp"
#include "qtrbm/rng.hpp"

namespace qtrbm {

/// Estimates from conditional Gibbs are clamped to [eps, 1 - eps].
inline constexpr double kGibbsClampEps = 1e-3;

struct GibbsChainState {
  Vec v;  // 0/1 entries
  Vec h;
};

/// One block update: h ~ p(h | v), then v ~ p(v | h), with
/// p(h_i = 1 | v) = sigma((W v)_i + b_h[i]) and p(v_j = 1 | h) = sigma((W'h)_j + b_v[j]).
GibbsChainState gibbs_sweep(const RbmParamsStd& params, const GibbsChainState& state, Rng& rng);

/// Random binary starting state.
GibbsChainState random_chain_state(Eigen::Index visible, Eigen::Index hidden, Rng& rng);

/// Output-unit marginals estimated by Gibbs sampling with inputs clamped.
/// Returns one estimate per output of q in increasing index order.
std::vector<double> gibbs_conditional_inference(const RbmParamsStd& params, const Vec& v, const QueryMask& q,
                                                int n_samples, int burn_in, std::uint64_t seed);

struct PcdConfig {
  int epochs = 1000;
  std::vector<double> learning_rates = {1e-2};  // more than one triggers validation selection
  int n_chains = 0;                             // 0 means batch_size
  int gibbs_steps_per_update = 1;
  int batch_size = 500;
  int hidden_units = 8;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
  // Validation-time conditional Gibbs settings.
  QueryDistribution valid_queries = QueryDistribution::bernoulli(0.5);
  int valid_gibbs_samples = 1000;
  int valid_gibbs_burn_in = 100;
  int threads = 1;

  void validate() const;
};

struct PcdChains {
  std::vector<GibbsChainState> states;
  Rng rng;
};

/// One PCD update on the given rows: advance every chain gibbs_steps sweeps,
/// then ascend the log-likelihood gradient
///   dW  = lr * (E_data[p(h|v) v'] - E_chains[p(h|v~) v~'])
///   db_v = lr * (E_data[v] - E_chains[v~])
///   db_h = lr * (E_data[p(h|v)] - E_chains[p(h|v~)]).
void pcd_update(RbmParamsStd& params, const BinaryDataset& data, const std::vector<std::size_t>& rows,
                PcdChains& chains, double learning_rate, int gibbs_steps);

struct PcdResult {
  RbmParamsStd params;
  double learning_rate = 0.0;
  std::vector<double> valid_nce;  // per learning-rate candidate
};

/// Persistent contrastive divergence. With several candidate learning rates,
/// each is trained from the same initialization and the one with the lowest
/// validation NCE under conditional Gibbs inference is returned.
/// Throws NumericalError if the parameters diverge.
PcdResult pcd_train(const BinaryDataset& train, const BinaryDataset& valid, const PcdConfig& config);

/// Conditional Gibbs sampling as an inference backend. Sample k uses a stream
/// derived from (seed, k).
class GibbsBackend final : public InferenceBackend {
 public:
  GibbsBackend(RbmParamsStd params, int n_samples, int burn_in, std::uint64_t seed, std::string name = "pcd-gibbs");
  std::string name() const override { return name_; }
  Eigen::Index visible() const override { return params_.visible(); }
  Vec predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const override;

 private:
  RbmParamsStd params_;
  int n_samples_;
  int burn_in_;
  std::uint64_t seed_;
  std::string name_;
};

inline constexpr int kBpBaselineLayers = 10;

/// Standard-parameterized weights run through the unrolled network at T = 1, N = 10.
QtnnBackend pcd_to_bp_backend(const RbmParamsStd& params, double clamp_l = kDefaultClamp);

}  // namespace qtrbm
