#pragma once

#include <cstdint>
#include <vector>

#include "qtrbm/dataset.hpp"
#include "qtrbm/grad.hpp"
#include "qtrbm/model.hpp"
#include "qtrbm/query.hpp"

namespace qtrbm {

struct TrainConfig {
  int n_layers = 10;
  int batch_size = 500;
  double learning_rate = 1e-2;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 0;
  double clamp_l = kDefaultClamp;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int hidden_units = 8;
  double init_scale = 0.01;  // W ~ U(-init_scale, init_scale)
  int threads = 1;           // affects speed only

  /// Throws DomainError unless every field is positive and patience <= max_epochs.
  void validate() const;
};

/// Learning rates tried by select_learning_rate when none are given.
inline const std::vector<double> kDefaultLearningRateGrid = {3e-2, 1e-2, 3e-3, 1e-3};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean over samples of summed output CE
  double valid_nce = 0.0;
  double temperature = 1.0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_valid_nce = 0.0;
};

struct AdamState {
  ParamGradients m;
  ParamGradients v;
  long step = 0;

  static AdamState zeros(Eigen::Index visible, Eigen::Index hidden);
};

/// Bias-corrected ADAM applied jointly to W, c_v, c_h and log_t.
void adam_step(RbmParamsQT& params, const ParamGradients& grads, AdamState& state, const TrainConfig& config);

/// W ~ U(-init_scale, init_scale), c_v = logit of the column means of `data`
/// clamped to [-3, 3], c_h = 0, log_t = 0.
RbmParamsQT initialize_params(const BinaryDataset& data, const TrainConfig& config);

struct BatchResult {
  double mean_loss = 0.0;
  ParamGradients grads;  // averaged over the batch
};

/// Mean masked CE and its gradient over (samples[k], masks[k]) pairs.
/// The reduction runs in sample order so the result is independent of threads.
BatchResult batch_loss_and_grad(const RbmParamsQT& params, const BinaryDataset& data,
                                const std::vector<std::size_t>& rows, const std::vector<QueryMask>& masks,
                                int n_layers, double clamp_l, int threads);

struct TrainResult {
  RbmParamsQT params;  // best-validation snapshot
  TrainHistory history;
};

/// Query-randomized training with one fresh mask per sample per step, ADAM
/// updates, validation NCE after every epoch on a fixed seeded query set and
/// early stopping after `patience` epochs without improvement.
/// Throws DataError on inconsistent or empty data, NumericalError on a
/// non-finite loss.
TrainResult train_qt(const BinaryDataset& train, const BinaryDataset& valid, const TrainConfig& config,
                     const QueryDistribution& dist);

struct LearningRateSearch {
  TrainResult best;
  double learning_rate = 0.0;
  std::vector<double> valid_nce;  // one per candidate, grid order
};

/// Runs train_qt for each candidate and keeps the lowest validation NCE.
LearningRateSearch select_learning_rate(const BinaryDataset& train, const BinaryDataset& valid,
                                        const TrainConfig& config, const QueryDistribution& dist,
                                        const std::vector<double>& grid = kDefaultLearningRateGrid);

}  // namespace qtrbm
