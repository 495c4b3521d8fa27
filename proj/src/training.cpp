#include "qtrbm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "qtrbm/errors.hpp"
#include "qtrbm/eval.hpp"
#include "qtrbm/parallel.hpp"

namespace qtrbm {

namespace {

void check_binary(const BinaryDataset& data, const char* what) {
  if (data.size() == 0) throw DataError(std::string(what) + " set is empty");
  for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
      const double x = data.values(r, c);
      if (x != 0.0 && x != 1.0) {
        throw DataError(std::string(what) + " set has non-binary value at row " + std::to_string(r) + ", column " +
                        std::to_string(c));
      }
    }
  }
}

// Output cross-entropy from pre-sigmoid logits: softplus(z) - v z.
double masked_ce_from_logits(const Vec& v, const Vec& logits, const QueryMask& q) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (q.observed(static_cast<std::size_t>(j))) continue;
    const double z = logits[j];
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - v[j] * z;
  }
  return total;
}

template <typename Block>
void adam_block(Block& param, const Block& grad, Block& m, Block& v, const TrainConfig& c, double bias1,
                double bias2) {
  m = c.adam_beta1 * m + (1.0 - c.adam_beta1) * grad;
  v = c.adam_beta2 * v + (1.0 - c.adam_beta2) * grad.cwiseProduct(grad);
  param -= (c.learning_rate * (m / bias1).array() / ((v / bias2).array().sqrt() + c.adam_eps)).matrix();
}

}  // namespace

void TrainConfig::validate() const {
  if (n_layers < 1 || batch_size < 1 || max_epochs < 1 || patience < 1 || hidden_units < 1 || threads < 1) {
    throw DomainError("training config: integer settings must be positive");
  }
  if (patience > max_epochs) throw DomainError("training config: patience exceeds max_epochs");
  if (!(learning_rate > 0.0) || !(clamp_l > 0.0) || !(adam_eps > 0.0) || !(init_scale >= 0.0)) {
    throw DomainError("training config: learning_rate, clamp_l and adam_eps must be positive");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw DomainError("training config: ADAM betas must lie in (0, 1)");
  }
}

AdamState AdamState::zeros(Eigen::Index visible, Eigen::Index hidden) {
  return {ParamGradients::zeros(visible, hidden), ParamGradients::zeros(visible, hidden), 0};
}

void adam_step(RbmParamsQT& params, const ParamGradients& grads, AdamState& state, const TrainConfig& config) {
  state.step += 1;
  const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
  adam_block(params.w, grads.dw, state.m.dw, state.v.dw, config, bias1, bias2);
  adam_block(params.c_v, grads.dc_v, state.m.dc_v, state.v.dc_v, config, bias1, bias2);
  adam_block(params.c_h, grads.dc_h, state.m.dc_h, state.v.dc_h, config, bias1, bias2);
  double& m = state.m.dlog_t;
  double& v = state.v.dlog_t;
  m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grads.dlog_t;
  v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * grads.dlog_t * grads.dlog_t;
  params.log_t -= config.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + config.adam_eps);
}

RbmParamsQT initialize_params(const BinaryDataset& data, const TrainConfig& config) {
  const Eigen::Index visible = data.visible();
  const Eigen::Index hidden = config.hidden_units;
  RbmParamsQT p = RbmParamsQT::zeros(visible, hidden);
  Rng rng = make_stream({config.seed, tag(StreamTag::kInit)});
  for (Eigen::Index j = 0; j < visible; ++j) {
    for (Eigen::Index i = 0; i < hidden; ++i) p.w(i, j) = uniform_range(rng, -config.init_scale, config.init_scale);
  }
  if (data.size() > 0) {
    const Vec means = data.values.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < visible; ++j) p.c_v[j] = std::clamp(logit(means[j]), -3.0, 3.0);
  }
  return p;
}

BatchResult batch_loss_and_grad(const RbmParamsQT& params, const BinaryDataset& data,
                                const std::vector<std::size_t>& rows, const std::vector<QueryMask>& masks,
                                int n_layers, double clamp_l, int threads) {
  if (rows.size() != masks.size() || rows.empty()) throw DimensionError("batch: rows and masks must align");
  std::vector<double> losses(rows.size());
  std::vector<ParamGradients> grads(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const Vec v = data.sample(rows[k]);
    const UnaryPotentials u = encode_evidence(v, masks[k], params.hidden(), clamp_l);
    const auto [beliefs, trace] = forward(params, u, n_layers);
    losses[k] = masked_ce_from_logits(v, trace.v_logit, masks[k]);
    grads[k] = backward(params, trace, v, masks[k]);
  });
  BatchResult out{0.0, ParamGradients::zeros(params.visible(), params.hidden())};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.mean_loss += losses[k];
    out.grads += grads[k];
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  out.mean_loss *= scale;
  out.grads *= scale;
  return out;
}

TrainResult train_qt(const BinaryDataset& train, const BinaryDataset& valid, const TrainConfig& config,
                     const QueryDistribution& dist) {
  config.validate();
  check_binary(train, "training");
  check_binary(valid, "validation");
  if (train.visible() != valid.visible()) throw DataError("training and validation sets disagree on V");
  const auto v_dim = static_cast<std::size_t>(train.visible());

  RbmParamsQT params = initialize_params(train, config);
  AdamState adam = AdamState::zeros(train.visible(), config.hidden_units);
  const std::uint64_t valid_seed = derive_seed({config.seed, tag(StreamTag::kValidQueries)});
  const std::vector<QueryMask> valid_queries = generate_query_set(valid.size(), v_dim, dist, valid_seed);

  TrainResult result{params, {}};
  result.history.best_valid_nce = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const std::size_t n = train.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng shuffle = make_stream({config.seed, tag(StreamTag::kTrainShuffle), static_cast<std::uint64_t>(epoch)});
    const std::vector<std::size_t> order = random_permutation(n, shuffle);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += batch, ++batch_index) {
      const std::size_t end = std::min(n, begin + batch);
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<QueryMask> masks;
      masks.reserve(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        Rng rng = make_stream({config.seed, tag(StreamTag::kTrainQuery), static_cast<std::uint64_t>(epoch),
                               batch_index, k});
        masks.push_back(sample_query(v_dim, dist, rng));
      }
      const BatchResult step = batch_loss_and_grad(params, train, rows, masks, config.n_layers, config.clamp_l,
                                                   config.threads);
      if (!std::isfinite(step.mean_loss) || !step.grads.all_finite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + " (non-finite loss or gradient)");
      }
      adam_step(params, step.grads, adam, config);
      if (!params.all_finite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": non-finite parameters");
      }
      loss_sum += step.mean_loss * static_cast<double>(rows.size());
    }

    const QtnnBackend backend(params, config.n_layers, config.clamp_l);
    const double valid_nce = nce(backend, valid, valid_queries, valid_seed, config.threads).nce;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(n), valid_nce, params.temperature(), seconds});

    if (valid_nce < result.history.best_valid_nce) {
      result.history.best_valid_nce = valid_nce;
      result.history.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

LearningRateSearch select_learning_rate(const BinaryDataset& train, const BinaryDataset& valid,
                                        const TrainConfig& config, const QueryDistribution& dist,
                                        const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("learning-rate grid is empty");
  LearningRateSearch search;
  for (double lr : grid) {
    TrainConfig c = config;
    c.learning_rate = lr;
    TrainResult r = train_qt(train, valid, c, dist);
    search.valid_nce.push_back(r.history.best_valid_nce);
    if (search.valid_nce.size() == 1 || r.history.best_valid_nce < search.best.history.best_valid_nce) {
      search.best = std::move(r);
      search.learning_rate = lr;
    }
  }
  return search;
}

}  // namespace qtrbm
