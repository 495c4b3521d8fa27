#include "qtrbm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtrbm/errors.hpp"

namespace qtrbm {

namespace {

void sample_hidden(const RbmParamsStd& p, const Vec& v, Vec& h, Rng& rng) {
  const Vec field = p.w * v + p.b_h;
  for (Eigen::Index i = 0; i < field.size(); ++i) h[i] = bernoulli(rng, sigmoid(field[i])) ? 1.0 : 0.0;
}

Vec hidden_probs(const RbmParamsStd& p, const Vec& v) {
  return (p.w * v + p.b_h).unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace

GibbsChainState random_chain_state(Eigen::Index visible, Eigen::Index hidden, Rng& rng) {
  GibbsChainState s{Vec(visible), Vec(hidden)};
  for (Eigen::Index j = 0; j < visible; ++j) s.v[j] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
  for (Eigen::Index i = 0; i < hidden; ++i) s.h[i] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
  return s;
}

GibbsChainState gibbs_sweep(const RbmParamsStd& params, const GibbsChainState& state, Rng& rng) {
  if (state.v.size() != params.visible() || state.h.size() != params.hidden()) {
    throw DimensionError("gibbs_sweep: chain state does not match the model");
  }
  GibbsChainState next = state;
  sample_hidden(params, next.v, next.h, rng);
  const Vec field = params.w.transpose() * next.h + params.b_v;
  for (Eigen::Index j = 0; j < field.size(); ++j) next.v[j] = bernoulli(rng, sigmoid(field[j])) ? 1.0 : 0.0;
  return next;
}

std::vector<double> gibbs_conditional_inference(const RbmParamsStd& params, const Vec& v, const QueryMask& q,
                                                int n_samples, int burn_in, std::uint64_t seed) {
  if (n_samples < 1 || burn_in < 0) throw DomainError("gibbs inference needs n_samples > 0 and burn_in >= 0");
  if (v.size() != params.visible() || q.size() != static_cast<std::size_t>(params.visible())) {
    throw DimensionError("gibbs inference: sample or query length does not match the model");
  }
  const std::vector<std::size_t> outputs = q.output_indices();
  if (outputs.empty()) return {};

  Rng rng(seed);
  Vec state = v;
  for (std::size_t j : outputs) state[static_cast<Eigen::Index>(j)] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
  Vec h = Vec::Zero(params.hidden());
  std::vector<double> counts(outputs.size(), 0.0);
  const int sweeps = burn_in + n_samples;
  for (int s = 0; s < sweeps; ++s) {
    sample_hidden(params, state, h, rng);
    for (std::size_t m = 0; m < outputs.size(); ++m) {
      const auto j = static_cast<Eigen::Index>(outputs[m]);
      const double field = params.w.col(j).dot(h) + params.b_v[j];
      state[j] = bernoulli(rng, sigmoid(field)) ? 1.0 : 0.0;
      if (s >= burn_in) counts[m] += state[j];
    }
  }
  for (double& c : counts) {
    c = std::clamp(c / static_cast<double>(n_samples), kGibbsClampEps, 1.0 - kGibbsClampEps);
  }
  return counts;
}

void PcdConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || n_chains < 0 || gibbs_steps_per_update < 1 || hidden_units < 1 ||
      valid_gibbs_samples < 1 || valid_gibbs_burn_in < 0 || threads < 1) {
    throw DomainError("pcd config: integer settings must be positive");
  }
  if (learning_rates.empty()) throw DomainError("pcd config: no learning rate given");
  for (double lr : learning_rates) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw DomainError("pcd config: learning rates must be finite and >= 0");
  }
}

void pcd_update(RbmParamsStd& params, const BinaryDataset& data, const std::vector<std::size_t>& rows,
                PcdChains& chains, double learning_rate, int gibbs_steps) {
  if (rows.empty() || chains.states.empty()) throw DomainError("pcd_update: empty batch or no chains");
  for (auto& chain : chains.states) {
    for (int s = 0; s < gibbs_steps; ++s) chain = gibbs_sweep(params, chain, chains.rng);
  }

  Mat dw = Mat::Zero(params.hidden(), params.visible());
  Vec db_v = Vec::Zero(params.visible());
  Vec db_h = Vec::Zero(params.hidden());
  const double data_scale = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    const Vec v = data.sample(r);
    const Vec ph = hidden_probs(params, v);
    dw.noalias() += data_scale * ph * v.transpose();
    db_v += data_scale * v;
    db_h += data_scale * ph;
  }
  const double chain_scale = 1.0 / static_cast<double>(chains.states.size());
  for (const auto& chain : chains.states) {
    const Vec ph = hidden_probs(params, chain.v);
    dw.noalias() -= chain_scale * ph * chain.v.transpose();
    db_v -= chain_scale * chain.v;
    db_h -= chain_scale * ph;
  }
  params.w += learning_rate * dw;
  params.b_v += learning_rate * db_v;
  params.b_h += learning_rate * db_h;
}

namespace {

RbmParamsStd pcd_initial_params(const BinaryDataset& train, const PcdConfig& config) {
  RbmParamsStd p = RbmParamsStd::zeros(train.visible(), config.hidden_units);
  Rng rng = make_stream({config.seed, tag(StreamTag::kInit)});
  for (Eigen::Index j = 0; j < p.visible(); ++j) {
    for (Eigen::Index i = 0; i < p.hidden(); ++i) p.w(i, j) = uniform_range(rng, -config.init_scale, config.init_scale);
  }
  const Vec means = train.values.colwise().mean().transpose();
  for (Eigen::Index j = 0; j < p.visible(); ++j) p.b_v[j] = std::clamp(logit(means[j]), -3.0, 3.0);
  return p;
}

RbmParamsStd pcd_run(const BinaryDataset& train, const PcdConfig& config, double learning_rate) {
  RbmParamsStd params = pcd_initial_params(train, config);
  const int n_chains = config.n_chains > 0 ? config.n_chains : config.batch_size;
  PcdChains chains{{}, make_stream({config.seed, tag(StreamTag::kPcdChains)})};
  chains.states.reserve(static_cast<std::size_t>(n_chains));
  for (int c = 0; c < n_chains; ++c) chains.states.push_back(random_chain_state(params.visible(), params.hidden(), chains.rng));

  const std::size_t n = train.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle = make_stream({config.seed, tag(StreamTag::kTrainShuffle), static_cast<std::uint64_t>(epoch)});
    const std::vector<std::size_t> order = random_permutation(n, shuffle);
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      pcd_update(params, train, rows, chains, learning_rate, config.gibbs_steps_per_update);
    }
    if (!params.all_finite()) {
      throw NumericalError("pcd diverged at epoch " + std::to_string(epoch) + " with learning rate " +
                           std::to_string(learning_rate));
    }
  }
  return params;
}

}  // namespace

PcdResult pcd_train(const BinaryDataset& train, const BinaryDataset& valid, const PcdConfig& config) {
  config.validate();
  if (train.size() == 0) throw DataError("pcd: training set is empty");
  if (valid.size() > 0 && valid.visible() != train.visible()) {
    throw DataError("pcd: training and validation sets disagree on V");
  }
  PcdResult result;
  if (config.learning_rates.size() == 1) {
    result.params = pcd_run(train, config, config.learning_rates.front());
    result.learning_rate = config.learning_rates.front();
    return result;
  }
  if (valid.size() == 0) throw DataError("pcd: learning-rate selection needs a validation set");
  const std::uint64_t valid_seed = derive_seed({config.seed, tag(StreamTag::kValidQueries)});
  const std::vector<QueryMask> queries =
      generate_query_set(valid.size(), static_cast<std::size_t>(valid.visible()), config.valid_queries, valid_seed);
  double best = 0.0;
  for (double lr : config.learning_rates) {
    RbmParamsStd params = pcd_run(train, config, lr);
    const GibbsBackend backend(params, config.valid_gibbs_samples, config.valid_gibbs_burn_in,
                               derive_seed({config.seed, tag(StreamTag::kGibbsInference)}));
    const double score = nce(backend, valid, queries, valid_seed, config.threads).nce;
    result.valid_nce.push_back(score);
    if (result.valid_nce.size() == 1 || score < best) {
      best = score;
      result.params = std::move(params);
      result.learning_rate = lr;
    }
  }
  return result;
}

GibbsBackend::GibbsBackend(RbmParamsStd params, int n_samples, int burn_in, std::uint64_t seed, std::string name)
    : params_(std::move(params)), n_samples_(n_samples), burn_in_(burn_in), seed_(seed), name_(std::move(name)) {
  params_.validate();
  if (n_samples_ < 1 || burn_in_ < 0) throw DomainError("gibbs backend needs n_samples > 0 and burn_in >= 0");
}

Vec GibbsBackend::predict(const Vec& v, const QueryMask& q, std::size_t sample_index) const {
  Vec out = v;
  const std::vector<double> estimates =
      gibbs_conditional_inference(params_, v, q, n_samples_, burn_in_, derive_seed({seed_, sample_index}));
  const std::vector<std::size_t> outputs = q.output_indices();
  for (std::size_t m = 0; m < outputs.size(); ++m) out[static_cast<Eigen::Index>(outputs[m])] = estimates[m];
  return out;
}

QtnnBackend pcd_to_bp_backend(const RbmParamsStd& params, double clamp_l) {
  return QtnnBackend(from_standard(params), kBpBaselineLayers, clamp_l, "pcd-bp");
}

}  // namespace qtrbm
