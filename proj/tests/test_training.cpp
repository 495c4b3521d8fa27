#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qtrbm/data_io.hpp"
#include "qtrbm/errors.hpp"
#include "qtrbm/eval.hpp"
#include "qtrbm/training.hpp"
#include "test_util.hpp"

using namespace qtrbm;

namespace {

struct SmallProblem {
  BinaryDataset train;
  BinaryDataset valid;
  BinaryDataset test;
};

SmallProblem small_problem() {
  const SyntheticData s = generate_synthetic({8, 4, 1.5, 1.0, 600, 31});
  const DatasetSplits parts = split_dataset(s.data, {0.7, 0.15, 0.15}, 31);
  return {parts.train, parts.valid, parts.test};
}

TrainConfig small_config() {
  TrainConfig c;
  c.n_layers = 5;
  c.batch_size = 60;
  c.learning_rate = 3e-2;
  c.max_epochs = 12;
  c.patience = 12;
  c.hidden_units = 4;
  c.seed = 5;
  return c;
}

// A model whose only nonzero coordinate is w(0, 0).
RbmParamsQT scalar_model(double x) {
  RbmParamsQT p = RbmParamsQT::zeros(1, 1);
  p.w(0, 0) = x;
  return p;
}

}  // namespace

TEST_CASE("adam leaves parameters alone under a zero gradient") {
  RbmParamsQT p = testing::random_qt(4, 3, 1.0, 1);
  const RbmParamsQT before = p;
  AdamState state = AdamState::zeros(4, 3);
  TrainConfig c;
  for (int k = 0; k < 5; ++k) adam_step(p, ParamGradients::zeros(4, 3), state, c);
  CHECK(p.w == before.w);
  CHECK(p.c_v == before.c_v);
  CHECK(p.log_t == before.log_t);
  CHECK(state.step == 5);
}

TEST_CASE("first adam step has magnitude lr per coordinate") {
  RbmParamsQT p = testing::random_qt(3, 2, 1.0, 2);
  const RbmParamsQT before = p;
  ParamGradients g = ParamGradients::zeros(3, 2);
  g.dw(0, 1) = 4.0;
  g.dc_v[2] = -0.5;
  g.dlog_t = 1e-3;
  AdamState state = AdamState::zeros(3, 2);
  TrainConfig c;
  c.learning_rate = 0.05;
  adam_step(p, g, state, c);
  CHECK(p.w(0, 1) - before.w(0, 1) == doctest::Approx(-0.05).epsilon(1e-6));
  CHECK(p.c_v[2] - before.c_v[2] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(p.log_t - before.log_t == doctest::Approx(-0.05).epsilon(1e-4));
  CHECK(p.w(1, 1) == before.w(1, 1));
}

TEST_CASE("adam trajectory on a quadratic") {
  RbmParamsQT p = scalar_model(1.0);
  AdamState state = AdamState::zeros(1, 1);
  TrainConfig c;
  c.learning_rate = 0.1;
  const double expected[] = {0.9000000005, 0.8004122286917928, 0.7015862729460303};
  for (double e : expected) {
    ParamGradients g = ParamGradients::zeros(1, 1);
    g.dw(0, 0) = 2.0 * p.w(0, 0);
    adam_step(p, g, state, c);
    CHECK(p.w(0, 0) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("a small gradient step lowers the batch loss") {
  const SmallProblem prob = small_problem();
  RbmParamsQT p = testing::random_qt(8, 4, 0.5, 3);
  std::vector<std::size_t> rows(50);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = k;
  const auto masks = generate_query_set(rows.size(), 8, QueryDistribution::bernoulli(0.5), 4);
  const BatchResult r0 = batch_loss_and_grad(p, prob.train, rows, masks, 5, kDefaultClamp, 1);
  const double lr = 1e-3;
  p.w -= lr * r0.grads.dw;
  p.c_v -= lr * r0.grads.dc_v;
  p.c_h -= lr * r0.grads.dc_h;
  p.log_t -= lr * r0.grads.dlog_t;
  const BatchResult r1 = batch_loss_and_grad(p, prob.train, rows, masks, 5, kDefaultClamp, 1);
  CHECK(r1.mean_loss < r0.mean_loss);
}

TEST_CASE("batch gradient matches the mean of per-sample losses and ignores threads") {
  const SmallProblem prob = small_problem();
  const RbmParamsQT p = testing::random_qt(8, 4, 0.7, 6);
  std::vector<std::size_t> rows = {0, 3, 5, 7, 11, 13};
  const auto masks = generate_query_set(rows.size(), 8, QueryDistribution::bernoulli(0.5), 8);
  const BatchResult a = batch_loss_and_grad(p, prob.train, rows, masks, 4, kDefaultClamp, 1);
  const BatchResult b = batch_loss_and_grad(p, prob.train, rows, masks, 4, kDefaultClamp, 3);
  double mean = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) mean += query_loss(p, prob.train.sample(rows[k]), masks[k], 4);
  mean /= static_cast<double>(rows.size());
  CHECK(a.mean_loss == doctest::Approx(mean).epsilon(1e-12));
  CHECK(a.mean_loss == b.mean_loss);
  CHECK(a.grads.dw == b.grads.dw);
  CHECK(a.grads.dlog_t == b.grads.dlog_t);
}

TEST_CASE("initialization follows the data means") {
  BinaryDataset d;
  d.values = RowMat::Zero(4, 3);
  d.values.col(0).setOnes();
  d.values(0, 1) = 1.0;
  TrainConfig c;
  c.hidden_units = 5;
  const RbmParamsQT p = initialize_params(d, c);
  CHECK(p.hidden() == 5);
  CHECK(p.c_v[0] == 3.0);
  CHECK(p.c_v[1] == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-12));
  CHECK(p.c_v[2] == -3.0);
  CHECK(p.c_h.isZero());
  CHECK(p.log_t == 0.0);
  CHECK(p.w.cwiseAbs().maxCoeff() <= c.init_scale);
}

TEST_CASE("training beats the uniform predictor and is reproducible") {
  const SmallProblem prob = small_problem();
  TrainConfig c = small_config();
  const TrainResult a = train_qt(prob.train, prob.valid, c, QueryDistribution::bernoulli(0.5));
  c.threads = 3;
  const TrainResult b = train_qt(prob.train, prob.valid, c, QueryDistribution::bernoulli(0.5));
  CHECK(a.params.w == b.params.w);
  CHECK(a.params.log_t == b.params.log_t);
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (std::size_t k = 0; k < a.history.epochs.size(); ++k)
    CHECK(a.history.epochs[k].valid_nce == b.history.epochs[k].valid_nce);

  const auto queries = generate_query_set(prob.test.size(), 8, QueryDistribution::bernoulli(0.5), 77);
  const double test_nce = nce(QtnnBackend(a.params, c.n_layers), prob.test, queries).nce;
  CHECK(test_nce < 1.0);

  double best = 1e300;
  int best_epoch = -1;
  for (const auto& e : a.history.epochs) {
    if (e.valid_nce < best) {
      best = e.valid_nce;
      best_epoch = e.epoch;
    }
  }
  CHECK(a.history.best_epoch == best_epoch);
  CHECK(a.history.best_valid_nce == best);
}

TEST_CASE("patience ends training after that many epochs without improvement") {
  const SmallProblem prob = small_problem();
  TrainConfig c = small_config();
  c.learning_rate = 0.5;
  c.max_epochs = 25;
  c.patience = 2;
  const TrainResult r = train_qt(prob.train, prob.valid, c, QueryDistribution::single_output());
  const auto n = static_cast<int>(r.history.epochs.size());
  if (n < c.max_epochs) CHECK(n - 1 - r.history.best_epoch == c.patience);
  for (int k = r.history.best_epoch + 1; k < n; ++k)
    CHECK(r.history.epochs[static_cast<std::size_t>(k)].valid_nce >= r.history.best_valid_nce);
}

TEST_CASE("training rejects bad input") {
  const SmallProblem prob = small_problem();
  BinaryDataset bad = prob.train;
  bad.values(0, 0) = 0.5;
  CHECK_THROWS_AS(train_qt(bad, prob.valid, small_config(), QueryDistribution::bernoulli(0.5)), DataError);
  BinaryDataset empty;
  empty.values = RowMat::Zero(0, 8);
  CHECK_THROWS_AS(train_qt(empty, prob.valid, small_config(), QueryDistribution::bernoulli(0.5)), DataError);

  TrainConfig c = small_config();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_config();
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = small_config();
  c.patience = c.max_epochs + 1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK_NOTHROW(small_config().validate());
}

TEST_CASE("learning rate selection keeps the best candidate") {
  const SmallProblem prob = small_problem();
  TrainConfig c = small_config();
  c.max_epochs = 4;
  c.patience = 4;
  const LearningRateSearch s =
      select_learning_rate(prob.train, prob.valid, c, QueryDistribution::bernoulli(0.5), {3e-2, 1e-6});
  REQUIRE(s.valid_nce.size() == 2);
  const auto best = std::min_element(s.valid_nce.begin(), s.valid_nce.end()) - s.valid_nce.begin();
  CHECK(s.learning_rate == (best == 0 ? 3e-2 : 1e-6));
  CHECK(s.best.history.best_valid_nce == s.valid_nce[static_cast<std::size_t>(best)]);
}
