#include <doctest.h>

#include <cmath>
#include <map>

#include "qtrbm/baselines.hpp"
#include "qtrbm/data_io.hpp"
#include "qtrbm/errors.hpp"
#include "qtrbm/oracle.hpp"
#include "test_util.hpp"

using namespace qtrbm;

namespace {

std::uint64_t visible_code(const Vec& v) {
  std::uint64_t code = 0;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v[j] > 0.5) code |= std::uint64_t{1} << j;
  return code;
}

}  // namespace

TEST_CASE("gibbs on a zero model gives fair coins") {
  const RbmParamsStd p = RbmParamsStd::zeros(4, 3);
  Rng rng(11);
  GibbsChainState s = random_chain_state(4, 3, rng);
  Vec sum_v = Vec::Zero(4);
  Vec sum_h = Vec::Zero(3);
  const int sweeps = 100000;
  for (int k = 0; k < sweeps; ++k) {
    s = gibbs_sweep(p, s, rng);
    sum_v += s.v;
    sum_h += s.h;
  }
  for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(sum_v[j] / sweeps - 0.5) < 0.01);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(sum_h[i] / sweeps - 0.5) < 0.01);
}

TEST_CASE("gibbs is deterministic under a seed") {
  const RbmParamsStd p = testing::random_std(5, 3, 1.0, 2);
  Rng a(4);
  Rng b(4);
  GibbsChainState sa = random_chain_state(5, 3, a);
  GibbsChainState sb = random_chain_state(5, 3, b);
  for (int k = 0; k < 200; ++k) {
    sa = gibbs_sweep(p, sa, a);
    sb = gibbs_sweep(p, sb, b);
  }
  CHECK(sa.v == sb.v);
  CHECK(sa.h == sb.h);
}

TEST_CASE("gibbs matches exact marginals and the visible joint") {
  const RbmParamsStd p = testing::random_std(5, 3, 1.0, 21);
  const RbmParamsQT q = from_standard(p);
  const JointTable joint = enumerate_joint(q);
  const Vec exact_v = joint.visible_marginals();
  const Vec exact_h = joint.hidden_marginals();

  Rng rng(3);
  GibbsChainState s = random_chain_state(5, 3, rng);
  for (int k = 0; k < 1000; ++k) s = gibbs_sweep(p, s, rng);
  const int sweeps = 200000;
  Vec sum_v = Vec::Zero(5);
  Vec sum_h = Vec::Zero(3);
  std::map<std::uint64_t, double> counts;
  for (int k = 0; k < sweeps; ++k) {
    s = gibbs_sweep(p, s, rng);
    sum_v += s.v;
    sum_h += s.h;
    counts[visible_code(s.v)] += 1.0;
  }
  for (Eigen::Index j = 0; j < 5; ++j) CHECK(std::abs(sum_v[j] / sweeps - exact_v[j]) < 0.02);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(sum_h[i] / sweeps - exact_h[i]) < 0.02);

  double tv = 0.0;
  for (std::uint64_t code = 0; code < 32; ++code) {
    const double pv = std::exp(visible_log_weight(q, testing::bits(code, 0, 5)) - joint.log_partition());
    tv += std::abs(pv - counts[code] / sweeps);
  }
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("conditional gibbs agrees with exact conditionals") {
  const RbmParamsStd p = testing::random_std(6, 3, 1.0, 8);
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const Vec v = testing::random_binary(6, rng);
    const QueryMask q = sample_query(6, QueryDistribution::bernoulli(0.5), rng);
    const auto exact = exact_conditional(from_standard(p), v, q);
    const auto est = gibbs_conditional_inference(p, v, q, 50000, 200, 100 + trial);
    REQUIRE(est.size() == exact.size());
    for (std::size_t k = 0; k < est.size(); ++k) CHECK(std::abs(est[k] - exact[k]) < 0.02);
  }
  CHECK(gibbs_conditional_inference(p, Vec::Zero(6), QueryMask::all_observed(6), 10, 1, 1).empty());
}

TEST_CASE("conditional gibbs estimates stay inside the clamp") {
  RbmParamsStd p = RbmParamsStd::zeros(2, 1);
  p.b_v[1] = 30.0;
  const auto est = gibbs_conditional_inference(p, Vec::Zero(2), QueryMask({1, 0}), 200, 10, 2);
  REQUIRE(est.size() == 1);
  CHECK(est[0] == 1.0 - kGibbsClampEps);
}

TEST_CASE("pcd update by hand") {
  RbmParamsStd p = RbmParamsStd::zeros(2, 2);
  p.w << 0.5, -1.0, 0.0, 2.0;
  p.b_h << 0.1, -0.2;
  const RbmParamsStd start = p;
  BinaryDataset data;
  data.values.resize(2, 2);
  data.values << 1, 0, 1, 1;
  PcdChains chains{{{Vec::Zero(2), Vec::Zero(2)}}, Rng(1)};
  chains.states[0].v << 0, 1;
  const double lr = 0.1;
  pcd_update(p, data, {0, 1}, chains, lr, 0);

  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  // p(h | v) for (1,0), (1,1) and the chain state (0,1).
  const double h10[] = {sig(0.5 + 0.1), sig(0.0 - 0.2)};
  const double h11[] = {sig(-0.5 + 0.1), sig(2.0 - 0.2)};
  const double h01[] = {sig(-1.0 + 0.1), sig(2.0 - 0.2)};
  for (int i = 0; i < 2; ++i) {
    const double dw0 = 0.5 * (h10[i] + h11[i]) - 0.0;
    const double dw1 = 0.5 * h11[i] - h01[i];
    CHECK(p.w(i, 0) == doctest::Approx(start.w(i, 0) + lr * dw0).epsilon(1e-14));
    CHECK(p.w(i, 1) == doctest::Approx(start.w(i, 1) + lr * dw1).epsilon(1e-14));
    const double dbh = 0.5 * (h10[i] + h11[i]) - h01[i];
    CHECK(p.b_h[i] == doctest::Approx(start.b_h[i] + lr * dbh).epsilon(1e-14));
  }
  CHECK(p.b_v[0] == doctest::Approx(lr * 1.0).epsilon(1e-14));
  CHECK(p.b_v[1] == doctest::Approx(lr * (0.5 - 1.0)).epsilon(1e-14));
}

TEST_CASE("pcd update with zero learning rate leaves parameters alone") {
  RbmParamsStd p = testing::random_std(4, 2, 1.0, 3);
  const RbmParamsStd start = p;
  BinaryDataset data;
  data.values = RowMat::Ones(3, 4);
  Rng rng(2);
  PcdChains chains{{random_chain_state(4, 2, rng)}, Rng(9)};
  pcd_update(p, data, {0, 1, 2}, chains, 0.0, 3);
  CHECK(p.w == start.w);
  CHECK(p.b_v == start.b_v);
  CHECK(p.b_h == start.b_h);
}

TEST_CASE("pcd training beats the uniform predictor") {
  const SyntheticData s = generate_synthetic({8, 4, 1.5, 1.0, 600, 17});
  const DatasetSplits parts = split_dataset(s.data, {0.7, 0.15, 0.15}, 17);
  PcdConfig c;
  c.epochs = 30;
  c.batch_size = 50;
  c.hidden_units = 4;
  c.learning_rates = {3e-2};
  c.seed = 4;
  const PcdResult r = pcd_train(parts.train, parts.valid, c);
  CHECK(r.learning_rate == 3e-2);
  const auto queries = generate_query_set(parts.test.size(), 8, QueryDistribution::bernoulli(0.5), 6);
  CHECK(exact_nce(from_standard(r.params), parts.test, queries) < 1.0);
  CHECK(nce(pcd_to_bp_backend(r.params), parts.test, queries).nce < 1.0);
  CHECK(nce(GibbsBackend(r.params, 400, 50, 3), parts.test, queries).nce < 1.0);

  const PcdResult again = pcd_train(parts.train, parts.valid, c);
  CHECK(again.params.w == r.params.w);
}

TEST_CASE("pcd learning rate selection") {
  const SyntheticData s = generate_synthetic({6, 3, 1.5, 1.0, 300, 19});
  const DatasetSplits parts = split_dataset(s.data, {0.7, 0.15, 0.15}, 19);
  PcdConfig c;
  c.epochs = 5;
  c.batch_size = 50;
  c.hidden_units = 3;
  c.learning_rates = {3e-2, 1e-2};
  c.valid_gibbs_samples = 200;
  c.valid_gibbs_burn_in = 20;
  const PcdResult r = pcd_train(parts.train, parts.valid, c);
  REQUIRE(r.valid_nce.size() == 2);
  CHECK(r.learning_rate == (r.valid_nce[0] <= r.valid_nce[1] ? 3e-2 : 1e-2));
}

TEST_CASE("bp backend on a zero model predicts sigmoid of the visible bias") {
  RbmParamsStd p = RbmParamsStd::zeros(3, 2);
  p.b_v << 0.3, -1.0, 2.0;
  const QtnnBackend bp = pcd_to_bp_backend(p);
  CHECK(bp.name() == "pcd-bp");
  const Vec out = bp.predict(Vec::Zero(3), QueryMask::all_hidden(3), 0);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(out[j] == doctest::Approx(sigmoid(p.b_v[j])).epsilon(1e-12));
}

TEST_CASE("bp backend is exact with one hidden unit") {
  const RbmParamsStd p = testing::random_std(6, 1, 1.5, 12);
  const QtnnBackend bp = pcd_to_bp_backend(p);
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec v = testing::random_binary(6, rng);
    const QueryMask q = sample_query(6, QueryDistribution::bernoulli(0.5), rng);
    const Vec out = bp.predict(v, q, 0);
    const auto exact = exact_conditional(from_standard(p), v, q);
    const auto idx = q.output_indices();
    for (std::size_t k = 0; k < idx.size(); ++k)
      CHECK(std::abs(out[static_cast<Eigen::Index>(idx[k])] - exact[k]) < 1e-4);
  }
}

TEST_CASE("bp and gibbs backends agree on a weakly coupled model") {
  const RbmParamsStd p = testing::random_std(6, 3, 0.3, 14);
  const QtnnBackend bp = pcd_to_bp_backend(p);
  const GibbsBackend gibbs(p, 40000, 100, 5);
  Rng rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec v = testing::random_binary(6, rng);
    const QueryMask q = sample_query(6, QueryDistribution::bernoulli(0.5), rng);
    const Vec a = bp.predict(v, q, static_cast<std::size_t>(trial));
    const Vec b = gibbs.predict(v, q, static_cast<std::size_t>(trial));
    for (std::size_t j : q.output_indices()) {
      const auto jj = static_cast<Eigen::Index>(j);
      CHECK(std::abs(a[jj] - b[jj]) < 0.02);
    }
  }
}
