#include "mmts/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mmts/errors.hpp"
#include "oracles.hpp"

namespace mmts {
namespace {

PairedDataset toy_dataset(std::int64_t seed = 3, std::vector<std::int64_t> sizes = {40, 40}) {
  SyntheticDatasetSpec spec;
  spec.num_clusters = sizes.size();
  spec.distribution = ExplicitSizes{std::move(sizes)};
  spec.latent_dim = 4;
  spec.visual_dim = 6;
  spec.text_dim = 5;
  spec.noise_sigma = 0.2;
  spec.seed = seed;
  return generate(spec);
}

TrainConfig toy_config() {
  TrainConfig c;
  c.schedule.alpha = 0.04;
  c.schedule.sh_minus = 0.05;
  c.schedule.sh_plus = 0.10;
  c.schedule.period = 100;
  c.mode = TrainMode::ts_and_ics;
  c.learning_rate = 0.1;
  c.batch_size = 16;
  c.total_iters = 50;
  c.embedding_dim = 4;
  c.log_interval = 10;
  return c;
}

TEST(ForwardTest, IdentityOnUnitRows) {
  const TwoTowerModel model{Matrix::identity(3), Matrix::identity(3)};
  const Matrix x(1, 3, {0.6, 0.0, 0.8});
  const auto e = forward(model, x, x);
  EXPECT_EQ(e.unit_v, x);
}

TEST(ForwardTest, ScaleInvariantAndUnitNorm) {
  const auto model = TwoTowerModel::initialize(4, 4, 3, 1);
  Matrix x(2, 4, {1, -2, 0.5, 3, 0.1, 0.2, -0.3, 0.4});
  const auto a = forward(model, x, x);
  for (double& v : x.row(0)) v *= 5;
  const auto b = forward(model, x, x);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.unit_v(0, j), b.unit_v(0, j), 1e-15);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(l2_norm(a.unit_t.row(i)), 1.0, 1e-9);
}

TEST(ForwardTest, ZeroRowIsNumericError) {
  const TwoTowerModel model{Matrix::identity(2), Matrix::identity(2)};
  EXPECT_THROW(forward(model, Matrix(1, 2), Matrix(1, 2, {1, 0})), NumericError);
}

TEST(BatchTemperaturesTest, ModesCompose) {
  const auto data = toy_dataset(1, {30, 10});
  auto c = toy_config();
  const auto table = make_shift_table(data, c);
  const std::vector<std::size_t> batch{0, 35, 5, 39};
  for (std::int64_t t : {0, 13, 50, 77}) {
    c.mode = TrainMode::ts_and_ics;
    const auto both = batch_temperatures(t, batch, table, c);
    c.mode = TrainMode::ics_only;
    const auto ics = batch_temperatures(t, batch, table, c);
    c.mode = TrainMode::ts_only;
    const auto ts = batch_temperatures(t, batch, table, c);
    const double midpoint = (c.schedule.sh_minus + c.schedule.sh_plus) / 2;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      EXPECT_NEAR(both[b], ics[b] + (ts[b] - midpoint), 1e-15);
      EXPECT_GT(both[b], 0.0);
    }
    EXPECT_DOUBLE_EQ(ics[0], 0.10);
    EXPECT_DOUBLE_EQ(ics[1], 0.05);
  }
  c.mode = TrainMode::fixed;
  c.fixed_value = 0.01;
  EXPECT_EQ(batch_temperatures(3, batch, table, c).values(), std::vector<double>(4, 0.01));
}

TEST(TrainStepTest, ZeroLearningRateLeavesModelBitwise) {
  const auto data = toy_dataset();
  auto c = toy_config();
  c.learning_rate = 0.0;
  const auto table = make_shift_table(data, c);
  auto model = TwoTowerModel::initialize(6, 5, 4, 8);
  const auto before = model;
  const std::vector<std::size_t> batch{0, 1, 50, 60};
  train_step(model, data, batch, 0, table, c);
  EXPECT_EQ(model, before);
}

// Full-composition finite-difference check: loss as a function of the
// weights, evaluated through independent oracle code.
TEST(TrainStepTest, StepMatchesFiniteDifferenceGradient) {
  const auto data = toy_dataset();
  for (LossKind kind : {LossKind::infonce, LossKind::max_margin}) {
    auto c = toy_config();
    c.schedule.loss_kind = kind;
    c.learning_rate = 0.05;
    const auto table = make_shift_table(data, c);
    const std::vector<std::size_t> batch{3, 70};
    const std::int64_t t = 17;
    const auto taus = batch_temperatures(t, batch, table, c).values();

    const auto model0 = TwoTowerModel::initialize(6, 5, 4, 11);
    const oracle::Grid xv = oracle::to_grid(data.v_raw.gather_rows(batch));
    const oracle::Grid xt = oracle::to_grid(data.t_raw.gather_rows(batch));
    auto project = [](const oracle::Grid& x, const oracle::Grid& w) {
      oracle::Grid out(x.size(), std::vector<double>(w[0].size()));
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < w[0].size(); ++j)
          for (std::size_t k = 0; k < w.size(); ++k) out[i][j] += x[i][k] * w[k][j];
      return out;
    };
    auto loss = [&](const oracle::Grid& wv, const oracle::Grid& wt) {
      const auto s = oracle::cosine_similarities(project(xv, wv), project(xt, wt));
      return kind == LossKind::infonce
                 ? 0.5 * (oracle::infonce_per_anchor(s, taus) +
                          oracle::infonce_per_anchor(oracle::transpose(s), taus))
                 : oracle::max_margin(s, taus);
    };
    const auto wv0 = oracle::to_grid(model0.w_v);
    const auto wt0 = oracle::to_grid(model0.w_t);
    const auto gv = oracle::finite_difference([&](const oracle::Grid& w) { return loss(w, wt0); }, wv0, 1e-6);
    const auto gt = oracle::finite_difference([&](const oracle::Grid& w) { return loss(wv0, w); }, wt0, 1e-6);

    auto model = model0;
    train_step(model, data, batch, t, table, c);
    for (std::size_t i = 0; i < wv0.size(); ++i)
      for (std::size_t j = 0; j < wv0[i].size(); ++j)
        EXPECT_NEAR(model.w_v(i, j), wv0[i][j] - c.learning_rate * gv[i][j], 1e-6);
    for (std::size_t i = 0; i < wt0.size(); ++i)
      for (std::size_t j = 0; j < wt0[i].size(); ++j)
        EXPECT_NEAR(model.w_t(i, j), wt0[i][j] - c.learning_rate * gt[i][j], 1e-6);
  }
}

TEST(TrainStepTest, DivergenceCarriesIteration) {
  const auto data = toy_dataset();
  auto c = toy_config();
  const auto table = make_shift_table(data, c);
  TwoTowerModel model{Matrix(6, 4), Matrix(5, 4)};  // all-zero encoders
  try {
    train_step(model, data, std::vector<std::size_t>{0, 1}, 42, table, c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.iteration(), 42);
  }
}

TEST(TrainTest, ZeroIterationsReturnsInitialModel) {
  const auto data = toy_dataset();
  auto c = toy_config();
  c.total_iters = 0;
  const auto r = train(data, make_shift_table(data, c), c);
  EXPECT_EQ(r.model, TwoTowerModel::initialize(6, 5, 4, c.seed));
  EXPECT_TRUE(r.log.empty());
}

TEST(TrainTest, DeterministicLogsAndWeights) {
  const auto data = toy_dataset();
  const auto c = toy_config();
  const auto table = make_shift_table(data, c);
  const auto a = train(data, table, c);
  const auto b = train(data, table, c);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].loss, b.log[i].loss);
    EXPECT_EQ(a.log[i].tau_min, b.log[i].tau_min);
  }
  EXPECT_EQ(a.log.back().iter, c.total_iters - 1);
}

TEST(TrainTest, BalancedToyLossDecreases) {
  const auto data = toy_dataset(9, {40, 40});
  for (LossKind kind : {LossKind::infonce, LossKind::max_margin}) {
    auto c = toy_config();
    c.schedule.loss_kind = kind;
    c.total_iters = 500;
    c.learning_rate = 0.1;
    c.log_interval = 50;
    const auto r = train(data, make_shift_table(data, c), c);
    EXPECT_LT(r.log.back().loss, r.log.front().loss) << to_string(kind);
  }
}

TEST(TrainTest, TemperaturesStayPositive) {
  const auto data = toy_dataset(4, {60, 10});
  auto c = toy_config();
  c.total_iters = 120;
  c.log_interval = 1;
  for (const auto& row : train(data, make_shift_table(data, c), c).log) {
    EXPECT_GT(row.tau_min, 0.0);
    EXPECT_GE(row.tau_min, c.schedule.sh_minus - c.schedule.alpha / 2 - 1e-15);
    EXPECT_LE(row.tau_max, c.schedule.sh_plus + c.schedule.alpha / 2 + 1e-15);
  }
}

TEST(TrainTest, KMeansShiftSourceCoversDataset) {
  const auto data = toy_dataset(6, {50, 10});
  auto c = toy_config();
  c.shift_table_source = ShiftSource::kmeans_on_text_view;
  const auto table = make_shift_table(data, c);
  EXPECT_EQ(table.k, 2u);
  EXPECT_EQ(table.assignments.size(), data.count());
  EXPECT_NO_THROW(train(data, table, c));
}

TEST(TrainTest, BatchLargerThanDataset) {
  const auto data = toy_dataset(1, {3, 2});
  auto c = toy_config();
  c.batch_size = 6;
  EXPECT_THROW(train(data, make_shift_table(data, c), c), ArgumentError);
}

TEST(TrainConfigTest, JsonRoundTripAndFixedBaseline) {
  auto c = toy_config();
  c.mode = TrainMode::fixed;
  c.fixed_value = 0.01;
  const nlohmann::json j = c;
  const auto back = j.get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.mode, TrainMode::fixed);
  EXPECT_EQ(back.fixed_value, 0.01);
  EXPECT_THROW(train_mode_from_string("warmup"), ArgumentError);
}

TEST(SampleBatchTest, DistinctIndices) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto b = sample_batch(30, 12, rng);
    std::sort(b.begin(), b.end());
    EXPECT_EQ(std::adjacent_find(b.begin(), b.end()), b.end());
    EXPECT_LT(b.back(), 30u);
  }
}

}  // namespace
}  // namespace mmts
