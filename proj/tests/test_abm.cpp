#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "abmal/abm.hpp"
#include "abmal/errors.hpp"
#include "abmal/matrix_game.hpp"
#include "oracles.hpp"

using namespace abmal;

namespace {

Dataset dataset_of(std::vector<MatchingInstance> xs) {
  Dataset ds;
  ds.d = xs.front().d;
  ds.instances = std::move(xs);
  return ds;
}

GameConfig tight_game() {
  GameConfig g;
  g.eps_do = 1e-10;
  g.eps_lp = 1e-11;
  return g;
}

}  // namespace

TEST(Potentials, Examples) {
  std::mt19937_64 rng(3);
  const MatchingInstance x = oracle::random_instance(rng, 4, 3);
  EXPECT_TRUE(potentials(Eigen::VectorXd::Zero(3), x).isZero(0.0));
  for (std::size_t k = 0; k < 3; ++k) {
    const WeightMatrix psi = potentials(Eigen::VectorXd::Unit(3, static_cast<Eigen::Index>(k)), x);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        EXPECT_EQ(psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), x.feature(i, j, k));
  }
}

TEST(Potentials, MatchesRecountAndScales) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const MatchingInstance x = oracle::random_instance(rng, 5, 4);
    const Eigen::VectorXd theta = oracle::random_vector(rng, 4);
    const WeightMatrix psi = potentials(theta, x);
    EXPECT_LE((psi - oracle::recount_potentials(theta, x)).cwiseAbs().maxCoeff(), 1e-12);
    const double c = -2.5;
    EXPECT_LE((potentials(c * theta, x) - c * psi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Potentials, DimensionMismatchThrows) {
  std::mt19937_64 rng(5);
  const MatchingInstance x = oracle::random_instance(rng, 3, 4);
  EXPECT_THROW(potentials(Eigen::VectorXd::Zero(3), x), InvalidInput);
  ModelParams m;
  m.theta = Eigen::VectorXd::Zero(5);
  EXPECT_THROW(predict(m, x), InvalidInput);
}

TEST(FeatureSum, MatchesRecount) {
  std::mt19937_64 rng(6);
  const MatchingInstance x = oracle::random_instance(rng, 5, 3);
  for (int t = 0; t < 10; ++t) {
    const Permutation p = oracle::random_permutation(rng, 5);
    EXPECT_LE((feature_sum(x, p) - oracle::recount_feature_sum(x, p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ExpectedFeatures, MatchesMixtureAverage) {
  std::mt19937_64 rng(7);
  const MatchingInstance x = oracle::random_instance(rng, 4, 3);
  const MixedStrategy s = oracle::random_mixture(rng, 4, 5);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(3);
  for (std::size_t k = 0; k < s.support.size(); ++k)
    expect += s.probs[k] * oracle::recount_feature_sum(x, s.support[k]);
  EXPECT_LE((expected_features(x, unary_marginals(s)) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExampleObjective, ValueMatchesFullGame) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MatchingInstance x = oracle::random_instance(rng, 3, 4);
    const Eigen::VectorXd theta = oracle::random_vector(rng, 4, 0.5);
    const auto full = oracle::support_enumeration_value(oracle::full_game_matrix(oracle::recount_potentials(theta, x)));
    ASSERT_TRUE(full.has_value());
    const double expect = *full - theta.dot(oracle::recount_feature_sum(x, x.truth));
    EXPECT_NEAR(abm_example_objective(theta, x).value, expect, 1e-6);
  }
}

TEST(ExampleObjective, SubgradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 8; ++trial) {
    const MatchingInstance x = oracle::random_instance(rng, 4, 5);
    const Eigen::VectorXd theta = oracle::random_vector(rng, 5, 0.4);
    const Eigen::VectorXd u = oracle::random_vector(rng, 5).normalized();
    auto f = [&](const Eigen::VectorXd& t) { return abm_example_objective(t, x, tight_game()).value; };
    const oracle::Slopes s = oracle::directional_slopes(f, theta, u, 1e-5);
    if (std::abs(s.forward - s.backward) > 1e-6 * std::max(1.0, std::abs(s.central))) continue;  // kink
    const double analytic = abm_example_objective(theta, x, tight_game()).subgradient.dot(u);
    EXPECT_LE(std::abs(analytic - s.central), 1e-3 * std::max(1.0, std::abs(s.central)));
    ++checked;
  }
  EXPECT_EQ(checked, 8);
}

TEST(ExampleObjective, PlantedPointMassHasZeroSubgradient) {
  std::mt19937_64 rng(10);
  MatchingInstance x = oracle::random_instance(rng, 5, 2);
  x.features.setZero();
  for (std::size_t i = 0; i < 5; ++i) {
    x.features(static_cast<Eigen::Index>(i * 5 + static_cast<std::size_t>(x.truth[i])), 0) = 1.0;
  }
  const Eigen::VectorXd theta = Eigen::Vector2d(100.0, 0.0);
  const ExampleObjective obj = abm_example_objective(theta, x);
  EXPECT_LT(obj.subgradient.norm(), 1e-6);
  EXPECT_EQ(obj.equilibrium.adversary.support.size(), 1u);
  EXPECT_EQ(obj.equilibrium.adversary.support[0], x.truth);
}

TEST(TrainAbm, ZeroFeaturesKeepThetaAtZero) {
  std::mt19937_64 rng(11);
  std::vector<MatchingInstance> xs;
  for (int k = 0; k < 4; ++k) {
    MatchingInstance x = oracle::random_instance(rng, 4, 3, "z" + std::to_string(k));
    x.features.setZero();
    xs.push_back(std::move(x));
  }
  TrainConfig cfg;
  cfg.epochs = 5;
  const TrainResult r = train_abm(dataset_of(std::move(xs)), cfg);
  EXPECT_TRUE(r.params.theta.isZero(0.0));
}

TEST(TrainAbm, EmptyIdsThrow) {
  std::mt19937_64 rng(12);
  const Dataset ds = dataset_of({oracle::random_instance(rng, 3, 2)});
  EXPECT_THROW(train_abm(ds, std::span<const std::size_t>{}, TrainConfig{}), InvalidInput);
}

TEST(TrainAbm, DeterministicAndOrderIndependent) {
  const Dataset ds = gen_synthetic(5, 4, 12, 3, 0.2);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 5;
  const std::vector<std::size_t> a{0, 3, 4, 7, 9};
  const std::vector<std::size_t> b{9, 4, 0, 7, 3};
  const TrainResult ra = train_abm(ds, a, cfg);
  const TrainResult rb = train_abm(ds, b, cfg);
  EXPECT_EQ(ra.params.theta, rb.params.theta);
  EXPECT_EQ(train_abm(ds, a, cfg).params.theta, ra.params.theta);
  cfg.seed = 6;
  EXPECT_NE(train_abm(ds, a, cfg).params.theta, ra.params.theta);
}

TEST(TrainAbm, ObjectiveDecreasesOnAverage) {
  double first = 0.0, last = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset ds = gen_synthetic(5, 4, 10, seed, 0.3);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = seed;
    const TrainResult r = train_abm(ds, cfg);
    first += r.epochs.front().objective;
    last += r.epochs.back().objective;
  }
  EXPECT_LE(last / 10.0, first / 10.0 + 1e-6);
}

TEST(TrainAbm, RecoversPlantedDirection) {
  const Dataset ds = gen_synthetic(6, 4, 60, 2, 0.0);
  TrainConfig cfg;
  cfg.epochs = 40;
  const TrainResult r = train_abm(ds, cfg);
  EXPECT_GT(r.params.theta.normalized().dot(*ds.planted_theta()), 0.99);
}

TEST(Predict, UniformTwoNodeGameTieBreaks) {
  MatchingInstance x;
  x.n = 2;
  x.d = 1;
  x.features = Eigen::MatrixXd::Zero(4, 1);
  x.truth = Permutation::identity(2);
  ModelParams m;
  m.theta = Eigen::VectorXd::Ones(1);
  const Prediction p = predict(m, x);
  EXPECT_EQ(p.permutation, Permutation::identity(2));
  EXPECT_EQ(p.equilibrium.adversary.support.size(), 2u);
  for (double q : p.equilibrium.adversary.probs) EXPECT_NEAR(q, 0.5, 1e-9);
}

TEST(Predict, StrongPotentialsRecoverTruth) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    MatchingInstance x = oracle::random_instance(rng, 6, 2);
    for (std::size_t i = 0; i < 6; ++i)
      x.features(static_cast<Eigen::Index>(i * 6 + static_cast<std::size_t>(x.truth[i])), 0) += 20.0;
    ModelParams m;
    m.theta = Eigen::Vector2d(1.0, 0.1);
    EXPECT_EQ(predict(m, x).permutation, x.truth);
  }
}

TEST(Predict, MinimizesExpectedHammingAgainstAdversary) {
  std::mt19937_64 rng(14);
  const auto perms = oracle::all_permutations(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MatchingInstance x = oracle::random_instance(rng, 3, 3);
    ModelParams m;
    m.theta = oracle::random_vector(rng, 3, 0.6);
    const Prediction p = predict(m, x);
    auto expected_loss = [&](const Permutation& pi) {
      double e = 0.0;
      for (std::size_t k = 0; k < p.equilibrium.adversary.support.size(); ++k)
        e += p.equilibrium.adversary.probs[k] *
             static_cast<double>(hamming_distance(pi, p.equilibrium.adversary.support[k]));
      return e;
    };
    const double mine = expected_loss(p.permutation);
    for (const Permutation& q : perms) EXPECT_LE(mine, expected_loss(q) + 1e-9);
  }
}
