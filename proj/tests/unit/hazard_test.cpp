#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fedctmc/hazard.hpp"
#include "oracles.hpp"
#include "reference.hpp"

namespace fedctmc {
namespace {

using testing::close_rel;
using testing::fd_gradient;
using testing::oracle_pair_nll;
using testing::oracle_probs;
using testing::reference_learned_beta;
using testing::random_beta;
using testing::random_pair;

constexpr Covariates kYoungFarSmall{0.2, 0.8, 0.1};

TEST(HazardRate, ZeroCoefficientsGiveUnitRate) {
  EXPECT_EQ(hazard_rate(CoefMatrix{}, TransitionKind::GoodToSevere, {0.3, 0.7, 0.9}), 1.0);
}

TEST(HazardRate, GroundTruthRow) {
  const CoefMatrix b = ground_truth_beta();
  EXPECT_NEAR(hazard_rate(b, TransitionKind::GoodToMinor, {0, 0, 0}), 0.135335, 1e-6);
  EXPECT_NEAR(hazard_rate(b, TransitionKind::GoodToMinor, {1, 1, 1}), 0.182684, 1e-6);
}

TEST(HazardRate, NonFiniteCoefficientsThrow) {
  CoefMatrix b;
  b.at(TransitionKind::GoodToSevere, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    hazard_rate(b, TransitionKind::GoodToSevere, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("0to2"), std::string::npos);
  }
}

TEST(HazardRate, ClampBoundsPredictorAndCountsEvents) {
  CoefMatrix b;
  b.at(TransitionKind::GoodToMinor, 0) = 45.0;
  reset_clamp_event_count();
  EXPECT_EQ(hazard_rate(b, TransitionKind::GoodToMinor, {}), std::exp(kLinearPredictorBound));
  EXPECT_EQ(clamp_event_count(), 1U);
  b.at(TransitionKind::GoodToMinor, 0) = -45.0;
  EXPECT_EQ(hazard_rate(b, TransitionKind::GoodToMinor, {}), std::exp(-kLinearPredictorBound));
  EXPECT_EQ(clamp_event_count(), 2U);
  EXPECT_EQ(linear_predictor(b, TransitionKind::GoodToMinor, {}), -45.0);
}

TEST(TotalHazard, Examples) {
  EXPECT_EQ(total_hazard(CoefMatrix{}, State::Good, {}), 2.0);
  EXPECT_EQ(total_hazard(CoefMatrix{}, State::Minor, {}), 1.0);
  EXPECT_THROW(total_hazard(CoefMatrix{}, State::Severe, {}), InvalidStateError);

  const CoefMatrix b = reference_learned_beta();
  const long double oracle =
      testing::oracle_hazard(b.flat(), 0, kYoungFarSmall) + testing::oracle_hazard(b.flat(), 1, kYoungFarSmall);
  EXPECT_NEAR(total_hazard(b, State::Good, kYoungFarSmall), static_cast<double>(oracle), 1e-14);
  EXPECT_NEAR(total_hazard(b, State::Good, kYoungFarSmall), 0.18723, 1e-4);
}

TEST(IntervalProbs, ReferenceScenarioYoungFarSmall) {
  const CoefMatrix b = reference_learned_beta();
  EXPECT_NEAR(stay_prob(b, State::Good, kYoungFarSmall, 3.0), 0.570, 1e-3);
  EXPECT_NEAR(move_prob(b, TransitionKind::GoodToMinor, kYoungFarSmall, 3.0), 0.398, 1e-3);
  EXPECT_NEAR(move_prob(b, TransitionKind::GoodToSevere, kYoungFarSmall, 3.0), 0.032, 1e-3);
  EXPECT_NEAR(stay_prob(b, State::Minor, kYoungFarSmall, 3.0), 0.630, 1e-3);
  EXPECT_NEAR(move_prob(b, TransitionKind::MinorToSevere, kYoungFarSmall, 3.0), 0.370, 1e-3);
}

TEST(IntervalProbs, VanishingHazardStays) {
  CoefMatrix b;
  for (TransitionKind k : kAllTransitions) b.at(k, 0) = -30.0;
  EXPECT_NEAR(stay_prob(b, State::Good, {}, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(stay_prob(b, State::Minor, {}, 1.0), 1.0, 1e-12);
}

TEST(IntervalProbs, RejectNonPositiveDt) {
  EXPECT_THROW(stay_prob(CoefMatrix{}, State::Good, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(move_prob(CoefMatrix{}, TransitionKind::GoodToMinor, {}, -1.0), std::invalid_argument);
  EXPECT_THROW(stay_prob(CoefMatrix{}, State::Severe, {}, 1.0), InvalidStateError);
}

TEST(IntervalProbs, MatchOracleOnRandomDraws) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 500; ++i) {
    const CoefMatrix b(random_beta(gen));
    const TransitionPair p = random_pair(gen);
    const auto o = oracle_probs(b.flat(), State::Good, p.z, p.dt);
    EXPECT_TRUE(close_rel(stay_prob(b, State::Good, p.z, p.dt), static_cast<double>(o[0]), 1e-12, 1e-15));
    EXPECT_TRUE(close_rel(move_prob(b, TransitionKind::GoodToMinor, p.z, p.dt), static_cast<double>(o[1]), 1e-12, 1e-15));
    EXPECT_TRUE(close_rel(move_prob(b, TransitionKind::GoodToSevere, p.z, p.dt), static_cast<double>(o[2]), 1e-12, 1e-15));
  }
}

TEST(IntervalProbs, NormalizationIdentity) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> dt_dist(1e-3, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const CoefMatrix b(random_beta(gen, -8.0, 4.0));
    const TransitionPair p = random_pair(gen);
    const double dt = dt_dist(gen);
    const double good = stay_prob(b, State::Good, p.z, dt) +
                        move_prob(b, TransitionKind::GoodToMinor, p.z, dt) +
                        move_prob(b, TransitionKind::GoodToSevere, p.z, dt);
    const double minor = stay_prob(b, State::Minor, p.z, dt) +
                         move_prob(b, TransitionKind::MinorToSevere, p.z, dt);
    ASSERT_NEAR(good, 1.0, 1e-12);
    ASSERT_NEAR(minor, 1.0, 1e-12);
  }
}

TEST(IntervalProbs, SingleExitMoveIsComplementOfStay) {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 200; ++i) {
    const CoefMatrix b(random_beta(gen));
    const TransitionPair p = random_pair(gen);
    EXPECT_NEAR(move_prob(b, TransitionKind::MinorToSevere, p.z, p.dt),
                1.0 - stay_prob(b, State::Minor, p.z, p.dt), 1e-15);
  }
}

TEST(IntervalProbs, StayDecreasesInDtAndIntercept) {
  std::mt19937_64 gen(14);
  for (int i = 0; i < 200; ++i) {
    CoefMatrix b(random_beta(gen, -3.0, 1.0));
    const TransitionPair p = random_pair(gen);
    for (State s : {State::Good, State::Minor}) {
      EXPECT_GT(stay_prob(b, s, p.z, p.dt), stay_prob(b, s, p.z, p.dt * 1.5));
    }
    const double before = stay_prob(b, State::Good, p.z, p.dt);
    b.at(TransitionKind::GoodToSevere, 0) += 0.5;
    EXPECT_GT(before, stay_prob(b, State::Good, p.z, p.dt));
  }
}

TEST(Log1mexp, AccurateAcrossBranches) {
  for (double x : {1e-300, 1e-12, 1e-6, 0.01, 0.5, std::log(2.0), 0.7, 1.0, 5.0, 20.0, 50.0, 700.0}) {
    const long double ref = testing::oracle_log1mexp(x);
    EXPECT_TRUE(close_rel(log1mexp(x), static_cast<double>(ref), 1e-14, 1e-300)) << x;
  }
}

TEST(PairNll, Examples) {
  const TransitionPair stay{State::Good, State::Good, 1.0, {0.4, 0.1, 0.7}};
  EXPECT_DOUBLE_EQ(pair_nll(CoefMatrix{}, stay), 2.0);

  const CoefMatrix b = reference_learned_beta();
  const TransitionPair young{State::Good, State::Good, 3.0, kYoungFarSmall};
  EXPECT_NEAR(pair_nll(b, young), -std::log(stay_prob(b, State::Good, kYoungFarSmall, 3.0)), 1e-14);
  EXPECT_NEAR(pair_nll(b, young), 0.56163, 2e-3);
}

TEST(PairNll, SingleExitMoveIsNegLogMoveProb) {
  std::mt19937_64 gen(15);
  for (int i = 0; i < 200; ++i) {
    const CoefMatrix b(random_beta(gen));
    TransitionPair p = random_pair(gen);
    p.from = State::Minor;
    p.to = State::Severe;
    EXPECT_TRUE(close_rel(pair_nll(b, p), -std::log(move_prob(b, TransitionKind::MinorToSevere, p.z, p.dt)),
                          1e-12, 1e-14));
  }
}

TEST(PairNll, NonNegativeAndMatchesOracle) {
  std::mt19937_64 gen(16);
  for (int i = 0; i < 2000; ++i) {
    const CoefMatrix b(random_beta(gen));
    const TransitionPair p = random_pair(gen);
    const double v = pair_nll(b, p);
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_GE(v, 0.0);
    EXPECT_TRUE(close_rel(v, static_cast<double>(oracle_pair_nll(b.flat(), p)), 1e-11, 1e-14));
  }
}

TEST(PairNll, SumOverSpan) {
  std::mt19937_64 gen(17);
  const CoefMatrix b(random_beta(gen));
  std::vector<TransitionPair> pairs;
  double expected = 0.0;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back(random_pair(gen));
    expected += pair_nll(b, pairs.back());
  }
  EXPECT_DOUBLE_EQ(nll_sum(b, pairs), expected);
  EXPECT_EQ(nll_sum(b, {}), 0.0);
}

TEST(NllGradient, StayFromMinorExample) {
  const std::vector<TransitionPair> batch{{State::Minor, State::Minor, 1.0, {0, 0, 0}}};
  const Vec12 g = nll_gradient(CoefMatrix{}, batch);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i], i == 8 ? 1.0 : 0.0) << i;
}

TEST(NllGradient, EmptyBatchThrows) {
  EXPECT_THROW(nll_gradient(CoefMatrix{}, {}), EmptyBatchError);
}

TEST(NllGradient, MatchesFiniteDifferencesSinglePairs) {
  std::mt19937_64 gen(18);
  for (int i = 0; i < 300; ++i) {
    const CoefMatrix b(random_beta(gen));
    const std::vector<TransitionPair> batch{random_pair(gen)};
    const Vec12 g = nll_gradient(b, batch);
    const Vec12 fd = fd_gradient(b.flat(), batch);
    for (std::size_t c = 0; c < g.size(); ++c) {
      ASSERT_TRUE(close_rel(g[c], fd[c], 1e-5, 1e-8)) << "draw " << i << " coef " << c << ": " << g[c]
                                                      << " vs " << fd[c];
    }
  }
}

TEST(NllGradient, MatchesFiniteDifferencesBatches) {
  std::mt19937_64 gen(19);
  for (int i = 0; i < 40; ++i) {
    const CoefMatrix b(random_beta(gen));
    std::vector<TransitionPair> batch;
    for (int k = 0; k < 16; ++k) batch.push_back(random_pair(gen));
    const Vec12 g = nll_gradient(b, batch);
    const Vec12 fd = fd_gradient(b.flat(), batch);
    for (std::size_t c = 0; c < g.size(); ++c) ASSERT_TRUE(close_rel(g[c], fd[c], 1e-5, 1e-8)) << c;
  }
}

TEST(NllGradient, DuplicateBatchEqualsSingle) {
  std::mt19937_64 gen(20);
  for (int i = 0; i < 50; ++i) {
    const CoefMatrix b(random_beta(gen));
    const TransitionPair p = random_pair(gen);
    const std::vector<TransitionPair> one{p};
    const std::vector<TransitionPair> four{p, p, p, p};
    const Vec12 a = nll_gradient(b, one);
    const Vec12 c = nll_gradient(b, four);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(close_rel(c[k], a[k], 1e-14, 1e-300));
  }
}

TEST(NllGradient, RowsNotLeavingSourceAreZero) {
  std::mt19937_64 gen(21);
  const CoefMatrix b(random_beta(gen));
  const std::vector<TransitionPair> from_good{{State::Good, State::Minor, 2.0, {0.5, 0.5, 0.5}}};
  const std::vector<TransitionPair> from_minor{{State::Minor, State::Severe, 2.0, {0.5, 0.5, 0.5}}};
  const Vec12 g0 = nll_gradient(b, from_good);
  const Vec12 g1 = nll_gradient(b, from_minor);
  for (std::size_t k = 8; k < 12; ++k) EXPECT_EQ(g0[k], 0.0);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(g1[k], 0.0);
}

TEST(NllGradient, ClampedRowHasZeroGradient) {
  CoefMatrix b;
  b.at(TransitionKind::GoodToMinor, 0) = 40.0;
  const std::vector<TransitionPair> batch{{State::Good, State::Severe, 1.0, {0.5, 0.5, 0.5}}};
  const Vec12 g = nll_gradient(b, batch);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(g[k], 0.0);
  EXPECT_TRUE(all_finite(g));
}

}  // namespace
}  // namespace fedctmc
