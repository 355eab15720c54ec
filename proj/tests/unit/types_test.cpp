#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fedctmc/types.hpp"

namespace fedctmc {
namespace {

TEST(CoefMatrix, FlattenRoundTrip) {
  Vec12 flat{};
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 0.25 * static_cast<double>(i) - 1.0;
  const CoefMatrix m(flat);
  EXPECT_EQ(CoefMatrix(m.flat()), m);
  EXPECT_EQ(m.at(TransitionKind::GoodToSevere, 2), flat[6]);
  EXPECT_EQ(m.row(TransitionKind::MinorToSevere)[3], flat[11]);
}

TEST(CoefMatrix, GroundTruthRows) {
  const CoefMatrix b = ground_truth_beta();
  EXPECT_EQ(b.at(TransitionKind::GoodToMinor, 0), -2.0);
  EXPECT_EQ(b.at(TransitionKind::GoodToMinor, 1), 0.5);
  EXPECT_EQ(b.at(TransitionKind::GoodToSevere, 0), -4.0);
  EXPECT_EQ(b.at(TransitionKind::GoodToSevere, 3), 0.05);
  EXPECT_EQ(b.at(TransitionKind::MinorToSevere, 0), -2.5);
  EXPECT_EQ(b.at(TransitionKind::MinorToSevere, 3), 0.08);
}

TEST(CoefMatrix, FiniteCheck) {
  CoefMatrix m;
  EXPECT_TRUE(m.is_finite());
  m.at(TransitionKind::GoodToMinor, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(m.is_finite());
}

TEST(StateSpace, TransitionsAndOutgoing) {
  EXPECT_EQ(transition_between(State::Good, State::Minor), TransitionKind::GoodToMinor);
  EXPECT_EQ(transition_between(State::Good, State::Severe), TransitionKind::GoodToSevere);
  EXPECT_EQ(transition_between(State::Minor, State::Severe), TransitionKind::MinorToSevere);
  EXPECT_THROW(transition_between(State::Minor, State::Good), InvalidStateError);
  EXPECT_THROW(transition_between(State::Severe, State::Minor), InvalidStateError);
  EXPECT_EQ(outgoing(State::Good).size(), 2U);
  EXPECT_EQ(outgoing(State::Minor).size(), 1U);
  EXPECT_TRUE(outgoing(State::Severe).empty());
  for (TransitionKind k : kAllTransitions) {
    EXPECT_EQ(transition_between(source_of(k), target_of(k)), k);
  }
}

TEST(StateSpace, LabelsAndIndices) {
  EXPECT_EQ(label(TransitionKind::GoodToMinor), "0to1");
  EXPECT_EQ(label(TransitionKind::GoodToSevere), "0to2");
  EXPECT_EQ(label(TransitionKind::MinorToSevere), "1to2");
  EXPECT_EQ(state_from_index(2), State::Severe);
  EXPECT_THROW(state_from_index(3), FormatError);
  EXPECT_THROW(state_from_index(-1), FormatError);
}

TEST(Covariates, OneBasedIndex) {
  Covariates z{0.1, 0.2, 0.3};
  EXPECT_EQ(z[1], 0.1);
  EXPECT_EQ(z[2], 0.2);
  EXPECT_EQ(z[3], 0.3);
  z[2] = 0.9;
  EXPECT_EQ(z.sea_distance, 0.9);
}

TEST(TransitionPair, Validation) {
  TransitionPair p{State::Good, State::Minor, 2.0, {0.1, 0.2, 0.3}};
  EXPECT_NO_THROW(validate(p));
  p.dt = 0.0;
  EXPECT_THROW(validate(p), FormatError);
  p.dt = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(p), FormatError);
  p = {State::Minor, State::Good, 1.0, {}};
  EXPECT_THROW(validate(p), FormatError);
  p = {State::Severe, State::Severe, 1.0, {}};
  EXPECT_THROW(validate(p), FormatError);
  p = {State::Good, State::Good, 1.0, {std::nan(""), 0, 0}};
  EXPECT_THROW(validate(p), FormatError);
}

TEST(Vec12, NormAndFinite) {
  Vec12 v{};
  v[0] = 3.0;
  v[11] = 4.0;
  EXPECT_DOUBLE_EQ(l2_norm(v), 5.0);
  EXPECT_TRUE(all_finite(v));
  v[5] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(all_finite(v));
}

}  // namespace
}  // namespace fedctmc
