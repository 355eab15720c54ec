#include "fedctmc/types.hpp"

#include <cmath>
#include <string>

namespace fedctmc {

namespace {

constexpr std::array<TransitionKind, 2> kFromGood = {TransitionKind::GoodToMinor,
                                                     TransitionKind::GoodToSevere};
constexpr std::array<TransitionKind, 1> kFromMinor = {TransitionKind::MinorToSevere};

}  // namespace

State state_from_index(int index) {
  if (index < 0 || index >= kStateCount) {
    throw FormatError("state index out of range: " + std::to_string(index));
  }
  return static_cast<State>(index);
}

std::string_view label(TransitionKind k) {
  switch (k) {
    case TransitionKind::GoodToMinor:
      return "0to1";
    case TransitionKind::GoodToSevere:
      return "0to2";
    case TransitionKind::MinorToSevere:
      return "1to2";
  }
  return "?";
}

TransitionKind transition_between(State from, State to) {
  if (from == State::Good && to == State::Minor) return TransitionKind::GoodToMinor;
  if (from == State::Good && to == State::Severe) return TransitionKind::GoodToSevere;
  if (from == State::Minor && to == State::Severe) return TransitionKind::MinorToSevere;
  throw InvalidStateError("transition " + std::to_string(to_index(from)) + "->" +
                          std::to_string(to_index(to)) + " is not allowed");
}

std::span<const TransitionKind> outgoing(State from) {
  switch (from) {
    case State::Good:
      return kFromGood;
    case State::Minor:
      return kFromMinor;
    case State::Severe:
      break;
  }
  return {};
}

double Covariates::operator[](int index) const {
  switch (index) {
    case 1:
      return age;
    case 2:
      return sea_distance;
    case 3:
      return area;
    default:
      throw std::out_of_range("covariate index must be 1, 2 or 3");
  }
}

double& Covariates::operator[](int index) {
  switch (index) {
    case 1:
      return age;
    case 2:
      return sea_distance;
    case 3:
      return area;
    default:
      throw std::out_of_range("covariate index must be 1, 2 or 3");
  }
}

CoefMatrix CoefMatrix::from_rows(
    const std::array<std::array<double, kCoefPerRow>, kTransitionCount>& rows) {
  CoefMatrix m;
  for (TransitionKind k : kAllTransitions) {
    for (int c = 0; c < kCoefPerRow; ++c) {
      m.at(k, c) = rows[static_cast<std::size_t>(to_index(k))][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

bool CoefMatrix::is_finite() const { return all_finite(values_); }

CoefMatrix ground_truth_beta() {
  return CoefMatrix::from_rows({{
      {-2.0, +0.5, -0.3, +0.10},
      {-4.0, +0.3, -0.5, +0.05},
      {-2.5, +0.4, -0.4, +0.08},
  }});
}

void validate(const TransitionPair& pair) {
  if (!std::isfinite(pair.dt) || pair.dt <= 0.0) {
    throw FormatError("transition pair interval must be finite and positive");
  }
  if (!std::isfinite(pair.z.age) || !std::isfinite(pair.z.sea_distance) ||
      !std::isfinite(pair.z.area)) {
    throw FormatError("transition pair covariates must be finite");
  }
  if (is_absorbing(pair.from)) {
    throw FormatError("transition pair may not originate in the absorbing state");
  }
  if (pair.is_stay()) return;
  try {
    (void)transition_between(pair.from, pair.to);
  } catch (const InvalidStateError& e) {
    throw FormatError(e.what());
  }
}

double l2_norm(const Vec12& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

bool all_finite(const Vec12& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace fedctmc
