#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedctmc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overflow or a non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A state with no outgoing transitions was used where one is required.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class EmptyBatchError : public Error {
 public:
  using Error::Error;
};

/// Raised by local training on a User with no pairs; the harness treats it
/// as "skip this client for the round".
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file / byte stream.
class FormatError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// State space
// ---------------------------------------------------------------------------

enum class State : std::uint8_t { Good = 0, Minor = 1, Severe = 2 };

inline constexpr int kStateCount = 3;

constexpr bool is_absorbing(State s) { return s == State::Severe; }

constexpr int to_index(State s) { return static_cast<int>(s); }

/// Throws FormatError for anything outside {0, 1, 2}.
State state_from_index(int index);

/// The three allowed deterioration transitions, in coefficient-row order.
enum class TransitionKind : std::uint8_t {
  GoodToMinor = 0,
  GoodToSevere = 1,
  MinorToSevere = 2,
};

inline constexpr int kTransitionCount = 3;
inline constexpr std::array<TransitionKind, kTransitionCount> kAllTransitions = {
    TransitionKind::GoodToMinor, TransitionKind::GoodToSevere,
    TransitionKind::MinorToSevere};

constexpr int to_index(TransitionKind k) { return static_cast<int>(k); }

constexpr State source_of(TransitionKind k) {
  return k == TransitionKind::MinorToSevere ? State::Minor : State::Good;
}

constexpr State target_of(TransitionKind k) {
  return k == TransitionKind::GoodToMinor ? State::Minor : State::Severe;
}

/// Short label such as "0to1"; used in file names and JSON keys.
std::string_view label(TransitionKind k);

/// Maps (from, to) onto an allowed transition. Throws InvalidStateError when
/// the move is not one of the three allowed kinds.
TransitionKind transition_between(State from, State to);

/// Outgoing transitions of a transient state (two for Good, one for Minor,
/// empty for Severe).
std::span<const TransitionKind> outgoing(State from);

// ---------------------------------------------------------------------------
// Covariates and coefficients
// ---------------------------------------------------------------------------

inline constexpr int kCovariateCount = 3;
inline constexpr int kCoefPerRow = kCovariateCount + 1;
inline constexpr int kParamCount = kTransitionCount * kCoefPerRow;

using Vec12 = std::array<double, kParamCount>;

/// Bridge covariates. After local-max normalization each lies in [0, 1];
/// before it they hold raw physical values (years, km, m^2).
struct Covariates {
  double age = 0.0;
  double sea_distance = 0.0;
  double area = 0.0;

  /// Component by 1-based covariate index (1 = age, 2 = sea distance,
  /// 3 = area), matching the coefficient columns.
  double operator[](int index) const;
  double& operator[](int index);

  friend bool operator==(const Covariates&, const Covariates&) = default;
};

/// Log-linear hazard coefficients: one row of (intercept, age, sea distance,
/// area) per transition kind. Flattened row-major in transition order.
class CoefMatrix {
 public:
  CoefMatrix() = default;
  explicit CoefMatrix(const Vec12& flat) : values_(flat) {}

  static CoefMatrix from_rows(
      const std::array<std::array<double, kCoefPerRow>, kTransitionCount>& rows);

  double& at(TransitionKind kind, int coef) {
    return values_[static_cast<std::size_t>(to_index(kind) * kCoefPerRow + coef)];
  }
  double at(TransitionKind kind, int coef) const {
    return values_[static_cast<std::size_t>(to_index(kind) * kCoefPerRow + coef)];
  }

  std::span<const double, kCoefPerRow> row(TransitionKind kind) const {
    return std::span<const double, kCoefPerRow>(
        values_.data() + to_index(kind) * kCoefPerRow, kCoefPerRow);
  }

  const Vec12& flat() const { return values_; }
  Vec12& flat() { return values_; }

  bool is_finite() const;

  friend bool operator==(const CoefMatrix&, const CoefMatrix&) = default;

 private:
  Vec12 values_{};
};

/// Synthetic ground truth used by the data generator.
CoefMatrix ground_truth_beta();

/// One observed consecutive-inspection record.
struct TransitionPair {
  State from = State::Good;
  State to = State::Good;
  double dt = 1.0;  // years
  Covariates z;

  bool is_stay() const { return from == to; }

  friend bool operator==(const TransitionPair&, const TransitionPair&) = default;
};

/// Throws FormatError unless dt is finite and positive, covariates are finite,
/// and (from, to) is a stay in {Good, Minor} or an allowed transition.
void validate(const TransitionPair& pair);

// ---------------------------------------------------------------------------
// Small 12-vector helpers
// ---------------------------------------------------------------------------

double l2_norm(const Vec12& v);
bool all_finite(const Vec12& v);

}  // namespace fedctmc
