#pragma once

// Continuous-time Markov chain hazard model for three-state deterioration.
//
// Each allowed transition i->j has a log-linear hazard
//   lambda_ij(z) = exp(b0 + b1*z1 + b2*z2 + b3*z3)
// and over an inspection interval dt the single-jump competing-risks
// probabilities are
//   stay:  exp(-Lambda_i * dt)
//   move:  (lambda_ij / Lambda_i) * (1 - exp(-Lambda_i * dt))
// where Lambda_i is the total hazard out of state i.
//
// All functions are pure; the only shared state is a relaxed atomic counter of
// linear-predictor clamp events kept for diagnostics.

#include <cstdint>
#include <span>

#include "fedctmc/types.hpp"

namespace fedctmc {

/// Linear predictors are clamped to [-kLinearPredictorBound, +kLinearPredictorBound]
/// before exponentiation, so every hazard lies in [exp(-30), exp(30)].
inline constexpr double kLinearPredictorBound = 30.0;

/// b0 + b1*z1 + b2*z2 + b3*z3 for the kind's row, unclamped.
double linear_predictor(const CoefMatrix& beta, TransitionKind kind, const Covariates& z);

/// Throws NumericError (naming the transition) if the predictor is not finite.
double hazard_rate(const CoefMatrix& beta, TransitionKind kind, const Covariates& z);

/// Sum of the outgoing hazards. Throws InvalidStateError for Severe.
double total_hazard(const CoefMatrix& beta, State from, const Covariates& z);

double stay_prob(const CoefMatrix& beta, State from, const Covariates& z, double dt);

double move_prob(const CoefMatrix& beta, TransitionKind kind, const Covariates& z, double dt);

/// log(1 - exp(-x)) for x > 0 without cancellation.
double log1mexp(double x);

/// Negative log-likelihood of one observed pair, in nats. Always >= 0.
double pair_nll(const CoefMatrix& beta, const TransitionPair& pair);

/// Sum of pair_nll over a span (no averaging).
double nll_sum(const CoefMatrix& beta, std::span<const TransitionPair> pairs);

/// Gradient of the batch-mean NLL with respect to the flattened coefficients.
/// Throws EmptyBatchError for an empty span.
Vec12 nll_gradient(const CoefMatrix& beta, std::span<const TransitionPair> pairs);

/// Number of clamp events since process start (or the last reset).
std::uint64_t clamp_event_count();
void reset_clamp_event_count();

}  // namespace fedctmc
