#include "fedctmc/hazard.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fedctmc {

namespace {

std::atomic<std::uint64_t> g_clamp_events{0};

struct RateEval {
  double log_rate = 0.0;  // clamped linear predictor
  double rate = 0.0;
  bool clamped = false;
};

RateEval evaluate_rate(const CoefMatrix& beta, TransitionKind kind, const Covariates& z) {
  const double eta = linear_predictor(beta, kind, z);
  if (!std::isfinite(eta)) {
    throw NumericError("non-finite hazard for transition " + std::string(label(kind)));
  }
  RateEval r;
  r.log_rate = std::clamp(eta, -kLinearPredictorBound, kLinearPredictorBound);
  r.clamped = r.log_rate != eta;
  if (r.clamped) g_clamp_events.fetch_add(1, std::memory_order_relaxed);
  r.rate = std::exp(r.log_rate);
  return r;
}

void require_transient(State from) {
  if (is_absorbing(from)) {
    throw InvalidStateError("state 2 is absorbing and has no outgoing hazard");
  }
}

void require_positive_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("interval dt must be finite and positive");
  }
}

// Rates out of a transient state; at most two.
struct OutgoingRates {
  std::array<RateEval, 2> rates{};
  std::span<const TransitionKind> kinds;
  double total = 0.0;
};

OutgoingRates outgoing_rates(const CoefMatrix& beta, State from, const Covariates& z) {
  require_transient(from);
  OutgoingRates out;
  out.kinds = outgoing(from);
  for (std::size_t j = 0; j < out.kinds.size(); ++j) {
    out.rates[j] = evaluate_rate(beta, out.kinds[j], z);
    out.total += out.rates[j].rate;
  }
  return out;
}

}  // namespace

double linear_predictor(const CoefMatrix& beta, TransitionKind kind, const Covariates& z) {
  const auto row = beta.row(kind);
  return row[0] + row[1] * z.age + row[2] * z.sea_distance + row[3] * z.area;
}

double hazard_rate(const CoefMatrix& beta, TransitionKind kind, const Covariates& z) {
  return evaluate_rate(beta, kind, z).rate;
}

double total_hazard(const CoefMatrix& beta, State from, const Covariates& z) {
  return outgoing_rates(beta, from, z).total;
}

double stay_prob(const CoefMatrix& beta, State from, const Covariates& z, double dt) {
  require_positive_dt(dt);
  return std::exp(-total_hazard(beta, from, z) * dt);
}

double move_prob(const CoefMatrix& beta, TransitionKind kind, const Covariates& z, double dt) {
  require_positive_dt(dt);
  const OutgoingRates out = outgoing_rates(beta, source_of(kind), z);
  double own = 0.0;
  for (std::size_t j = 0; j < out.kinds.size(); ++j) {
    if (out.kinds[j] == kind) own = out.rates[j].rate;
  }
  // Written as 1 - stay so the row sums to one to rounding.
  return (own / out.total) * (1.0 - std::exp(-out.total * dt));
}

double log1mexp(double x) {
  if (x <= std::numbers::ln2) return std::log(-std::expm1(-x));
  return std::log1p(-std::exp(-x));
}

double pair_nll(const CoefMatrix& beta, const TransitionPair& pair) {
  const OutgoingRates out = outgoing_rates(beta, pair.from, pair.z);
  const double exposure = out.total * pair.dt;
  if (pair.is_stay()) return exposure;

  const TransitionKind kind = transition_between(pair.from, pair.to);
  double log_ratio = 0.0;  // exactly zero when the state has a single exit
  if (out.kinds.size() > 1) {
    const double log_own = kind == out.kinds[0] ? out.rates[0].log_rate : out.rates[1].log_rate;
    log_ratio = log_own - std::log(out.total);
  }
  return std::max(0.0, -(log_ratio + log1mexp(exposure)));
}

double nll_sum(const CoefMatrix& beta, std::span<const TransitionPair> pairs) {
  double sum = 0.0;
  for (const TransitionPair& p : pairs) sum += pair_nll(beta, p);
  return sum;
}

Vec12 nll_gradient(const CoefMatrix& beta, std::span<const TransitionPair> pairs) {
  if (pairs.empty()) throw EmptyBatchError("nll_gradient requires a non-empty batch");

  Vec12 grad{};
  for (const TransitionPair& pair : pairs) {
    const OutgoingRates out = outgoing_rates(beta, pair.from, pair.z);
    const double exposure = out.total * pair.dt;
    const bool stay = pair.is_stay();
    const TransitionKind moved = stay ? TransitionKind::GoodToMinor
                                      : transition_between(pair.from, pair.to);
    // e^{-x} / (1 - e^{-x}) = 1 / expm1(x)
    const double odds = stay ? 0.0 : 1.0 / std::expm1(exposure);

    for (std::size_t j = 0; j < out.kinds.size(); ++j) {
      const RateEval& r = out.rates[j];
      if (r.clamped) continue;  // flat region of the clamped predictor
      // d(-loglik) / d(log lambda_j)
      double weight = 0.0;
      if (stay) {
        weight = pair.dt * r.rate;
      } else {
        weight = r.rate / out.total - r.rate * pair.dt * odds;
        if (out.kinds[j] == moved) weight -= 1.0;
      }
      const std::size_t base = static_cast<std::size_t>(to_index(out.kinds[j]) * kCoefPerRow);
      grad[base + 0] += weight;
      grad[base + 1] += weight * pair.z.age;
      grad[base + 2] += weight * pair.z.sea_distance;
      grad[base + 3] += weight * pair.z.area;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (double& g : grad) g *= inv_n;
  return grad;
}

std::uint64_t clamp_event_count() { return g_clamp_events.load(std::memory_order_relaxed); }

void reset_clamp_event_count() { g_clamp_events.store(0, std::memory_order_relaxed); }

}  // namespace fedctmc
