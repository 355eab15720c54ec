#pragma once

// Server side of a federated round: partial participation sampling,
// sample-weighted aggregation of pseudo-gradients, l2 clipping, momentum and
// the global step
//   v_r      = mu * v_{r-1} + clip(g_r, delta)
//   beta_r+1 = beta_r - eta_global * v_r
// The server only ever sees ClientUpdate values.

#include <cstdint>
#include <span>
#include <vector>

#include "fedctmc/client.hpp"
#include "fedctmc/rng.hpp"
#include "fedctmc/types.hpp"

namespace fedctmc {

struct ServerConfig {
  int rounds = 50;
  double participation = 0.10;
  double global_lr = 0.05;
  double momentum = 0.9;
  /// May be +infinity to disable clipping.
  double clip_norm = 1.0;
  std::uint64_t seed = 2024;

  void validate() const;
};

struct ServerState {
  CoefMatrix global_beta;
  Vec12 momentum{};
  std::uint64_t round_index = 0;

  friend bool operator==(const ServerState&, const ServerState&) = default;
};

/// ceil(rho * user_count), at least 1 and at most user_count.
std::size_t participant_count(std::size_t user_count, double rho);

/// Exactly participant_count(user_ids.size(), rho) distinct ids, uniformly
/// without replacement, returned in ascending order.
std::vector<std::uint64_t> sample_participants(std::span<const std::uint64_t> user_ids,
                                               double rho, Rng& round_rng);

/// Sample-weighted mean of the pseudo-gradients, reduced in ascending user_id
/// order. Throws EmptyBatchError on an empty list and std::invalid_argument
/// on a zero sample count.
Vec12 aggregate(std::span<const ClientUpdate> updates);

/// g scaled onto the delta-ball when its norm exceeds delta.
Vec12 clip(const Vec12& g, double delta);

/// Throws NumericError when the aggregate is not finite.
ServerState server_step(const ServerState& state, const Vec12& aggregated,
                        const ServerConfig& cfg);

}  // namespace fedctmc
