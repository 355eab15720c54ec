#pragma once

// User side of a federated round: K mini-batch SGD steps on the local mean
// NLL starting from the broadcast coefficients, then the pseudo-gradient
// (init - final) / local_lr. Only the ClientUpdate leaves this module.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedctmc/datagen.hpp"
#include "fedctmc/rng.hpp"
#include "fedctmc/types.hpp"

namespace fedctmc {

struct LocalTrainConfig {
  int local_steps = 3;
  double local_lr = 0.01;
  std::size_t batch_size = 32;

  void validate() const;
};

struct ClientUpdate {
  Vec12 pseudo_gradient{};
  /// Full local pair count n_u, not the mini-batch size.
  std::uint64_t sample_count = 0;
  std::uint64_t user_id = 0;

  friend bool operator==(const ClientUpdate&, const ClientUpdate&) = default;
};

/// min(batch_size, n) pairs drawn uniformly without replacement.
std::vector<TransitionPair> sample_minibatch(std::span<const TransitionPair> pairs,
                                             std::size_t batch_size, Rng& rng);

/// Throws EmptyDatasetError when the User holds no pairs.
CoefMatrix local_train(const CoefMatrix& init_beta, const UserDataset& data,
                       const LocalTrainConfig& cfg, Rng& rng);

Vec12 pseudo_gradient(const CoefMatrix& init_beta, const CoefMatrix& final_beta,
                      double local_lr);

/// One client's full participation in a round, using the (round, user_id)
/// substream of `master_seed`. Returns nullopt for an empty dataset.
std::optional<ClientUpdate> run_client(const CoefMatrix& broadcast, const UserDataset& data,
                                       const LocalTrainConfig& cfg, std::uint64_t master_seed,
                                       std::uint64_t round);

}  // namespace fedctmc
