#include "fedctmc/client.hpp"

#include <cmath>
#include <stdexcept>

#include "fedctmc/hazard.hpp"

namespace fedctmc {

void LocalTrainConfig::validate() const {
  if (local_steps < 1) throw ConfigError("local_steps must be >= 1");
  if (!(local_lr > 0.0) || !std::isfinite(local_lr)) {
    throw ConfigError("local_lr must be finite and positive");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

std::vector<TransitionPair> sample_minibatch(std::span<const TransitionPair> pairs,
                                             std::size_t batch_size, Rng& rng) {
  const std::vector<std::size_t> picks = rng.sample_without_replacement(pairs.size(), batch_size);
  std::vector<TransitionPair> batch;
  batch.reserve(picks.size());
  for (std::size_t i : picks) batch.push_back(pairs[i]);
  return batch;
}

CoefMatrix local_train(const CoefMatrix& init_beta, const UserDataset& data,
                       const LocalTrainConfig& cfg, Rng& rng) {
  if (data.pairs.empty()) {
    throw EmptyDatasetError("user " + std::to_string(data.user_id) + " has no transition pairs");
  }
  CoefMatrix beta = init_beta;
  for (int k = 0; k < cfg.local_steps; ++k) {
    const std::vector<TransitionPair> batch = sample_minibatch(data.pairs, cfg.batch_size, rng);
    const Vec12 grad = nll_gradient(beta, batch);
    for (std::size_t i = 0; i < grad.size(); ++i) beta.flat()[i] -= cfg.local_lr * grad[i];
  }
  return beta;
}

Vec12 pseudo_gradient(const CoefMatrix& init_beta, const CoefMatrix& final_beta,
                      double local_lr) {
  if (!(local_lr > 0.0)) throw std::invalid_argument("local_lr must be positive");
  Vec12 g{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (init_beta.flat()[i] - final_beta.flat()[i]) / local_lr;
  }
  return g;
}

std::optional<ClientUpdate> run_client(const CoefMatrix& broadcast, const UserDataset& data,
                                       const LocalTrainConfig& cfg, std::uint64_t master_seed,
                                       std::uint64_t round) {
  if (data.pairs.empty()) return std::nullopt;
  Rng rng(derive_seed(master_seed, Stream::ClientBatch, round, data.user_id));
  const CoefMatrix trained = local_train(broadcast, data, cfg, rng);
  ClientUpdate update;
  update.pseudo_gradient = pseudo_gradient(broadcast, trained, cfg.local_lr);
  update.sample_count = data.sample_count();
  update.user_id = data.user_id;
  return update;
}

}  // namespace fedctmc
