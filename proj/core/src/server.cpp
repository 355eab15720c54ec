#include "fedctmc/server.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedctmc {

void ServerConfig::validate() const {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ConfigError("participation fraction must lie in (0, 1]");
  }
  if (!(global_lr > 0.0) || !std::isfinite(global_lr)) {
    throw ConfigError("global_lr must be finite and positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
}

std::size_t participant_count(std::size_t user_count, double rho) {
  if (user_count == 0) return 0;
  // The epsilon keeps products like 0.1 * 500 from rounding up past 50.
  const double raw = std::ceil(rho * static_cast<double>(user_count) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, user_count);
}

std::vector<std::uint64_t> sample_participants(std::span<const std::uint64_t> user_ids,
                                               double rho, Rng& round_rng) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  const std::size_t k = participant_count(user_ids.size(), rho);
  std::vector<std::uint64_t> chosen;
  chosen.reserve(k);
  for (std::size_t i : round_rng.sample_without_replacement(user_ids.size(), k)) {
    chosen.push_back(user_ids[i]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Vec12 aggregate(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw EmptyBatchError("cannot aggregate an empty round");
  std::vector<const ClientUpdate*> ordered;
  ordered.reserve(updates.size());
  for (const ClientUpdate& u : updates) {
    if (u.sample_count == 0) throw std::invalid_argument("client update with zero samples");
    ordered.push_back(&u);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ClientUpdate* a, const ClientUpdate* b) { return a->user_id < b->user_id; });

  Vec12 weighted{};
  double total = 0.0;
  for (const ClientUpdate* u : ordered) {
    const auto n = static_cast<double>(u->sample_count);
    for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] += n * u->pseudo_gradient[i];
    total += n;
  }
  for (double& w : weighted) w /= total;
  return weighted;
}

Vec12 clip(const Vec12& g, double delta) {
  const double norm = l2_norm(g);
  if (norm <= delta) return g;
  Vec12 out = g;
  const double scale = delta / norm;
  for (double& x : out) x *= scale;
  return out;
}

ServerState server_step(const ServerState& state, const Vec12& aggregated,
                        const ServerConfig& cfg) {
  if (!all_finite(aggregated)) {
    throw NumericError("aggregated gradient is not finite in round " +
                       std::to_string(state.round_index + 1));
  }
  const Vec12 clipped = clip(aggregated, cfg.clip_norm);
  ServerState next = state;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    next.momentum[i] = cfg.momentum * state.momentum[i] + clipped[i];
    next.global_beta.flat()[i] = state.global_beta.flat()[i] - cfg.global_lr * next.momentum[i];
  }
  ++next.round_index;
  return next;
}

}  // namespace fedctmc
