#include "fedctmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "fedctmc/hazard.hpp"
#include "fedctmc/io.hpp"
#include "parallel.hpp"

namespace fedctmc {

void ExperimentConfig::set_seed(std::uint64_t seed) {
  generator.seed = seed;
  server.seed = seed;
}

void ExperimentConfig::validate() const {
  generator.validate();
  server.validate();
  client.validate();
}

namespace {

struct ClientOutcome {
  double nll_sum = 0.0;
  std::uint64_t pairs = 0;
  std::optional<ClientUpdate> update;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  GeneratorConfig gen = cfg.generator;
  if (gen.threads == 0) gen.threads = cfg.threads;
  const std::vector<UserDataset> population = build_population(gen);
  return run_rounds(cfg, population, ServerState{}, hooks);
}

ExperimentResult run_rounds(const ExperimentConfig& cfg, std::span<const UserDataset> population,
                            const ServerState& start, const RunHooks& hooks) {
  cfg.server.validate();
  cfg.client.validate();
  if (population.empty()) throw ConfigError("population is empty");

  std::vector<std::uint64_t> user_ids;
  user_ids.reserve(population.size());
  for (const UserDataset& u : population) user_ids.push_back(u.user_id);
  if (!std::is_sorted(user_ids.begin(), user_ids.end()) ||
      std::adjacent_find(user_ids.begin(), user_ids.end()) != user_ids.end()) {
    throw ConfigError("population must be ordered by unique user_id");
  }

  ExperimentResult result;
  result.user_count = population.size();
  for (const UserDataset& u : population) result.total_pairs += u.sample_count();

  std::optional<MetricsCsvWriter> metrics_file;
  if (!cfg.metrics_path.empty()) metrics_file.emplace(cfg.metrics_path);

  ServerState state = start;
  const auto total_rounds = static_cast<std::uint64_t>(cfg.server.rounds);
  while (state.round_index < total_rounds) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t round = state.round_index + 1;

    Rng round_rng(derive_seed(cfg.server.seed, Stream::Participants, round));
    const std::vector<std::uint64_t> chosen = sample_participants(user_ids, cfg.server.participation, round_rng);

    std::vector<ClientOutcome> outcomes(chosen.size());
    const CoefMatrix broadcast = state.global_beta;
    detail::parallel_for(chosen.size(), cfg.threads, [&](std::size_t i) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(user_ids.begin(), user_ids.end(), chosen[i]) - user_ids.begin());
      const UserDataset& user = population[pos];
      ClientOutcome& out = outcomes[i];
      out.nll_sum = nll_sum(broadcast, user.pairs);
      out.pairs = user.sample_count();
      out.update = run_client(broadcast, user, cfg.client, cfg.server.seed, round);
    });

    RoundMetrics m;
    m.round = round;
    m.participant_count = chosen.size();
    double nll_total = 0.0;
    std::vector<ClientUpdate> updates;
    updates.reserve(outcomes.size());
    for (const ClientOutcome& o : outcomes) {
      nll_total += o.nll_sum;
      m.sample_count += o.pairs;
      if (o.update) updates.push_back(*o.update);
    }

    if (updates.empty()) {
      if (hooks.on_warning) {
        hooks.on_warning("round " + std::to_string(round) +
                         ": every sampled client was empty; state left unchanged");
      }
      ++state.round_index;
    } else {
      m.avg_nll = nll_total / static_cast<double>(m.sample_count);
      const Vec12 aggregated = aggregate(updates);
      m.agg_grad_norm = l2_norm(aggregated);
      state = server_step(state, aggregated, cfg.server);
    }
    m.beta = state.global_beta.flat();
    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    if (metrics_file) metrics_file->write(m);
    if (hooks.on_round) hooks.on_round(m);
    result.rounds.push_back(m);
  }
  result.final_state = state;
  return result;
}

double eval_round_nll(const CoefMatrix& beta, std::span<const UserDataset> participants) {
  double total = 0.0;
  std::uint64_t count = 0;
  for (const UserDataset& u : participants) {
    total += nll_sum(beta, u.pairs);
    count += u.sample_count();
  }
  if (count == 0) throw EmptyBatchError("participants hold no transition pairs");
  return total / static_cast<double>(count);
}

BetaMae beta_mae(const CoefMatrix& learned, const CoefMatrix& truth) {
  BetaMae mae;
  double all = 0.0;
  for (TransitionKind k : kAllTransitions) {
    double row = 0.0;
    for (int c = 0; c < kCoefPerRow; ++c) row += std::abs(learned.at(k, c) - truth.at(k, c));
    all += row;
    mae.per_transition[static_cast<std::size_t>(to_index(k))] = row / kCoefPerRow;
  }
  mae.overall = all / kParamCount;
  return mae;
}

ScenarioProbs scenario_probs(const CoefMatrix& beta, const Covariates& z, double dt) {
  ScenarioProbs p;
  p.from_good = {stay_prob(beta, State::Good, z, dt),
                 move_prob(beta, TransitionKind::GoodToMinor, z, dt),
                 move_prob(beta, TransitionKind::GoodToSevere, z, dt)};
  p.from_minor = {stay_prob(beta, State::Minor, z, dt),
                  move_prob(beta, TransitionKind::MinorToSevere, z, dt)};
  return p;
}

std::vector<NamedScenario> standard_scenarios() {
  return {
      {"young_far_small", {0.2, 0.8, 0.1}},
      {"midage_near_medium", {0.5, 0.3, 0.5}},
      {"old_near_large", {0.9, 0.1, 0.9}},
  };
}

HeatmapGrid heatmap_grid(const CoefMatrix& beta, TransitionKind kind, int x_covariate,
                         int y_covariate, double fixed_value, std::size_t resolution, double dt) {
  auto valid = [](int c) { return c >= 1 && c <= kCovariateCount; };
  if (!valid(x_covariate) || !valid(y_covariate) || x_covariate == y_covariate) {
    throw std::invalid_argument("heatmap covariates must be two distinct indices in {1,2,3}");
  }
  if (resolution < 2) throw std::invalid_argument("heatmap resolution must be >= 2");

  HeatmapGrid grid;
  grid.kind = kind;
  grid.x_covariate = x_covariate;
  grid.y_covariate = y_covariate;
  grid.fixed_covariate = 6 - x_covariate - y_covariate;
  grid.fixed_value = fixed_value;
  grid.dt = dt;
  grid.axis.resize(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    grid.axis[i] = static_cast<double>(i) / static_cast<double>(resolution - 1);
  }
  grid.values.resize(resolution * resolution);
  Covariates z;
  z[grid.fixed_covariate] = fixed_value;
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    z[y_covariate] = grid.axis[iy];
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      z[x_covariate] = grid.axis[ix];
      grid.values[iy * resolution + ix] = move_prob(beta, kind, z, dt);
    }
  }
  return grid;
}

}  // namespace fedctmc
