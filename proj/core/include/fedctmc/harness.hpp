#pragma once

// End-to-end federated experiment and the evaluation helpers built on it.
//
// Round r (1-based):
//   1. sample participants from the Participants stream keyed by r
//   2. avg_nll of the broadcast beta on the participants' full datasets
//   3. each participant runs local training on its ClientBatch substream
//   4. weighted aggregation, clip, momentum, global step
// Client work runs in parallel; results are merged in user_id order, so the
// outcome does not depend on the thread count.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedctmc/client.hpp"
#include "fedctmc/datagen.hpp"
#include "fedctmc/server.hpp"
#include "fedctmc/types.hpp"

namespace fedctmc {

struct ExperimentConfig {
  GeneratorConfig generator;
  ServerConfig server;
  LocalTrainConfig client;
  /// When non-empty, metrics rows are streamed (and flushed) here as CSV.
  std::filesystem::path metrics_path;
  unsigned threads = 0;  // 0 = hardware concurrency

  /// Uses one master seed for both the generator and the server.
  void set_seed(std::uint64_t seed);
  void validate() const;
};

struct RoundMetrics {
  std::uint64_t round = 0;
  double avg_nll = 0.0;
  /// Norm of the aggregated gradient before clipping.
  double agg_grad_norm = 0.0;
  /// Global coefficients after this round's update.
  Vec12 beta{};
  std::size_t participant_count = 0;
  std::uint64_t sample_count = 0;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  ServerState final_state;
  std::size_t user_count = 0;
  std::uint64_t total_pairs = 0;
};

using RoundObserver = std::function<void(const RoundMetrics&)>;
using WarningSink = std::function<void(std::string_view)>;

struct RunHooks {
  RoundObserver on_round;
  WarningSink on_warning;
};

/// Generates the population from cfg.generator and runs cfg.server.rounds
/// rounds from the zero state.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks = {});

/// Runs rounds start.round_index + 1 .. cfg.server.rounds on an existing
/// population (generated, loaded from disk, or resumed from a checkpoint).
ExperimentResult run_rounds(const ExperimentConfig& cfg, std::span<const UserDataset> population,
                            const ServerState& start, const RunHooks& hooks = {});

/// Sample-weighted mean pair NLL over all pairs of all participants.
/// Throws EmptyBatchError when they hold no pairs at all.
double eval_round_nll(const CoefMatrix& beta, std::span<const UserDataset> participants);

struct BetaMae {
  std::array<double, kTransitionCount> per_transition{};
  double overall = 0.0;
};

BetaMae beta_mae(const CoefMatrix& learned, const CoefMatrix& truth);

struct ScenarioProbs {
  /// From Good: stay, to Minor, to Severe.
  std::array<double, 3> from_good{};
  /// From Minor: stay, to Severe.
  std::array<double, 2> from_minor{};
};

ScenarioProbs scenario_probs(const CoefMatrix& beta, const Covariates& z, double dt);

struct NamedScenario {
  std::string name;
  Covariates z;
};

/// Young/far/small (0.2, 0.8, 0.1), mid-age/near/medium (0.5, 0.3, 0.5) and
/// old/near/large (0.9, 0.1, 0.9).
std::vector<NamedScenario> standard_scenarios();

inline constexpr double kStandardScenarioDt = 3.0;
inline constexpr std::size_t kDefaultHeatmapResolution = 50;

/// move_prob over a resolution x resolution grid. The first varied covariate
/// runs along x (columns), the second along y (rows); both span [0, 1] with
/// equal spacing, and the remaining covariate is held at fixed_value.
struct HeatmapGrid {
  TransitionKind kind = TransitionKind::GoodToMinor;
  int x_covariate = 1;
  int y_covariate = 2;
  int fixed_covariate = 3;
  double fixed_value = 0.5;
  double dt = kStandardScenarioDt;
  std::vector<double> axis;
  std::vector<double> values;  // row-major, values[iy * resolution + ix]

  std::size_t resolution() const { return axis.size(); }
  double at(std::size_t iy, std::size_t ix) const { return values[iy * axis.size() + ix]; }
};

/// Throws std::invalid_argument unless the covariate indices are distinct
/// members of {1, 2, 3} and resolution >= 2.
HeatmapGrid heatmap_grid(const CoefMatrix& beta, TransitionKind kind, int x_covariate,
                         int y_covariate, double fixed_value = 0.5,
                         std::size_t resolution = kDefaultHeatmapResolution,
                         double dt = kStandardScenarioDt);

}  // namespace fedctmc
