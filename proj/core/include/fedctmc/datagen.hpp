#pragma once

// Synthetic heterogeneous User population.
//
// A User (municipality) is assigned a region type, a local coefficient matrix
// perturbed from the ground truth by region-specific Gaussian noise, and a
// log-normally sized bridge inventory. Each bridge member starts in Good and
// is observed over a schedule of inspection intervals; the next observed
// state is drawn from the model's own interval distribution, so the fitted
// likelihood is well specified. Consecutive observations become transition
// pairs, normalized by the User's local maxima.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedctmc/rng.hpp"
#include "fedctmc/types.hpp"

namespace fedctmc {

enum class Region : std::uint8_t { Coastal = 0, Riverside = 1, Inland = 2 };

std::string_view region_name(Region r);
/// Inverse of region_name; throws FormatError.
Region region_from_name(std::string_view name);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct RegionProfile {
  Region region = Region::Inland;
  double proportion = 0.0;
  int bridge_count_min = 1;
  int bridge_count_max = 1;
  double beta_noise_sigma = 0.0;
  Range sea_distance_km;
};

/// Coastal 30% (10-80 bridges, sigma 0.20), Riverside 30% (5-50, 0.15),
/// Inland 40% (3-30, 0.10).
std::vector<RegionProfile> default_region_profiles();

struct GeneratorConfig {
  std::size_t user_count = 500;
  std::uint64_t seed = 2024;
  CoefMatrix ground_truth = ground_truth_beta();
  std::vector<RegionProfile> profiles = default_region_profiles();
  std::vector<int> member_count_choices{1, 2, 3};
  /// Number of inspections following the Good baseline observation; each
  /// yields one interval.
  std::vector<int> inspection_count_choices{2, 3, 4, 5};
  Range dt_range_years{3.0, 7.0};
  Range age_range_years{0.0, 60.0};
  /// Deck area is log-uniform over this range.
  Range area_range_m2{50.0, 2000.0};
  unsigned threads = 0;  // 0 = hardware concurrency

  /// Throws ConfigError on any invariant violation.
  void validate() const;
};

struct UserDataset {
  std::uint64_t user_id = 0;
  Region region = Region::Inland;
  CoefMatrix local_beta;
  std::vector<TransitionPair> pairs;

  std::size_t sample_count() const { return pairs.size(); }
};

std::vector<UserDataset> build_population(const GeneratorConfig& config);

/// Generates one User from its own substream; build_population calls this
/// for user ids 0..user_count-1.
UserDataset generate_user(const GeneratorConfig& config, std::uint64_t user_id);

/// Log-normal whose 5th/95th percentiles sit at the range ends, rounded and
/// clamped into [min, max].
int draw_bridge_count(int min, int max, Rng& rng);

/// Draws the next observed state after one interval from the model's interval
/// distribution. Severe stays Severe.
State sample_next_state(const CoefMatrix& beta, State from, const Covariates& z, double dt,
                        Rng& rng);

/// Observed state sequence of one member, starting in Good. interval_z holds
/// the (normalized) covariates in effect during each interval.
/// Returns schedule.size() + 1 states.
std::vector<State> simulate_member_history(const CoefMatrix& local_beta,
                                           std::span<const Covariates> interval_z,
                                           std::span<const double> schedule, Rng& rng);

/// One pair per consecutive observation not starting in Severe, carrying the
/// raw covariates of the interval. Throws std::invalid_argument unless
/// history.size() == schedule.size() + 1 == interval_z.size() + 1.
std::vector<TransitionPair> extract_pairs(std::span<const State> history,
                                          std::span<const double> schedule,
                                          std::span<const Covariates> interval_z);

/// Divides each covariate by its maximum over the given pairs; a zero
/// maximum maps that covariate to 0.
std::vector<TransitionPair> normalize_local(std::span<const TransitionPair> pairs);

}  // namespace fedctmc
