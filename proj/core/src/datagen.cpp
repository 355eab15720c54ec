#include "fedctmc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fedctmc/hazard.hpp"
#include "parallel.hpp"

namespace fedctmc {

namespace {

// Standard normal quantile at 0.95.
constexpr double kZ95 = 1.6448536269514722;

void require_range(const Range& r, const char* what, bool allow_zero_min) {
  const bool ok = std::isfinite(r.min) && std::isfinite(r.max) && r.min < r.max &&
                  (allow_zero_min ? r.min >= 0.0 : r.min > 0.0);
  if (!ok) throw ConfigError(std::string("invalid range for ") + what);
}

void require_choices(const std::vector<int>& choices, const char* what) {
  if (choices.empty()) throw ConfigError(std::string(what) + " must not be empty");
  for (int c : choices) {
    if (c < 1) throw ConfigError(std::string(what) + " must be positive");
  }
}

int pick(const std::vector<int>& choices, Rng& rng) {
  return choices[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(choices.size()) - 1))];
}

// Raw description of one member's inspection record before states are drawn.
struct MemberRecord {
  std::vector<double> schedule;
  std::vector<Covariates> raw_z;  // per interval
};

}  // namespace

std::string_view region_name(Region r) {
  switch (r) {
    case Region::Coastal:
      return "coastal";
    case Region::Riverside:
      return "riverside";
    case Region::Inland:
      return "inland";
  }
  return "?";
}

Region region_from_name(std::string_view name) {
  for (Region r : {Region::Coastal, Region::Riverside, Region::Inland}) {
    if (region_name(r) == name) return r;
  }
  throw FormatError("unknown region '" + std::string(name) + "'");
}

std::vector<RegionProfile> default_region_profiles() {
  return {
      {Region::Coastal, 0.30, 10, 80, 0.20, {0.0, 5.0}},
      {Region::Riverside, 0.30, 5, 50, 0.15, {5.0, 30.0}},
      {Region::Inland, 0.40, 3, 30, 0.10, {30.0, 100.0}},
  };
}

void GeneratorConfig::validate() const {
  if (user_count == 0) throw ConfigError("user_count must be positive");
  if (!ground_truth.is_finite()) throw ConfigError("ground truth must be finite");
  if (profiles.empty()) throw ConfigError("at least one region profile is required");
  double total = 0.0;
  for (const RegionProfile& p : profiles) {
    if (!(p.proportion >= 0.0)) throw ConfigError("region proportion must be >= 0");
    if (!(p.beta_noise_sigma >= 0.0) || !std::isfinite(p.beta_noise_sigma)) {
      throw ConfigError("region beta noise sigma must be finite and >= 0");
    }
    if (p.bridge_count_min < 1 || p.bridge_count_min >= p.bridge_count_max) {
      throw ConfigError("region bridge count range must satisfy 1 <= min < max");
    }
    require_range(p.sea_distance_km, "sea distance", true);
    total += p.proportion;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("region proportions must sum to 1");
  require_choices(member_count_choices, "member_count_choices");
  require_choices(inspection_count_choices, "inspection_count_choices");
  require_range(dt_range_years, "inspection interval", false);
  require_range(age_range_years, "age", true);
  require_range(area_range_m2, "deck area", false);
}

int draw_bridge_count(int min, int max, Rng& rng) {
  const double lo = std::log(static_cast<double>(min));
  const double hi = std::log(static_cast<double>(max));
  const double mu = 0.5 * (lo + hi);
  const double sd = (hi - lo) / (2.0 * kZ95);
  const double draw = std::round(std::exp(rng.normal(mu, sd)));
  return static_cast<int>(std::clamp(draw, static_cast<double>(min), static_cast<double>(max)));
}

State sample_next_state(const CoefMatrix& beta, State from, const Covariates& z, double dt,
                        Rng& rng) {
  if (is_absorbing(from)) return from;
  const double u = rng.uniform01();
  double cumulative = stay_prob(beta, from, z, dt);
  if (u < cumulative) return from;
  const auto kinds = outgoing(from);
  for (std::size_t j = 0; j + 1 < kinds.size(); ++j) {
    cumulative += move_prob(beta, kinds[j], z, dt);
    if (u < cumulative) return target_of(kinds[j]);
  }
  return target_of(kinds.back());
}

std::vector<State> simulate_member_history(const CoefMatrix& local_beta,
                                           std::span<const Covariates> interval_z,
                                           std::span<const double> schedule, Rng& rng) {
  if (interval_z.size() != schedule.size()) {
    throw std::invalid_argument("one covariate vector is required per interval");
  }
  std::vector<State> history;
  history.reserve(schedule.size() + 1);
  history.push_back(State::Good);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    history.push_back(sample_next_state(local_beta, history.back(), interval_z[k], schedule[k], rng));
  }
  return history;
}

std::vector<TransitionPair> extract_pairs(std::span<const State> history,
                                          std::span<const double> schedule,
                                          std::span<const Covariates> interval_z) {
  if (history.size() != schedule.size() + 1 || interval_z.size() != schedule.size()) {
    throw std::invalid_argument("history must have exactly one more entry than the schedule");
  }
  std::vector<TransitionPair> pairs;
  pairs.reserve(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (is_absorbing(history[k])) continue;
    pairs.push_back({history[k], history[k + 1], schedule[k], interval_z[k]});
  }
  return pairs;
}

std::vector<TransitionPair> normalize_local(std::span<const TransitionPair> pairs) {
  Covariates max_z;
  for (const TransitionPair& p : pairs) {
    for (int c = 1; c <= kCovariateCount; ++c) max_z[c] = std::max(max_z[c], p.z[c]);
  }
  std::vector<TransitionPair> out(pairs.begin(), pairs.end());
  for (TransitionPair& p : out) {
    for (int c = 1; c <= kCovariateCount; ++c) {
      p.z[c] = max_z[c] > 0.0 ? p.z[c] / max_z[c] : 0.0;
    }
  }
  return out;
}

UserDataset generate_user(const GeneratorConfig& config, std::uint64_t user_id) {
  Rng rng(derive_seed(config.seed, Stream::UserData, user_id));

  std::vector<double> weights;
  weights.reserve(config.profiles.size());
  for (const RegionProfile& p : config.profiles) weights.push_back(p.proportion);
  const RegionProfile& profile = config.profiles[rng.categorical(weights)];

  UserDataset user;
  user.user_id = user_id;
  user.region = profile.region;
  user.local_beta = config.ground_truth;
  for (double& b : user.local_beta.flat()) b += rng.normal(0.0, 1.0) * profile.beta_noise_sigma;

  // Inventory and inspection schedules first; states depend on the
  // normalized covariates, which need the whole record.
  std::vector<MemberRecord> members;
  const int bridges = draw_bridge_count(profile.bridge_count_min, profile.bridge_count_max, rng);
  const double log_area_lo = std::log(config.area_range_m2.min);
  const double log_area_hi = std::log(config.area_range_m2.max);
  for (int b = 0; b < bridges; ++b) {
    const double sea_km = rng.uniform(profile.sea_distance_km.min, profile.sea_distance_km.max);
    const double area = std::exp(rng.uniform(log_area_lo, log_area_hi));
    const double age0 = rng.uniform(config.age_range_years.min, config.age_range_years.max);
    const int member_count = pick(config.member_count_choices, rng);
    for (int m = 0; m < member_count; ++m) {
      MemberRecord rec;
      const int inspections = pick(config.inspection_count_choices, rng);
      double age = age0;
      for (int k = 0; k < inspections; ++k) {
        const double dt = rng.uniform(config.dt_range_years.min, config.dt_range_years.max);
        rec.schedule.push_back(dt);
        rec.raw_z.push_back({age, sea_km, area});
        age += dt;
      }
      members.push_back(std::move(rec));
    }
  }

  Covariates record_max;
  for (const MemberRecord& rec : members) {
    for (const Covariates& z : rec.raw_z) {
      for (int c = 1; c <= kCovariateCount; ++c) record_max[c] = std::max(record_max[c], z[c]);
    }
  }

  std::vector<TransitionPair> raw_pairs;
  for (const MemberRecord& rec : members) {
    std::vector<Covariates> scaled = rec.raw_z;
    for (Covariates& z : scaled) {
      for (int c = 1; c <= kCovariateCount; ++c) {
        z[c] = record_max[c] > 0.0 ? z[c] / record_max[c] : 0.0;
      }
    }
    const std::vector<State> history =
        simulate_member_history(user.local_beta, scaled, rec.schedule, rng);
    const std::vector<TransitionPair> pairs = extract_pairs(history, rec.schedule, rec.raw_z);
    raw_pairs.insert(raw_pairs.end(), pairs.begin(), pairs.end());
  }
  user.pairs = normalize_local(raw_pairs);
  return user;
}

std::vector<UserDataset> build_population(const GeneratorConfig& config) {
  config.validate();
  std::vector<UserDataset> users(config.user_count);
  detail::parallel_for(users.size(), config.threads,
                       [&](std::size_t i) { users[i] = generate_user(config, i); });
  return users;
}

}  // namespace fedctmc
