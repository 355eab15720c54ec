#pragma once

// File formats.
//
// pairs.csv        "# fedctmc-pairs v1", then header
//                  user_id,from,to,dt,z1,z2,z3
// manifest.csv     "# fedctmc-manifest v1", then header
//                  user_id,region,n_u,b0..b11
// metrics CSV      round,avg_nll,agg_grad_norm,participant_count,sample_count,wall_ms,b0..b11
// beta JSON        {"format":"fedctmc-beta","version":1,"beta":[12],
//                   "momentum":[12],"round":r}   (momentum/round optional on read)
// summary JSON     final beta, per-transition MAE, scenario tables, config echo
// heatmap          CSV matrix (row = y value, column = x value) plus a JSON
//                  sidecar with the same stem carrying the axes
//
// Doubles are written in shortest round-trip form, so every file reloads to
// bit-identical values. Readers throw FormatError on malformed input.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedctmc/datagen.hpp"
#include "fedctmc/harness.hpp"
#include "fedctmc/server.hpp"

namespace fedctmc {

inline constexpr std::string_view kPairsVersionLine = "# fedctmc-pairs v1";
inline constexpr std::string_view kManifestVersionLine = "# fedctmc-manifest v1";
inline constexpr std::string_view kPairsFileName = "pairs.csv";
inline constexpr std::string_view kManifestFileName = "manifest.csv";

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
/// Throws FormatError unless the whole string is a number.
double parse_double(std::string_view text);

// Population -----------------------------------------------------------------

void write_pairs(std::ostream& out, std::span<const UserDataset> users);
void write_manifest(std::ostream& out, std::span<const UserDataset> users);
/// Users are returned in manifest order; each manifest n_u must match the
/// number of pair rows for that user.
std::vector<UserDataset> read_population(std::istream& pairs, std::istream& manifest);

void save_population(const std::filesystem::path& dir, std::span<const UserDataset> users);
std::vector<UserDataset> load_population(const std::filesystem::path& dir);

// Coefficients / checkpoints -------------------------------------------------

void save_beta(const std::filesystem::path& path, const ServerState& state);
/// Missing momentum and round fields load as zero.
ServerState load_beta(const std::filesystem::path& path);

// Metrics --------------------------------------------------------------------

std::string metrics_csv_header();
std::string metrics_csv_row(const RoundMetrics& m);
std::vector<RoundMetrics> read_metrics_csv(std::istream& in);
std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& path);

/// Writes the header on construction and flushes after every row, so a run
/// that aborts leaves every completed round on disk.
class MetricsCsvWriter {
 public:
  explicit MetricsCsvWriter(const std::filesystem::path& path);
  ~MetricsCsvWriter();
  MetricsCsvWriter(const MetricsCsvWriter&) = delete;
  MetricsCsvWriter& operator=(const MetricsCsvWriter&) = delete;

  void write(const RoundMetrics& m);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Summary ----------------------------------------------------------------------

void write_summary_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                        const ExperimentResult& result);

// Heatmaps -------------------------------------------------------------------

/// e.g. "heatmap_0to1_z1z2"
std::string heatmap_stem(TransitionKind kind, int x_covariate, int y_covariate);
/// Writes <dir>/<stem>.csv and <dir>/<stem>.json; returns the CSV path.
std::filesystem::path write_heatmap(const std::filesystem::path& dir, const HeatmapGrid& grid);
HeatmapGrid read_heatmap(const std::filesystem::path& csv_path);

}  // namespace fedctmc
