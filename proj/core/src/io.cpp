#include "fedctmc/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <system_error>

#include "fedctmc/hazard.hpp"

namespace fedctmc {

using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("expected an unsigned integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  return out;
}

void expect_line(std::istream& in, std::string_view expected, const char* what) {
  std::string line;
  if (!read_line(in, line) || line != expected) {
    throw FormatError(std::string(what) + ": expected '" + std::string(expected) + "'");
  }
}

std::string coefficient_columns() {
  std::string s;
  for (int i = 0; i < kParamCount; ++i) s += ",b" + std::to_string(i);
  return s;
}

Vec12 vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(kParamCount)) {
    throw FormatError(std::string(what) + " must be an array of 12 numbers");
  }
  Vec12 v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

const char* covariate_name(int c) {
  static constexpr const char* names[] = {"", "z1", "z2", "z3"};
  return names[c];
}

int covariate_from_name(const std::string& name) {
  for (int c = 1; c <= kCovariateCount; ++c) {
    if (name == covariate_name(c)) return c;
  }
  throw FormatError("unknown covariate '" + name + "'");
}

TransitionKind transition_from_label(const std::string& name) {
  for (TransitionKind k : kAllTransitions) {
    if (label(k) == name) return k;
  }
  throw FormatError("unknown transition '" + name + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

// Population -----------------------------------------------------------------

void write_pairs(std::ostream& out, std::span<const UserDataset> users) {
  out << kPairsVersionLine << '\n' << "user_id,from,to,dt,z1,z2,z3\n";
  for (const UserDataset& u : users) {
    for (const TransitionPair& p : u.pairs) {
      out << u.user_id << ',' << to_index(p.from) << ',' << to_index(p.to) << ','
          << format_double(p.dt) << ',' << format_double(p.z.age) << ','
          << format_double(p.z.sea_distance) << ',' << format_double(p.z.area) << '\n';
    }
  }
}

void write_manifest(std::ostream& out, std::span<const UserDataset> users) {
  out << kManifestVersionLine << '\n' << "user_id,region,n_u" << coefficient_columns() << '\n';
  for (const UserDataset& u : users) {
    out << u.user_id << ',' << region_name(u.region) << ',' << u.sample_count();
    for (double b : u.local_beta.flat()) out << ',' << format_double(b);
    out << '\n';
  }
}

std::vector<UserDataset> read_population(std::istream& pairs_in, std::istream& manifest_in) {
  expect_line(manifest_in, kManifestVersionLine, "manifest");
  expect_line(manifest_in, "user_id,region,n_u" + coefficient_columns(), "manifest header");

  std::vector<UserDataset> users;
  std::map<std::uint64_t, std::size_t> index;
  std::vector<std::uint64_t> declared;
  std::string line;
  while (read_line(manifest_in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 3 + static_cast<std::size_t>(kParamCount)) {
      throw FormatError("manifest row has " + std::to_string(f.size()) + " fields");
    }
    UserDataset u;
    u.user_id = parse_u64(f[0]);
    u.region = region_from_name(f[1]);
    declared.push_back(parse_u64(f[2]));
    for (std::size_t i = 0; i < static_cast<std::size_t>(kParamCount); ++i) {
      u.local_beta.flat()[i] = parse_double(f[3 + i]);
    }
    if (!index.emplace(u.user_id, users.size()).second) {
      throw FormatError("duplicate user " + std::to_string(u.user_id) + " in manifest");
    }
    users.push_back(std::move(u));
  }

  expect_line(pairs_in, kPairsVersionLine, "pairs file");
  expect_line(pairs_in, "user_id,from,to,dt,z1,z2,z3", "pairs header");
  while (read_line(pairs_in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw FormatError("pairs row has " + std::to_string(f.size()) + " fields");
    const std::uint64_t id = parse_u64(f[0]);
    const auto it = index.find(id);
    if (it == index.end()) throw FormatError("pair for unknown user " + std::to_string(id));
    TransitionPair p;
    p.from = state_from_index(static_cast<int>(parse_u64(f[1])));
    p.to = state_from_index(static_cast<int>(parse_u64(f[2])));
    p.dt = parse_double(f[3]);
    p.z = {parse_double(f[4]), parse_double(f[5]), parse_double(f[6])};
    validate(p);
    users[it->second].pairs.push_back(p);
  }

  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].sample_count() != declared[i]) {
      throw FormatError("user " + std::to_string(users[i].user_id) + " declares n_u=" +
                        std::to_string(declared[i]) + " but has " +
                        std::to_string(users[i].sample_count()) + " pairs");
    }
  }
  return users;
}

void save_population(const std::filesystem::path& dir, std::span<const UserDataset> users) {
  std::filesystem::create_directories(dir);
  std::ofstream pairs = open_out(dir / kPairsFileName);
  write_pairs(pairs, users);
  std::ofstream manifest = open_out(dir / kManifestFileName);
  write_manifest(manifest, users);
  if (!pairs || !manifest) throw FormatError("failed writing population to '" + dir.string() + "'");
}

std::vector<UserDataset> load_population(const std::filesystem::path& dir) {
  std::ifstream pairs = open_in(dir / kPairsFileName);
  std::ifstream manifest = open_in(dir / kManifestFileName);
  return read_population(pairs, manifest);
}

// Coefficients -----------------------------------------------------------------

void save_beta(const std::filesystem::path& path, const ServerState& state) {
  json j;
  j["format"] = "fedctmc-beta";
  j["version"] = 1;
  j["beta"] = state.global_beta.flat();
  j["momentum"] = state.momentum;
  j["round"] = state.round_index;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

ServerState load_beta(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("beta")) {
    throw FormatError("'" + path.string() + "' has no \"beta\" array");
  }
  ServerState s;
  s.global_beta = CoefMatrix(vec_from_json(j["beta"], "beta"));
  if (j.contains("momentum")) s.momentum = vec_from_json(j["momentum"], "momentum");
  if (j.contains("round")) {
    if (!j["round"].is_number_unsigned()) throw FormatError("round must be a non-negative integer");
    s.round_index = j["round"].get<std::uint64_t>();
  }
  if (!s.global_beta.is_finite() || !all_finite(s.momentum)) {
    throw FormatError("'" + path.string() + "' contains non-finite values");
  }
  return s;
}

// Metrics ------------------------------------------------------------------------

std::string metrics_csv_header() {
  return "round,avg_nll,agg_grad_norm,participant_count,sample_count,wall_ms" +
         coefficient_columns();
}

std::string metrics_csv_row(const RoundMetrics& m) {
  std::string row = std::to_string(m.round) + ',' + format_double(m.avg_nll) + ',' +
                    format_double(m.agg_grad_norm) + ',' + std::to_string(m.participant_count) +
                    ',' + std::to_string(m.sample_count) + ',' + format_double(m.wall_ms);
  for (double b : m.beta) row += ',' + format_double(b);
  return row;
}

std::vector<RoundMetrics> read_metrics_csv(std::istream& in) {
  expect_line(in, metrics_csv_header(), "metrics header");
  std::vector<RoundMetrics> rows;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6 + static_cast<std::size_t>(kParamCount)) {
      throw FormatError("metrics row has " + std::to_string(f.size()) + " fields");
    }
    RoundMetrics m;
    m.round = parse_u64(f[0]);
    m.avg_nll = parse_double(f[1]);
    m.agg_grad_norm = parse_double(f[2]);
    m.participant_count = parse_u64(f[3]);
    m.sample_count = parse_u64(f[4]);
    m.wall_ms = parse_double(f[5]);
    for (std::size_t i = 0; i < m.beta.size(); ++i) m.beta[i] = parse_double(f[6 + i]);
    rows.push_back(m);
  }
  return rows;
}

std::vector<RoundMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_metrics_csv(in);
}

struct MetricsCsvWriter::Impl {
  std::ofstream out;
};

MetricsCsvWriter::MetricsCsvWriter(const std::filesystem::path& path)
    : impl_(std::make_unique<Impl>(Impl{open_out(path)})) {
  impl_->out << metrics_csv_header() << '\n' << std::flush;
}

MetricsCsvWriter::~MetricsCsvWriter() = default;

void MetricsCsvWriter::write(const RoundMetrics& m) {
  impl_->out << metrics_csv_row(m) << '\n' << std::flush;
  if (!impl_->out) throw FormatError("failed writing metrics row");
}

// Summary ------------------------------------------------------------------------

void write_summary_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                        const ExperimentResult& result) {
  const CoefMatrix& beta = result.final_state.global_beta;
  const BetaMae mae = beta_mae(beta, cfg.generator.ground_truth);

  json j;
  j["format"] = "fedctmc-summary";
  j["version"] = 1;
  j["seed"] = cfg.server.seed;
  j["config"] = {
      {"users", cfg.generator.user_count},
      {"rounds", cfg.server.rounds},
      {"rho", cfg.server.participation},
      {"local_steps", cfg.client.local_steps},
      {"local_lr", cfg.client.local_lr},
      {"global_lr", cfg.server.global_lr},
      {"batch", cfg.client.batch_size},
      {"momentum", cfg.server.momentum},
      {"clip", cfg.server.clip_norm},
  };
  j["user_count"] = result.user_count;
  j["total_pairs"] = result.total_pairs;
  j["rounds_completed"] = result.final_state.round_index;
  j["final_beta"] = beta.flat();
  j["momentum"] = result.final_state.momentum;
  j["ground_truth"] = cfg.generator.ground_truth.flat();
  json rows = json::object();
  for (TransitionKind k : kAllTransitions) {
    const auto r = beta.row(k);
    rows[std::string(label(k))] = std::vector<double>(r.begin(), r.end());
  }
  j["final_beta_rows"] = rows;
  j["mae"] = {
      {"0to1", mae.per_transition[0]},
      {"0to2", mae.per_transition[1]},
      {"1to2", mae.per_transition[2]},
      {"overall", mae.overall},
  };
  double wall = 0.0;
  for (const RoundMetrics& m : result.rounds) wall += m.wall_ms;
  j["wall_ms_total"] = wall;
  if (!result.rounds.empty()) {
    j["round1_avg_nll"] = result.rounds.front().avg_nll;
    j["final_avg_nll"] = result.rounds.back().avg_nll;
    j["final_agg_grad_norm"] = result.rounds.back().agg_grad_norm;
  }
  json scenarios = json::array();
  for (const NamedScenario& s : standard_scenarios()) {
    const ScenarioProbs p = scenario_probs(beta, s.z, kStandardScenarioDt);
    scenarios.push_back({{"name", s.name},
                         {"z", {s.z.age, s.z.sea_distance, s.z.area}},
                         {"dt", kStandardScenarioDt},
                         {"from_good", p.from_good},
                         {"from_minor", p.from_minor}});
  }
  j["scenarios"] = scenarios;
  j["hazard_clamp_events"] = clamp_event_count();

  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

// Heatmaps -----------------------------------------------------------------------

std::string heatmap_stem(TransitionKind kind, int x_covariate, int y_covariate) {
  return "heatmap_" + std::string(label(kind)) + "_" + covariate_name(x_covariate) +
         covariate_name(y_covariate);
}

std::filesystem::path write_heatmap(const std::filesystem::path& dir, const HeatmapGrid& grid) {
  std::filesystem::create_directories(dir);
  const std::string stem = heatmap_stem(grid.kind, grid.x_covariate, grid.y_covariate);
  const std::filesystem::path csv_path = dir / (stem + ".csv");
  {
    std::ofstream out = open_out(csv_path);
    const std::size_t n = grid.resolution();
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        if (ix != 0) out << ',';
        out << format_double(grid.at(iy, ix));
      }
      out << '\n';
    }
  }
  json meta;
  meta["format"] = "fedctmc-heatmap";
  meta["version"] = 1;
  meta["transition"] = std::string(label(grid.kind));
  meta["x_covariate"] = covariate_name(grid.x_covariate);
  meta["y_covariate"] = covariate_name(grid.y_covariate);
  meta["fixed_covariate"] = covariate_name(grid.fixed_covariate);
  meta["fixed_value"] = grid.fixed_value;
  meta["dt"] = grid.dt;
  meta["resolution"] = grid.resolution();
  meta["x_values"] = grid.axis;
  meta["y_values"] = grid.axis;
  meta["layout"] = "row i holds y_values[i]; column j holds x_values[j]";
  std::ofstream out = open_out(dir / (stem + ".json"));
  out << meta.dump(2) << '\n';
  return csv_path;
}

HeatmapGrid read_heatmap(const std::filesystem::path& csv_path) {
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  const json meta = read_json(sidecar);
  HeatmapGrid grid;
  try {
    grid.kind = transition_from_label(meta.at("transition").get<std::string>());
    grid.x_covariate = covariate_from_name(meta.at("x_covariate").get<std::string>());
    grid.y_covariate = covariate_from_name(meta.at("y_covariate").get<std::string>());
    grid.fixed_covariate = covariate_from_name(meta.at("fixed_covariate").get<std::string>());
    grid.fixed_value = meta.at("fixed_value").get<double>();
    grid.dt = meta.at("dt").get<double>();
    grid.axis = meta.at("x_values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError("heatmap sidecar '" + sidecar.string() + "': " + e.what());
  }
  const std::size_t n = grid.axis.size();
  std::ifstream in = open_in(csv_path);
  std::string line;
  while (read_line(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != n) throw FormatError("heatmap row width does not match the axis");
    for (std::string_view cell : f) grid.values.push_back(parse_double(cell));
  }
  if (grid.values.size() != n * n) throw FormatError("heatmap row count does not match the axis");
  return grid;
}

}  // namespace fedctmc
