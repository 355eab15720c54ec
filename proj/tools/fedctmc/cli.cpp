#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <vector>

#include "fedctmc/datagen.hpp"
#include "fedctmc/harness.hpp"
#include "fedctmc/io.hpp"
#include "fedctmc/rng.hpp"
#include "fedctmc/wire.hpp"

namespace fedctmc::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SharedOptions {
  std::uint64_t seed = 2024;
  std::size_t users = 500;
  int rounds = 50;
  double rho = 0.10;
  int local_steps = 3;
  double local_lr = 0.01;
  double global_lr = 0.05;
  std::size_t batch = 32;
  double momentum = 0.9;
  double clip = 1.0;
  std::string out = "fedctmc_out";
  unsigned threads = 0;

  static SharedOptions defaults() {
    const ExperimentConfig d;
    SharedOptions o;
    o.seed = d.server.seed;
    o.users = d.generator.user_count;
    o.rounds = d.server.rounds;
    o.rho = d.server.participation;
    o.local_steps = d.client.local_steps;
    o.local_lr = d.client.local_lr;
    o.global_lr = d.server.global_lr;
    o.batch = d.client.batch_size;
    o.momentum = d.server.momentum;
    o.clip = d.server.clip_norm;
    return o;
  }

  ExperimentConfig experiment() const {
    ExperimentConfig cfg;
    cfg.set_seed(seed);
    cfg.generator.user_count = users;
    cfg.generator.threads = threads;
    cfg.server.rounds = rounds;
    cfg.server.participation = rho;
    cfg.server.global_lr = global_lr;
    cfg.server.momentum = momentum;
    cfg.server.clip_norm = clip;
    cfg.client.local_steps = local_steps;
    cfg.client.local_lr = local_lr;
    cfg.client.batch_size = batch;
    cfg.threads = threads;
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

struct TrainOptions {
  std::string data_dir;
  std::string resume;
  bool quiet = false;
};

struct EvalOptions {
  std::string beta;
  std::vector<std::string> scenarios;
  double dt = kStandardScenarioDt;
  std::string format = "csv";
  int precision = 3;
};

struct HeatmapOptions {
  std::string beta;
  std::size_t resolution = kDefaultHeatmapResolution;
  double dt = kStandardScenarioDt;
  double fixed = 0.5;
};

struct CodecOptions {
  std::size_t count = 10000;
  std::string encode;
  std::uint64_t sample_count = 1;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(parse_double(item));
    } catch (const FormatError&) {
      throw UsageError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (values.size() != expected) {
    throw UsageError(std::string(what) + " needs " + std::to_string(expected) +
                     " comma-separated values");
  }
  return values;
}

fs::path beta_path_or_default(const std::string& given, const SharedOptions& shared) {
  return given.empty() ? fs::path(shared.out) / "beta.json" : fs::path(given);
}

int run_generate(const SharedOptions& shared, std::ostream& out) {
  const ExperimentConfig cfg = shared.experiment();
  const std::vector<UserDataset> users = build_population(cfg.generator);
  save_population(shared.out, users);
  std::uint64_t pairs = 0;
  for (const UserDataset& u : users) pairs += u.sample_count();
  out << "generated " << users.size() << " users, " << pairs << " transition pairs -> "
      << shared.out << '\n';
  return kExitOk;
}

int run_train(const SharedOptions& shared, const TrainOptions& opt, std::ostream& out,
              std::ostream& err) {
  ExperimentConfig cfg = shared.experiment();
  const fs::path dir(shared.out);
  fs::create_directories(dir);
  cfg.metrics_path = dir / "metrics.csv";

  std::vector<UserDataset> population;
  if (!opt.data_dir.empty()) {
    population = load_population(opt.data_dir);
    cfg.generator.user_count = population.size();
  } else {
    population = build_population(cfg.generator);
  }
  ServerState start;
  if (!opt.resume.empty()) start = load_beta(opt.resume);

  RunHooks hooks;
  hooks.on_warning = [&err](std::string_view msg) { err << "warning: " << msg << '\n'; };
  if (!opt.quiet) {
    hooks.on_round = [&out, &cfg](const RoundMetrics& m) {
      out << "round " << m.round << '/' << cfg.server.rounds << " avg_nll=" << std::fixed
          << std::setprecision(4) << m.avg_nll << " grad_norm=" << m.agg_grad_norm
          << " participants=" << m.participant_count << " samples=" << m.sample_count
          << std::defaultfloat << '\n';
    };
  }
  const ExperimentResult result = run_rounds(cfg, population, start, hooks);
  save_beta(dir / "beta.json", result.final_state);
  write_summary_json(dir / "summary.json", cfg, result);
  out << "trained " << result.rounds.size() << " rounds on " << result.user_count << " users ("
      << result.total_pairs << " pairs) -> " << dir.string() << '\n';
  return kExitOk;
}

int run_eval(const SharedOptions& shared, const EvalOptions& opt, std::ostream& out) {
  if (!(opt.dt > 0.0)) throw UsageError("--dt must be positive");
  std::vector<NamedScenario> scenarios;
  if (opt.scenarios.empty()) {
    scenarios = standard_scenarios();
  } else {
    for (std::size_t i = 0; i < opt.scenarios.size(); ++i) {
      const auto v = parse_list(opt.scenarios[i], 3, "--z");
      scenarios.push_back({"scenario" + std::to_string(i + 1), {v[0], v[1], v[2]}});
    }
  }
  const CoefMatrix beta = load_beta(beta_path_or_default(opt.beta, shared)).global_beta;

  if (opt.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const NamedScenario& s : scenarios) {
      const ScenarioProbs p = scenario_probs(beta, s.z, opt.dt);
      rows.push_back({{"scenario", s.name},
                      {"z", {s.z.age, s.z.sea_distance, s.z.area}},
                      {"dt", opt.dt},
                      {"from_good", p.from_good},
                      {"from_minor", p.from_minor}});
    }
    out << rows.dump(2) << '\n';
    return kExitOk;
  }
  out << "scenario,z1,z2,z3,dt,good_stay,good_to_minor,good_to_severe,minor_stay,minor_to_severe\n";
  for (const NamedScenario& s : scenarios) {
    const ScenarioProbs p = scenario_probs(beta, s.z, opt.dt);
    out << s.name << ',' << format_double(s.z.age) << ',' << format_double(s.z.sea_distance) << ','
        << format_double(s.z.area) << ',' << format_double(opt.dt) << std::fixed
        << std::setprecision(opt.precision);
    for (double v : p.from_good) out << ',' << v;
    for (double v : p.from_minor) out << ',' << v;
    out << std::defaultfloat << '\n';
  }
  return kExitOk;
}

int run_heatmap(const SharedOptions& shared, const HeatmapOptions& opt, std::ostream& out) {
  if (opt.resolution < 2) throw UsageError("--resolution must be >= 2");
  if (!(opt.dt > 0.0)) throw UsageError("--dt must be positive");
  const CoefMatrix beta = load_beta(beta_path_or_default(opt.beta, shared)).global_beta;
  const fs::path dir = fs::path(shared.out) / "heatmaps";
  constexpr std::array<std::array<int, 2>, 3> kPairs = {{{1, 2}, {1, 3}, {2, 3}}};
  for (TransitionKind kind : kAllTransitions) {
    for (const auto& [x, y] : kPairs) {
      const HeatmapGrid grid = heatmap_grid(beta, kind, x, y, opt.fixed, opt.resolution, opt.dt);
      out << write_heatmap(dir, grid).string() << '\n';
    }
  }
  return kExitOk;
}

std::string hex(std::span<const std::byte> bytes) {
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i != 0) ss << ' ';
    ss << std::setw(2) << std::to_integer<int>(bytes[i]);
  }
  return ss.str();
}

int run_codec(const SharedOptions& shared, const CodecOptions& opt, std::ostream& out) {
  out << "broadcast bytes: " << encode_broadcast(CoefMatrix{}).size() << '\n';
  out << "update bytes: " << encode_update(ClientUpdate{}).size() << '\n';

  if (!opt.encode.empty()) {
    const auto v = parse_list(opt.encode, kParamCount, "--encode");
    ClientUpdate u;
    std::copy(v.begin(), v.end(), u.pseudo_gradient.begin());
    u.sample_count = opt.sample_count;
    out << hex(encode_update(u)) << '\n';
    return kExitOk;
  }

  Rng rng(derive_seed(shared.seed, Stream::Test, 0x636f646563));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < opt.count; ++i) {
    ClientUpdate u;
    for (double& g : u.pseudo_gradient) g = rng.normal(0.0, std::exp(rng.uniform(-5.0, 5.0)));
    u.sample_count = static_cast<std::uint64_t>(rng.uniform_int(1, 1'000'000));
    u.user_id = i;
    if (decode_update(encode_update(u), u.user_id) == quantize(u)) ++ok;
  }
  out << "round-trip: " << ok << '/' << opt.count << " ok\n";
  return ok == opt.count ? kExitOk : kExitRuntime;
}

}  // namespace

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated CTMC hazard estimation for bridge deterioration", "fedctmc"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  SharedOptions shared = SharedOptions::defaults();
  app.add_option("--seed", shared.seed, "Master random seed")->capture_default_str();
  app.add_option("--users", shared.users, "Number of synthetic Users")->capture_default_str();
  app.add_option("--rounds", shared.rounds, "Communication rounds R")->capture_default_str();
  app.add_option("--rho", shared.rho, "Participation fraction per round")->capture_default_str();
  app.add_option("--local-steps", shared.local_steps, "Local SGD steps K")->capture_default_str();
  app.add_option("--local-lr", shared.local_lr, "Local learning rate")->capture_default_str();
  app.add_option("--global-lr", shared.global_lr, "Global learning rate")->capture_default_str();
  app.add_option("--batch", shared.batch, "Mini-batch size")->capture_default_str();
  app.add_option("--momentum", shared.momentum, "Server momentum")->capture_default_str();
  app.add_option("--clip", shared.clip, "Server l2 clip norm")->capture_default_str();
  app.add_option("--out", shared.out, "Output directory")
      ->envname("FEDCTMC_OUT_DIR")
      ->capture_default_str();
  app.add_option("--threads", shared.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Generate the synthetic population")->fallthrough();

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "Run the federated experiment")->fallthrough();
  train->add_option("--data", train_opt.data_dir, "Load the population from a generate directory");
  train->add_option("--resume", train_opt.resume, "Resume from a beta.json checkpoint");
  train->add_flag("--quiet", train_opt.quiet, "Suppress per-round log lines");

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "Transition probability tables for covariate scenarios")
                   ->fallthrough();
  eval->add_option("--beta", eval_opt.beta, "Coefficient JSON (default <out>/beta.json)");
  eval->add_option("--z", eval_opt.scenarios, "Scenario covariates z1,z2,z3 (repeatable)");
  eval->add_option("--dt", eval_opt.dt, "Interval in years")->capture_default_str();
  eval->add_option("--format", eval_opt.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  eval->add_option("--precision", eval_opt.precision, "Decimals in CSV output")
      ->check(CLI::Range(0, 17))
      ->capture_default_str();

  HeatmapOptions heat_opt;
  auto* heatmap = app.add_subcommand("heatmap", "Write the 3x3 covariate-pair probability grids")
                      ->fallthrough();
  heatmap->add_option("--beta", heat_opt.beta, "Coefficient JSON (default <out>/beta.json)");
  heatmap->add_option("--resolution", heat_opt.resolution, "Grid points per axis")
      ->capture_default_str();
  heatmap->add_option("--dt", heat_opt.dt, "Interval in years")->capture_default_str();
  heatmap->add_option("--fixed", heat_opt.fixed, "Value of the held covariate")
      ->capture_default_str();

  CodecOptions codec_opt;
  auto* codec = app.add_subcommand("codec", "Wire codec sizes and round-trip check")->fallthrough();
  codec->add_option("--count", codec_opt.count, "Random updates to round-trip")->capture_default_str();
  codec->add_option("--encode", codec_opt.encode, "Encode 12 comma-separated gradient values");
  codec->add_option("--n", codec_opt.sample_count, "Sample count for --encode")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return run_generate(shared, out);
    if (*train) return run_train(shared, train_opt, out, err);
    if (*eval) return run_eval(shared, eval_opt, out);
    if (*heatmap) return run_heatmap(shared, heat_opt, out);
    if (*codec) return run_codec(shared, codec_opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace fedctmc::cli
