#include "ace/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ace/chain.hpp"
#include "ace/config.hpp"
#include "ace/errors.hpp"
#include "ace/gca_io.hpp"
#include "ace/maze.hpp"
#include "ace/suite.hpp"

namespace ace {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("ace");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("ACE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::optional<std::string> out;
  std::vector<std::string> arms;
};

int cmd_run(const RunArgs& a) {
  SuiteSpec suite = load_suite(a.config);
  if (a.seed) suite.seed = *a.seed;
  if (a.parallelism) suite.parallelism = *a.parallelism;
  if (a.out) suite.output_dir = *a.out;
  if (!a.arms.empty()) {
    std::set<std::string> keep(a.arms.begin(), a.arms.end());
    std::vector<ArmSpec> arms;
    for (auto& arm : suite.arms) {
      if (keep.count(arm.config.name)) arms.push_back(arm);
    }
    if (arms.size() != keep.size()) throw ConfigError("--arm names an arm that is not in the suite");
    for (auto& arm : arms) {
      if (arm.baseline && !keep.count(*arm.baseline)) arm.baseline.reset();
    }
    suite.arms = std::move(arms);
  }
  suite.validate();

  const std::size_t planned = plan_jobs(suite).size();
  spdlog::info("suite: {} arms, {} jobs, parallelism {}, output {}", suite.arms.size(), planned, suite.parallelism,
               suite.output_dir.string());
  std::size_t done = 0;
  OrchestrateOptions opts;
  opts.on_record = [&](const RunRecord& r) {
    ++done;
    spdlog::info("[{}/{}] {} maze {} run {}: fitness {:.1f}{}", done, planned, r.arm, r.maze_id, r.run,
                 r.best_fitness, r.success ? " (success)" : "");
  };
  const SuiteOutcome outcome = orchestrate(suite, opts);
  if (outcome.aborted) {
    for (const auto& e : outcome.errors) spdlog::error("{}", e);
    std::cerr << "suite aborted after " << outcome.records.size() << " of " << planned
              << " runs; see errors.json in " << suite.output_dir << "\n";
    return kRuntimeError;
  }
  export_results(suite, outcome.records, suite.output_dir);
  std::ifstream summary(suite.output_dir / "summary.txt");
  std::cout << summary.rdbuf();
  return kOk;
}

std::vector<RunRecord> read_records(const std::string& path, std::vector<std::string>& arms,
                                    std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<RunRecord> records;
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        records.push_back(record_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw ParseError(path + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  } else {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    if (!doc.contains("records") || !doc["records"].is_array()) throw ParseError(path + ": missing 'records'");
    for (const auto& r : doc["records"]) records.push_back(record_from_json(r));
    if (doc.contains("suite")) {
      const auto& s = doc["suite"];
      if (s.contains("arms")) arms = s["arms"].get<std::vector<std::string>>();
      if (s.contains("comparisons")) {
        for (const auto& c : s["comparisons"]) pairs.emplace_back(c.at(0).get<std::string>(), c.at(1).get<std::string>());
      }
    }
  }
  for (const auto& r : records) {
    if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
  }
  return records;
}

int cmd_stats(const std::string& path, const std::string& baseline, const std::string& treatment) {
  std::vector<std::string> arms;
  std::vector<std::pair<std::string, std::string>> pairs;
  const auto records = read_records(path, arms, pairs);
  if (!baseline.empty() || !treatment.empty()) {
    if (baseline.empty() || treatment.empty()) throw ConfigError("--baseline and --treatment go together");
    pairs = {{baseline, treatment}};
  }
  std::cout << render_report(records, arms, pairs);
  return kOk;
}

int cmd_oracle(const std::string& spec_arg) {
  ChainSpec spec;
  if (spec_arg != "default") {
    std::ifstream in(spec_arg);
    if (!in) throw ConfigError("cannot open '" + spec_arg + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(spec_arg + ": " + e.what());
    }
    spec = chain_from_json(j.contains("chain") ? j["chain"] : j);
  }
  const auto opt = brute_force_optimum(spec);
  std::cout << "optimum " << opt.fitness << "\nwitness";
  for (OpId t : opt.witness) std::cout << ' ' << t;
  std::cout << "\n";
  return kOk;
}

int cmd_maze(int width, int height, double connectivity, std::uint64_t seed) {
  if (width < 2 || height < 2) throw ConfigError("maze dimensions must be >= 2");
  if (!(connectivity >= 0.0 && connectivity <= 1.0)) throw ConfigError("connectivity must lie in [0,1]");
  const Maze maze = generate_maze(width, height, connectivity, seed);
  std::cout << format_maze(maze);
  std::cerr << "open_edges " << maze.open_edge_count() << " shortest_path " << bfs_shortest_path(maze).length
            << "\n";
  return kOk;
}

int cmd_model(const std::string& path, std::size_t top) {
  GcaModel m;
  try {
    m = load_model(path);
  } catch (const ParseError& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return kConfigError;
  }
  std::cout << "valid model\n";
  std::cout << "atomic ops " << m.atomic_count() << ", vocabulary " << m.vocab_size() << ", weights "
            << m.weights().size() << ", support entries " << m.support_counts().size() << "\n";
  std::cout << "macros " << m.macros().size() << " (surviving " << m.surviving_macro_count() << ")\n";
  for (const auto& mac : m.macros()) {
    std::cout << "  " << m.op_name(mac.id) << " = " << m.op_name(mac.left) << " " << m.op_name(mac.right) << " ->";
    for (OpId a : m.flatten(mac.id)) std::cout << ' ' << m.op_name(a);
    std::cout << "  uses " << mac.uses << " successful " << mac.successful_uses << " gen "
              << mac.created_at_generation << (mac.pruned ? " pruned" : "") << "\n";
  }
  std::vector<std::pair<double, OpPair>> w;
  for (const auto& [k, v] : m.weights()) w.emplace_back(v, k);
  std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (w.size() > top) w.resize(top);
  if (!w.empty()) std::cout << "strongest transitions\n";
  for (const auto& [v, k] : w) {
    std::cout << "  " << m.op_name(k.first) << " -> " << m.op_name(k.second) << "  W " << v << "  S "
              << m.support(k.first, k.second) << "  lift " << m.compute_lift(k.first, k.second) << "\n";
  }
  return kOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  if (!spdlog::get("ace")) setup_logging();

  CLI::App app{"Associative constructive evolution benchmark"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "execute an experiment suite");
  run->add_option("--config", run_args.config, "suite JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "override the suite seed");
  run->add_option("--parallelism", run_args.parallelism, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", run_args.out, "output directory");
  run->add_option("--arm", run_args.arms, "only run these arms (repeatable)");

  std::string records_path, baseline, treatment;
  auto* stats = app.add_subcommand("stats", "recompute summaries from stored records");
  stats->add_option("--records", records_path, "records.json or records.jsonl")->required();
  stats->add_option("--baseline", baseline, "baseline arm");
  stats->add_option("--treatment", treatment, "treatment arm");

  std::string spec = "default";
  auto* oracle = app.add_subcommand("oracle", "exact optimum of a chain spec");
  oracle->add_option("--spec", spec, "'default' or a JSON file with a chain spec");

  int size = 15, width = 0, height = 0;
  double connectivity = 0.0;
  std::uint64_t seed = 1;
  auto* maze = app.add_subcommand("maze", "generate and print a maze");
  maze->add_option("--size", size, "square side length");
  maze->add_option("--width", width, "width (overrides --size)");
  maze->add_option("--height", height, "height (overrides --size)");
  maze->add_option("--connectivity", connectivity, "fraction of extra walls opened");
  maze->add_option("--seed", seed, "generator seed");

  std::string model_path;
  std::size_t top = 10;
  auto* model = app.add_subcommand("model", "inspect and validate a serialized model");
  model->add_option("--file", model_path, "model JSON")->required();
  model->add_option("--top", top, "strongest transitions to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*stats) return cmd_stats(records_path, baseline, treatment);
    if (*oracle) return cmd_oracle(spec);
    if (*maze) return cmd_maze(width ? width : size, height ? height : size, connectivity, seed);
    if (*model) return cmd_model(model_path, top);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace ace
