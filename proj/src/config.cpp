#include "ace/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ace/errors.hpp"

namespace ace {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require_object(j, where);
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_size(const json& j, const char* key, std::size_t& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = it->get<std::size_t>();
}

}  // namespace

const char* to_string(DomainKind kind) { return kind == DomainKind::maze ? "maze" : "chain"; }

std::vector<MazeInstance> expand_grid(const MazeGrid& grid) {
  std::vector<MazeInstance> out;
  for (int size : grid.sizes) {
    for (double c : grid.connectivity) {
      for (std::uint64_t seed : grid.seeds) {
        out.push_back({out.size(), size, c, seed});
      }
    }
  }
  return out;
}

ExperimentConfig experiment_from_json(const json& j, ExperimentConfig c) {
  const std::string where = "config";
  check_keys(j, where,
             {"name", "explorer", "guided", "population_size", "max_generations", "seed", "abstraction_period",
              "fitness_scale", "gca", "ea", "pso", "warm_start_model", "baseline"});
  read(j, "name", c.name, where);
  if (j.contains("explorer")) {
    std::string e;
    read(j, "explorer", e, where);
    c.explorer = explorer_from_string(e);
  }
  read(j, "guided", c.guided, where);
  read_size(j, "population_size", c.population_size, where);
  read(j, "max_generations", c.max_generations, where);
  read(j, "seed", c.seed, where);
  read(j, "abstraction_period", c.abstraction_period, where);
  read(j, "fitness_scale", c.fitness_scale, where);
  if (j.contains("warm_start_model")) {
    if (j["warm_start_model"].is_null()) {
      c.warm_start_model.reset();
    } else {
      std::string p;
      read(j, "warm_start_model", p, where);
      c.warm_start_model = p;
    }
  }
  if (j.contains("gca")) {
    const auto& g = j["gca"];
    const std::string w = "gca";
    check_keys(g, w,
               {"tau", "epsilon", "lambda", "gamma", "theta_w", "theta_s", "theta_l", "theta_eff", "max_new_macros",
                "min_uses"});
    read(g, "tau", c.gca.tau, w);
    read(g, "epsilon", c.gca.epsilon, w);
    read(g, "lambda", c.gca.lambda, w);
    read(g, "gamma", c.gca.gamma, w);
    read(g, "theta_w", c.gca.theta_w, w);
    read(g, "theta_s", c.gca.theta_s, w);
    read(g, "theta_l", c.gca.theta_l, w);
    read(g, "theta_eff", c.gca.theta_eff, w);
    read_size(g, "max_new_macros", c.gca.max_new_macros, w);
    read(g, "min_uses", c.gca.min_uses, w);
  }
  if (j.contains("ea")) {
    const auto& e = j["ea"];
    const std::string w = "ea";
    check_keys(e, w,
               {"crossover_rate", "mutation_rate", "elitism_fraction", "tournament_size", "min_len", "max_len"});
    read(e, "crossover_rate", c.ea.crossover_rate, w);
    read(e, "mutation_rate", c.ea.mutation_rate, w);
    read(e, "elitism_fraction", c.ea.elitism_fraction, w);
    read_size(e, "tournament_size", c.ea.tournament_size, w);
    read_size(e, "min_len", c.ea.min_len, w);
    read_size(e, "max_len", c.ea.max_len, w);
  }
  if (j.contains("pso")) {
    const auto& p = j["pso"];
    const std::string w = "pso";
    check_keys(p, w, {"inertia", "cognitive", "social", "alpha", "lambda_g", "max_path_len", "budget_factor"});
    read(p, "inertia", c.pso.inertia, w);
    read(p, "cognitive", c.pso.cognitive, w);
    read(p, "social", c.pso.social, w);
    read(p, "alpha", c.pso.alpha, w);
    read(p, "lambda_g", c.pso.lambda_g, w);
    read_size(p, "max_path_len", c.pso.max_path_len, w);
    read(p, "budget_factor", c.pso.budget_factor, w);
  }
  return c;
}

json experiment_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["explorer"] = to_string(c.explorer);
  j["guided"] = c.guided;
  j["population_size"] = c.population_size;
  j["max_generations"] = c.max_generations;
  j["seed"] = c.seed;
  j["abstraction_period"] = c.abstraction_period;
  j["fitness_scale"] = c.fitness_scale;
  j["warm_start_model"] = c.warm_start_model ? json(*c.warm_start_model) : json(nullptr);
  j["gca"] = {{"tau", c.gca.tau},
              {"epsilon", c.gca.epsilon},
              {"lambda", c.gca.lambda},
              {"gamma", c.gca.gamma},
              {"theta_w", c.gca.theta_w},
              {"theta_s", c.gca.theta_s},
              {"theta_l", c.gca.theta_l},
              {"theta_eff", c.gca.theta_eff},
              {"max_new_macros", c.gca.max_new_macros},
              {"min_uses", c.gca.min_uses}};
  j["ea"] = {{"crossover_rate", c.ea.crossover_rate},   {"mutation_rate", c.ea.mutation_rate},
             {"elitism_fraction", c.ea.elitism_fraction}, {"tournament_size", c.ea.tournament_size},
             {"min_len", c.ea.min_len},                 {"max_len", c.ea.max_len}};
  j["pso"] = {{"inertia", c.pso.inertia},           {"cognitive", c.pso.cognitive}, {"social", c.pso.social},
              {"alpha", c.pso.alpha},               {"lambda_g", c.pso.lambda_g},
              {"max_path_len", c.pso.max_path_len}, {"budget_factor", c.pso.budget_factor}};
  return j;
}

ChainSpec chain_from_json(const json& j) {
  const std::string w = "chain";
  check_keys(j, w, {"alphabet_size", "bigrams", "sequence_length", "noise_penalty", "allow_repeats"});
  ChainSpec s;
  read_size(j, "alphabet_size", s.alphabet_size, w);
  read_size(j, "sequence_length", s.sequence_length, w);
  read(j, "noise_penalty", s.noise_penalty, w);
  read(j, "allow_repeats", s.allow_repeats, w);
  if (j.contains("bigrams")) {
    const auto& b = j["bigrams"];
    if (!b.is_array()) throw ConfigError("chain.bigrams: expected an array");
    s.bigrams.clear();
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto& e = b[i];
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
          !e[2].is_number()) {
        throw ConfigError("chain.bigrams[" + std::to_string(i) + "]: expected [first, second, reward]");
      }
      s.bigrams.push_back({e[0].get<OpId>(), e[1].get<OpId>(), e[2].get<double>()});
    }
  }
  s.validate();
  return s;
}

json chain_to_json(const ChainSpec& s) {
  json b = json::array();
  for (const auto& g : s.bigrams) b.push_back({g.first, g.second, g.reward});
  return {{"alphabet_size", s.alphabet_size},
          {"bigrams", b},
          {"sequence_length", s.sequence_length},
          {"noise_penalty", s.noise_penalty},
          {"allow_repeats", s.allow_repeats}};
}

void SuiteSpec::validate() const {
  if (runs_per_arm < 1) throw ConfigError("runs_per_arm must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (arms.empty()) throw ConfigError("suite has no arms");
  std::set<std::string> names;
  for (const auto& a : arms) {
    a.config.validate();
    if (a.config.name.empty()) throw ConfigError("arm name must not be empty");
    for (char ch : a.config.name) {
      if (ch == '/' || ch == '\\' || ch == ',' || ch == '"' || static_cast<unsigned char>(ch) < 0x20) {
        throw ConfigError("arm name '" + a.config.name + "' contains an unsupported character");
      }
    }
    if (!names.insert(a.config.name).second) throw ConfigError("duplicate arm name '" + a.config.name + "'");
  }
  for (const auto& a : arms) {
    if (a.baseline && !names.count(*a.baseline)) {
      throw ConfigError("arm '" + a.config.name + "' names unknown baseline '" + *a.baseline + "'");
    }
  }
  if (domain == DomainKind::maze) {
    if (mazes.sizes.empty() || mazes.connectivity.empty() || mazes.seeds.empty()) {
      throw ConfigError("maze grid must have at least one size, connectivity level and seed");
    }
    for (int s : mazes.sizes) {
      if (s < 2) throw ConfigError("maze sizes must be >= 2");
    }
    for (double c : mazes.connectivity) {
      if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("maze connectivity must lie in [0,1]");
    }
  } else {
    chain.validate();
  }
}

SuiteSpec suite_from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "suite",
             {"seed", "runs_per_arm", "parallelism", "output_dir", "domain", "mazes", "chain", "save_models",
              "defaults", "arms"});
  SuiteSpec s;
  read(j, "seed", s.seed, "suite");
  read_size(j, "runs_per_arm", s.runs_per_arm, "suite");
  read_size(j, "parallelism", s.parallelism, "suite");
  if (j.contains("output_dir")) {
    std::string out;
    read(j, "output_dir", out, "suite");
    s.output_dir = out;
  }
  read(j, "save_models", s.save_models, "suite");
  if (j.contains("domain")) {
    std::string d;
    read(j, "domain", d, "suite");
    if (d == "maze") {
      s.domain = DomainKind::maze;
    } else if (d == "chain") {
      s.domain = DomainKind::chain;
    } else {
      throw ConfigError("suite.domain: unknown domain '" + d + "'");
    }
  }
  if (j.contains("mazes")) {
    const auto& m = j["mazes"];
    check_keys(m, "mazes", {"sizes", "connectivity", "seeds"});
    read(m, "sizes", s.mazes.sizes, "mazes");
    read(m, "connectivity", s.mazes.connectivity, "mazes");
    read(m, "seeds", s.mazes.seeds, "mazes");
  }
  if (j.contains("chain")) s.chain = chain_from_json(j["chain"]);

  ExperimentConfig defaults;
  if (j.contains("defaults")) defaults = experiment_from_json(j["defaults"], defaults);
  if (!j.contains("arms") || !j["arms"].is_array()) throw ConfigError("suite.arms: expected an array");
  for (const auto& a : j["arms"]) {
    ArmSpec arm;
    arm.config = experiment_from_json(a, defaults);
    if (a.contains("baseline")) {
      std::string b;
      read(a, "baseline", b, "arm");
      arm.baseline = b;
    }
    if (arm.config.warm_start_model && !base_dir.empty()) {
      std::filesystem::path p(*arm.config.warm_start_model);
      if (p.is_relative()) arm.config.warm_start_model = (base_dir / p).string();
    }
    s.arms.push_back(std::move(arm));
  }
  s.validate();
  return s;
}

SuiteSpec load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return suite_from_json(j, path.parent_path());
}

json record_to_json(const RunRecord& r, bool include_timing) {
  json j;
  j["arm"] = r.arm;
  j["maze_id"] = r.maze_id;
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["connectivity"] = r.connectivity;
  j["success"] = r.success;
  j["best_fitness"] = r.best_fitness;
  j["success_generation"] = r.success_generation ? json(*r.success_generation) : json(nullptr);
  j["path_efficiency"] = r.path_efficiency ? json(*r.path_efficiency) : json(nullptr);
  j["macros_created"] = r.macros_created;
  j["macros_surviving"] = r.macros_surviving;
  j["mean_macro_effectiveness"] = r.mean_macro_effectiveness;
  j["hebbian_updates"] = r.hebbian_updates;
  j["abstraction_scans"] = r.abstraction_scans;
  if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["best_curve"] = r.best_curve;
  return j;
}

RunRecord record_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record: expected an object");
  RunRecord r;
  try {
    r.arm = j.at("arm").get<std::string>();
    r.maze_id = j.at("maze_id").get<std::size_t>();
    r.run = j.at("run").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.connectivity = j.at("connectivity").get<double>();
    r.success = j.at("success").get<bool>();
    r.best_fitness = j.at("best_fitness").get<double>();
    if (!j.at("success_generation").is_null()) r.success_generation = j["success_generation"].get<int>();
    if (!j.at("path_efficiency").is_null()) r.path_efficiency = j["path_efficiency"].get<double>();
    r.macros_created = j.at("macros_created").get<std::size_t>();
    r.macros_surviving = j.at("macros_surviving").get<std::size_t>();
    r.mean_macro_effectiveness = j.at("mean_macro_effectiveness").get<double>();
    r.hebbian_updates = j.at("hebbian_updates").get<std::size_t>();
    r.abstraction_scans = j.at("abstraction_scans").get<std::size_t>();
    if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j["wall_clock_seconds"].get<double>();
    if (j.contains("best_curve")) r.best_curve = j["best_curve"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  return r;
}

}  // namespace ace
