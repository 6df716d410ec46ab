#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "ace/config.hpp"
#include "ace/errors.hpp"
#include "ace/stats.hpp"
#include "ace/suite.hpp"

using namespace ace;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ace_suite_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

ArmSpec arm(const std::string& name, ExplorerKind kind, bool guided, std::optional<std::string> baseline = {}) {
  ArmSpec a;
  a.config.name = name;
  a.config.explorer = kind;
  a.config.guided = guided;
  a.config.population_size = 6;
  a.config.max_generations = 6;
  a.config.abstraction_period = 2;
  a.config.fitness_scale = 1000;
  a.config.pso.budget_factor = 1.2;
  a.baseline = std::move(baseline);
  return a;
}

SuiteSpec tiny_suite(const fs::path& out) {
  SuiteSpec s;
  s.seed = 9;
  s.runs_per_arm = 3;
  s.output_dir = out;
  s.mazes.sizes = {5};
  s.mazes.connectivity = {0.0, 1.0};
  s.mazes.seeds = {1};
  s.arms = {arm("Std", ExplorerKind::pso, false), arm("Ace", ExplorerKind::pso, true, "Std")};
  return s;
}

std::vector<RunRecord> stripped(std::vector<RunRecord> rs) {
  for (auto& r : rs) r.wall_clock_seconds = 0.0;
  return rs;
}

}  // namespace

TEST_CASE("job planning") {
  SUBCASE("four arms, eight mazes, five runs") {
    SuiteSpec s;
    s.runs_per_arm = 5;
    for (int i = 0; i < 4; ++i) s.arms.push_back(arm("a" + std::to_string(i), ExplorerKind::ea, i % 2 == 1));
    const auto jobs = plan_jobs(s);
    CHECK(jobs.size() == 160);
    CHECK(jobs.front().arm_index == 0);
    CHECK(jobs.back().arm_index == 3);
    CHECK(jobs[1].run == 1);
    CHECK(jobs[5].instance == 1);
  }
  SUBCASE("seeds are distinct across runs and instances and shared across arms") {
    auto s = tiny_suite(scratch_dir("plan"));
    const auto jobs = plan_jobs(s);
    std::set<std::uint64_t> seeds;
    for (const auto& j : jobs) {
      CHECK(j.seed == run_seed(s.seed, j.instance, j.run));
      if (j.arm_index == 0) seeds.insert(j.seed);
    }
    CHECK(seeds.size() == jobs.size() / 2);
    CHECK(run_seed(1, 0, 0) != run_seed(2, 0, 0));
  }
  SUBCASE("chain suites have a single instance") {
    SuiteSpec s;
    s.domain = DomainKind::chain;
    s.runs_per_arm = 2;
    s.arms = {arm("x", ExplorerKind::ea, true)};
    CHECK(plan_jobs(s).size() == 2);
  }
}

TEST_CASE("suite validation") {
  auto s = tiny_suite(scratch_dir("validate"));
  CHECK_NOTHROW(s.validate());
  s.arms[1].baseline = "missing";
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = tiny_suite(scratch_dir("validate"));
  s.arms[1].config.name = "Std";
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = tiny_suite(scratch_dir("validate"));
  s.runs_per_arm = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("orchestration") {
  const auto dir = scratch_dir("orchestrate");
  auto s = tiny_suite(dir);
  const auto out = orchestrate(s);
  REQUIRE_FALSE(out.aborted);
  REQUIRE(out.records.size() == 12);
  CHECK(line_count(dir / "records.jsonl") == 12);
  CHECK_FALSE(fs::exists(dir / "errors.json"));
  CHECK(fs::exists(dir / "gca_Ace_1_2.json"));
  CHECK_FALSE(fs::exists(dir / "gca_Std_0_0.json"));

  SUBCASE("parallel execution gives the same records") {
    auto p = tiny_suite(scratch_dir("orchestrate_par"));
    p.parallelism = 4;
    CHECK(stripped(orchestrate(p).records) == stripped(out.records));
  }
  SUBCASE("paired arms see the same seeds") {
    for (std::size_t i = 0; i < 6; ++i) CHECK(out.records[i].seed == out.records[i + 6].seed);
  }
  SUBCASE("stream lines decode to the returned records") {
    std::ifstream in(dir / "records.jsonl");
    std::set<std::string> keys;
    for (std::string line; std::getline(in, line);) {
      auto r = record_from_json(nlohmann::json::parse(line));
      keys.insert(r.arm + "/" + std::to_string(r.maze_id) + "/" + std::to_string(r.run));
    }
    CHECK(keys.size() == 12);
  }
}

TEST_CASE("abort leaves a partial stream") {
  const auto dir = scratch_dir("abort");
  auto s = tiny_suite(dir);
  OrchestrateOptions opt;
  opt.abort_after = 5;
  const auto out = orchestrate(s, opt);
  CHECK(out.aborted);
  CHECK(line_count(dir / "records.jsonl") == 5);
  REQUIRE(fs::exists(dir / "errors.json"));
  const auto err = nlohmann::json::parse(slurp(dir / "errors.json"));
  CHECK(err["completed"] == 5);
  CHECK(err["planned"] == 12);
}

TEST_CASE("export") {
  const auto dir = scratch_dir("export");
  auto s = tiny_suite(dir);
  const auto out = orchestrate(s);
  export_results(s, out.records, dir);

  SUBCASE("csv header and rows") {
    std::ifstream in(dir / "records.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == kRecordCsvHeader);
    CHECK(row == record_csv_row(out.records[0]));
    CHECK(line_count(dir / "records.csv") == 13);
  }
  SUBCASE("curves have one row per generation") {
    CHECK(line_count(dir / "curves_Ace.csv") == 1 + 6);
    CHECK(line_count(dir / "curves_Std.csv") == 1 + 6);
  }
  SUBCASE("records.json reproduces the summary") {
    const auto j = nlohmann::json::parse(slurp(dir / "records.json"));
    std::vector<RunRecord> back;
    for (const auto& r : j["records"]) back.push_back(record_from_json(r));
    CHECK(render_report(back, {"Std", "Ace"}, comparisons(s)) == slurp(dir / "summary.txt"));
    CHECK(j["records"][0].count("wall_clock_seconds") == 0);
  }
  SUBCASE("deterministic outputs are byte-identical across executions") {
    const auto dir2 = scratch_dir("export2");
    auto s2 = tiny_suite(dir2);
    export_results(s2, orchestrate(s2).records, dir2);
    for (const char* f : {"records.csv", "records.json", "summary.txt", "curves_Ace.csv"}) {
      CHECK(slurp(dir / f) == slurp(dir2 / f));
    }
  }
  SUBCASE("empty record set is rejected") {
    CHECK_THROWS_AS(export_results(s, {}, dir), DomainError);
  }
}

TEST_CASE("report blocks") {
  std::vector<RunRecord> rs;
  for (std::size_t i = 0; i < 8; ++i) {
    RunRecord a, b;
    a.arm = "B";
    b.arm = "T";
    a.run = b.run = i;
    a.best_fitness = static_cast<double>(i);
    b.best_fitness = static_cast<double>(i) + 1.0 + 0.1 * static_cast<double>(i);
    a.success = i < 4;
    b.success = true;
    a.success_generation = a.success ? std::optional<int>(10) : std::nullopt;
    b.success_generation = 5;
    rs.push_back(a);
    rs.push_back(b);
  }
  const auto text = render_report(rs, {"B", "T"}, {{"B", "T"}});
  CHECK(text.find("== T vs B ==") != std::string::npos);
  CHECK(text.find("50.0% -> 100.0% (+50.0 points)") != std::string::npos);
  CHECK(text.find("wins 4, losses 0") != std::string::npos);
  CHECK(text.find("10.0 -> 5.0 (50.0% reduction)") != std::string::npos);
}

TEST_CASE("suite JSON") {
  const auto j = nlohmann::json::parse(R"({
    "seed": 3, "runs_per_arm": 2, "domain": "chain",
    "chain": {"alphabet_size": 4, "bigrams": [[0, 1, 5.0]], "sequence_length": 6, "noise_penalty": 0.1},
    "defaults": {"population_size": 8, "max_generations": 4, "gca": {"tau": 2.0}},
    "arms": [{"name": "S", "guided": false},
             {"name": "A", "guided": true, "gca": {"epsilon": 0.2}, "baseline": "S"}],
    "_note": "ignored"
  })");
  const auto s = suite_from_json(j, "/cfg");
  CHECK(s.domain == DomainKind::chain);
  CHECK(s.chain.alphabet_size == 4);
  REQUIRE(s.arms.size() == 2);
  CHECK(s.arms[1].config.population_size == 8);
  CHECK(s.arms[1].config.gca.tau == 2.0);
  CHECK(s.arms[1].config.gca.epsilon == 0.2);
  CHECK(s.arms[0].config.gca.epsilon == GcaParams{}.epsilon);
  CHECK(s.arms[1].baseline == "S");

  auto bad = j;
  bad["defaults"]["populaton_size"] = 3;
  CHECK_THROWS_AS(suite_from_json(bad), ConfigError);
  bad = j;
  bad["arms"][1]["baseline"] = "nobody";
  CHECK_THROWS_AS(suite_from_json(bad), ConfigError);

  const auto cfg = experiment_from_json(experiment_to_json(s.arms[1].config));
  CHECK(experiment_to_json(cfg) == experiment_to_json(s.arms[1].config));
}

TEST_CASE("record JSON round trip") {
  RunRecord r;
  r.arm = "X";
  r.maze_id = 3;
  r.run = 2;
  r.seed = 0xfedcba9876543210ULL;
  r.connectivity = 0.3;
  r.success = true;
  r.best_fitness = 9712.5;
  r.success_generation = 14;
  r.path_efficiency = 0.875;
  r.macros_created = 4;
  r.macros_surviving = 3;
  r.mean_macro_effectiveness = 0.25;
  r.hebbian_updates = 120;
  r.abstraction_scans = 20;
  r.wall_clock_seconds = 1.5;
  r.best_curve = {1.0, 2.5, 9712.5};
  CHECK(record_from_json(record_to_json(r, true)) == r);
  auto no_time = r;
  no_time.wall_clock_seconds = 0.0;
  CHECK(record_from_json(record_to_json(r, false)) == no_time);
  CHECK_THROWS_AS(record_from_json(nlohmann::json::parse(R"({"arm": 3})")), ParseError);
}
