#include "ace/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ace/chain.hpp"
#include "ace/errors.hpp"
#include "ace/gca_io.hpp"
#include "ace/maze.hpp"
#include "ace/rng.hpp"
#include "ace/stats.hpp"

namespace ace {

using nlohmann::json;

namespace {

constexpr std::uint64_t kRunTag = 0x72756e;  // "run"

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt("%.17g", v);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

std::vector<std::unique_ptr<Domain>> build_instances(const SuiteSpec& suite,
                                                     std::vector<double>& connectivity) {
  std::vector<std::unique_ptr<Domain>> out;
  if (suite.domain == DomainKind::chain) {
    out.push_back(std::make_unique<ChainDomain>(suite.chain));
    connectivity.push_back(0.0);
    return out;
  }
  for (const auto& m : expand_grid(suite.mazes)) {
    out.push_back(std::make_unique<MazeDomain>(generate_maze(m.size, m.size, m.connectivity, m.seed)));
    connectivity.push_back(m.connectivity);
  }
  return out;
}

std::size_t instance_count(const SuiteSpec& suite) {
  return suite.domain == DomainKind::chain ? 1 : expand_grid(suite.mazes).size();
}

}  // namespace

const char* const kRecordCsvHeader =
    "arm,maze_id,connectivity,run,seed,success,best_fitness,success_generation,path_efficiency,"
    "macros_created,macros_surviving,mean_macro_effectiveness,hebbian_updates,abstraction_scans";

std::string record_csv_row(const RunRecord& r) {
  std::ostringstream o;
  o << r.arm << ',' << r.maze_id << ',' << num(r.connectivity) << ',' << r.run << ',' << r.seed << ','
    << (r.success ? 1 : 0) << ',' << num(r.best_fitness) << ','
    << (r.success_generation ? std::to_string(*r.success_generation) : std::string()) << ','
    << (r.path_efficiency ? num(*r.path_efficiency) : std::string()) << ',' << r.macros_created << ','
    << r.macros_surviving << ',' << num(r.mean_macro_effectiveness) << ',' << r.hebbian_updates << ','
    << r.abstraction_scans;
  return o.str();
}

std::uint64_t run_seed(std::uint64_t suite_seed, std::size_t instance, std::size_t run) {
  return derive_seed(suite_seed, kRunTag, instance, run);
}

std::vector<RunJob> plan_jobs(const SuiteSpec& suite) {
  std::vector<RunJob> jobs;
  const std::size_t instances = instance_count(suite);
  for (std::size_t a = 0; a < suite.arms.size(); ++a) {
    for (std::size_t m = 0; m < instances; ++m) {
      for (std::size_t r = 0; r < suite.runs_per_arm; ++r) {
        jobs.push_back({a, m, r, run_seed(suite.seed, m, r)});
      }
    }
  }
  return jobs;
}

std::vector<std::pair<std::string, std::string>> comparisons(const SuiteSpec& suite) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : suite.arms) {
    if (a.baseline) out.emplace_back(*a.baseline, a.config.name);
  }
  return out;
}

SuiteOutcome orchestrate(const SuiteSpec& suite, const OrchestrateOptions& options) {
  suite.validate();
  std::filesystem::create_directories(suite.output_dir);

  std::vector<double> connectivity;
  const auto instances = build_instances(suite, connectivity);
  std::vector<std::optional<GcaModel>> warm(suite.arms.size());
  for (std::size_t a = 0; a < suite.arms.size(); ++a) {
    const auto& cfg = suite.arms[a].config;
    if (cfg.warm_start_model) {
      try {
        warm[a] = load_model(*cfg.warm_start_model);
      } catch (const ParseError& e) {
        throw ConfigError("arm '" + cfg.name + "': " + e.what());
      }
    }
  }

  const auto jobs = plan_jobs(suite);
  std::vector<std::optional<RunRecord>> slots(jobs.size());
  auto stream = open_out(suite.output_dir / "records.jsonl");

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::size_t written = 0;
  SuiteOutcome outcome;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const RunJob& job = jobs[k];
      const ArmSpec& arm = suite.arms[job.arm_index];
      try {
        ExperimentConfig cfg = arm.config;
        cfg.seed = job.seed;
        const GcaModel* ws = warm[job.arm_index] ? &*warm[job.arm_index] : nullptr;
        RunResult res = run_arm(cfg, *instances[job.instance], ws);
        RunRecord rec = std::move(res.record);
        rec.maze_id = job.instance;
        rec.run = job.run;
        rec.connectivity = connectivity[job.instance];
        if (suite.save_models && cfg.guided) {
          save_model(res.model, suite.output_dir / ("gca_" + cfg.name + "_" + std::to_string(job.instance) + "_" +
                                                    std::to_string(job.run) + ".json"));
        }
        std::lock_guard lock(mu);
        if (stop.load()) return;
        stream << record_to_json(rec, true).dump() << '\n';
        stream.flush();
        if (!stream) throw std::runtime_error("write to records.jsonl failed");
        ++written;
        if (options.on_record) options.on_record(rec);
        slots[k] = std::move(rec);
        if (options.abort_after && written >= *options.abort_after) {
          outcome.aborted = true;
          stop.store(true);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        outcome.errors.push_back(arm.config.name + " maze " + std::to_string(job.instance) + " run " +
                                 std::to_string(job.run) + ": " + e.what());
        outcome.aborted = true;
        stop.store(true);
      }
    }
  };

  const std::size_t n_threads = std::min(suite.parallelism, jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (auto& s : slots) {
    if (s) outcome.records.push_back(std::move(*s));
  }
  if (outcome.aborted) {
    json manifest = {{"aborted", true},
                     {"completed", outcome.records.size()},
                     {"planned", jobs.size()},
                     {"errors", outcome.errors}};
    auto out = open_out(suite.output_dir / "errors.json");
    out << manifest.dump(2) << '\n';
  } else {
    std::error_code ec;
    std::filesystem::remove(suite.output_dir / "errors.json", ec);
  }
  return outcome;
}

std::string render_report(const std::vector<RunRecord>& records, const std::vector<std::string>& arm_order,
                          const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ostringstream out;
  out << "== by arm ==\n";
  const auto by_arm = summarize(records, [](const RunRecord& r) { return r.arm; }, arm_order);
  out << format_summary(by_arm);

  std::vector<double> levels;
  for (const auto& r : records) {
    if (std::find(levels.begin(), levels.end(), r.connectivity) == levels.end()) levels.push_back(r.connectivity);
  }
  std::sort(levels.begin(), levels.end());
  if (levels.size() > 1) {
    out << "\n== by arm and connectivity ==\n";
    std::vector<std::string> keys;
    auto key = [](const RunRecord& r) { return r.arm + "@" + fmt("%.2f", r.connectivity); };
    for (const auto& a : arm_order) {
      for (double c : levels) keys.push_back(a + "@" + fmt("%.2f", c));
    }
    const auto rows = summarize(records, key, keys);
    out << format_summary(rows);
  }

  for (const auto& [base, treat] : pairs) {
    out << "\n== " << treat << " vs " << base << " ==\n";
    std::map<std::pair<std::size_t, std::size_t>, const RunRecord*> b, t;
    for (const auto& r : records) {
      if (r.arm == base) b[{r.maze_id, r.run}] = &r;
      if (r.arm == treat) t[{r.maze_id, r.run}] = &r;
    }
    PairedSample fit;
    std::size_t wins = 0, losses = 0, both = 0, nb = 0, nt = 0;
    std::vector<double> gen_b, gen_t;
    for (const auto& [k, rb] : b) {
      auto it = t.find(k);
      if (it == t.end()) continue;
      const RunRecord* rt = it->second;
      fit.baseline.push_back(rb->best_fitness);
      fit.treatment.push_back(rt->best_fitness);
      nb += rb->success;
      nt += rt->success;
      if (rt->success && !rb->success) ++wins;
      if (rb->success && !rt->success) ++losses;
      if (rb->success && rt->success) ++both;
      if (rb->success_generation) gen_b.push_back(*rb->success_generation);
      if (rt->success_generation) gen_t.push_back(*rt->success_generation);
    }
    const std::size_t n = fit.baseline.size();
    out << "paired runs: " << n << "\n";
    if (n == 0) continue;
    const double rb = static_cast<double>(nb) / static_cast<double>(n);
    const double rt = static_cast<double>(nt) / static_cast<double>(n);
    out << "success rate: " << fmt("%.1f%%", 100 * rb) << " -> " << fmt("%.1f%%", 100 * rt) << " ("
        << fmt("%+.1f", 100 * (rt - rb)) << " points)\n";
    out << "success sign test: wins " << wins << ", losses " << losses << ", one-sided p "
        << fmt("%.4g", sign_test_one_sided(wins, losses)) << "\n";
    if (!gen_b.empty() && !gen_t.empty()) {
      const double mb = mean(gen_b), mt = mean(gen_t);
      out << "mean success generation: " << fmt("%.1f", mb) << " -> " << fmt("%.1f", mt);
      if (mb > 0) out << " (" << fmt("%.1f%% reduction", 100 * (mb - mt) / mb) << ")";
      out << "\n";
    }
    try {
      const auto w = wilcoxon_signed_rank(fit);
      out << "fitness Wilcoxon: W+ " << fmt("%.1f", w.w_plus) << ", W- " << fmt("%.1f", w.w_minus) << ", n "
          << w.n << ", p " << fmt("%.4g", w.p_value) << (w.exact ? " (exact)" : " (normal)") << "\n";
    } catch (const InsufficientData& e) {
      out << "fitness Wilcoxon: n/a (" << e.what() << ")\n";
    }
    try {
      out << "fitness Cohen's d: " << fmt("%.3f", cohens_d(fit)) << "\n";
    } catch (const DomainError& e) {
      out << "fitness Cohen's d: n/a (" << e.what() << ")\n";
    }
  }
  return out.str();
}

void export_results(const SuiteSpec& suite, const std::vector<RunRecord>& records,
                    const std::filesystem::path& dir) {
  if (records.empty()) throw DomainError("no records to export");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

  {
    auto out = open_out(dir / "records.csv");
    out << kRecordCsvHeader << '\n';
    for (const auto& r : records) out << record_csv_row(r) << '\n';
  }

  std::vector<std::string> arm_names;
  for (const auto& a : suite.arms) arm_names.push_back(a.config.name);
  const auto pairs = comparisons(suite);
  {
    json doc;
    json cmp = json::array();
    for (const auto& [b, t] : pairs) cmp.push_back({b, t});
    doc["suite"] = {{"seed", suite.seed},
                    {"domain", to_string(suite.domain)},
                    {"runs_per_arm", suite.runs_per_arm},
                    {"arms", arm_names},
                    {"comparisons", cmp}};
    json recs = json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r, false));
    doc["records"] = recs;
    auto out = open_out(dir / "records.json");
    out << doc.dump(1) << '\n';
  }
  {
    auto out = open_out(dir / "summary.txt");
    out << render_report(records, arm_names, pairs);
  }
  for (const auto& a : suite.arms) {
    const auto& name = a.config.name;
    auto out = open_out(dir / ("curves_" + name + ".csv"));
    out << "generation,mean_best_fitness,sd_best_fitness,runs\n";
    for (int g = 0; g < a.config.max_generations; ++g) {
      std::vector<double> v;
      for (const auto& r : records) {
        if (r.arm == name && static_cast<std::size_t>(g) < r.best_curve.size()) v.push_back(r.best_curve[g]);
      }
      out << (g + 1) << ',' << (v.empty() ? std::string() : num(mean(v))) << ','
          << (v.empty() ? std::string() : num(sample_sd(v))) << ',' << v.size() << '\n';
    }
  }
  {
    auto out = open_out(dir / "timings.csv");
    out << "arm,maze_id,run,wall_clock_seconds\n";
    for (const auto& r : records) {
      out << r.arm << ',' << r.maze_id << ',' << r.run << ',' << fmt("%.6f", r.wall_clock_seconds) << '\n';
    }
  }
}

}  // namespace ace
