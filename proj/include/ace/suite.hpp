#pragma once

// Suite orchestration: every (arm, instance, run) job, executed on a
// worker pool, streamed to disk, then exported as tables and curves.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ace/ace_loop.hpp"
#include "ace/config.hpp"

namespace ace {

struct RunJob {
  std::size_t arm_index = 0;
  std::size_t instance = 0;  // maze id; 0 for the chain domain
  std::size_t run = 0;
  std::uint64_t seed = 0;
};

// Seeds depend only on (suite seed, instance, run), so paired arms see the
// same seed and no seed depends on scheduling.
std::uint64_t run_seed(std::uint64_t suite_seed, std::size_t instance, std::size_t run);

// Arm-major, then instance, then run.
std::vector<RunJob> plan_jobs(const SuiteSpec& suite);

struct OrchestrateOptions {
  // Testing hook: stop after this many records are durable.
  std::optional<std::size_t> abort_after;
  std::function<void(const RunRecord&)> on_record;
};

struct SuiteOutcome {
  std::vector<RunRecord> records;  // in plan order
  std::vector<std::string> errors;
  bool aborted = false;
};

// Runs the suite, appending each finished record to
// <output_dir>/records.jsonl as it completes. On failure the remaining jobs
// are skipped and errors.json is written next to the partial stream.
SuiteOutcome orchestrate(const SuiteSpec& suite, const OrchestrateOptions& options = {});

// Writes records.csv, records.json, summary.txt, curves_<arm>.csv and
// timings.csv. Throws std::runtime_error when the directory is unwritable
// and DomainError when `records` is empty.
void export_results(const SuiteSpec& suite, const std::vector<RunRecord>& records,
                    const std::filesystem::path& dir);

// Arm pairs (baseline, treatment) declared by the suite.
std::vector<std::pair<std::string, std::string>> comparisons(const SuiteSpec& suite);

// Summary text for a record set: per arm, per arm and connectivity, and a
// paired comparison block for each (baseline, treatment) pair.
std::string render_report(const std::vector<RunRecord>& records, const std::vector<std::string>& arm_order,
                          const std::vector<std::pair<std::string, std::string>>& pairs);

// CSV column order, also written as the header line.
extern const char* const kRecordCsvHeader;
std::string record_csv_row(const RunRecord& r);

}  // namespace ace
