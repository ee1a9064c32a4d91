#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "agentlab/env.hpp"
#include "agentlab/runspec.hpp"

namespace agentlab {

// One JSONL line per agent-day. Keys serialize in a fixed order so reruns
// with the same seeds produce byte-identical trace files.
struct DayRecord {
  int schema_version = 0;
  std::string run_id;
  int repetition = 0;
  std::string persona;  // persona id for agent runs, policy name otherwise
  int day = 0;
  Cents price_cents = 0;
  double soc_before_kwh = 0.0;
  double soc_after_kwh = 0.0;
  Action action = Action::Hold;
  Cents reward_cents = 0;
  Cents cum_reward_cents = 0;
  bool in_blackout = false;
  std::string thoughts;
  std::string reflection;
  std::string journal;
  std::string backend_model;
  std::uint64_t seed = 0;
};

std::string day_record_to_json_line(const DayRecord& r);
DayRecord day_record_from_json_line(const std::string& line);

// Cross-field consistency: soc_after must equal soc_before - u(action), and
// blackout days carry zero reward. Throws SchemaViolation.
void validate_record(const DayRecord& r, const BatteryConfig& cfg);

struct RunManifest {
  std::string run_id;
  RunSpec spec;
  std::string code_version;
  std::string created_at;  // ISO 8601 UTC
  std::size_t record_count = 0;
  std::size_t failure_count = 0;
};

std::string manifest_to_json_string(const RunManifest& m);
RunManifest manifest_from_json_string(const std::string& text);

// Append-only JSONL sink for one run directory. Appends are serialized; the
// harness writes whole repetitions in order so files are reproducible.
class RecordSink {
 public:
  explicit RecordSink(const std::filesystem::path& run_dir, const RunSpec& spec);
  ~RecordSink();

  void append(const DayRecord& record);
  void note_failure() { ++failure_count_; }

  // Writes manifest.json; call once after the last append.
  void finalize();

  const std::filesystem::path& dir() const { return dir_; }
  std::size_t record_count() const { return record_count_; }

 private:
  std::filesystem::path dir_;
  RunSpec spec_;
  std::ofstream out_;
  std::mutex mu_;
  std::size_t record_count_ = 0;
  std::size_t failure_count_ = 0;
  bool finalized_ = false;
};

struct LoadedRun {
  RunManifest manifest;
  std::vector<DayRecord> records;
};

// Reads and validates manifest.json + records.jsonl. Bad lines throw
// CorruptLine with the 1-based line number; unknown schema versions throw
// VersionMismatch.
LoadedRun load_run(const std::filesystem::path& run_dir);

// Re-drives every record through the environment and checks soc/reward
// fields match bit-exactly. Returns the number of records checked.
std::size_t replay_run(const LoadedRun& run);

}  // namespace agentlab
