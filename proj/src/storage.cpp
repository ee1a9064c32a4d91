#include "agentlab/storage.hpp"

#include <cmath>
#include <ctime>
#include <map>
#include <sstream>

#include "agentlab/version.hpp"
#include "json.hpp"

namespace agentlab {

namespace {

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

WattHours kwh_to_wh(double kwh) { return static_cast<WattHours>(std::llround(kwh * 1000.0)); }

}  // namespace

std::string day_record_to_json_line(const DayRecord& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = r.schema_version;
  j["run_id"] = r.run_id;
  j["repetition"] = r.repetition;
  j["persona"] = r.persona;
  j["day"] = r.day;
  j["price_cents"] = r.price_cents;
  j["soc_before_kwh"] = r.soc_before_kwh;
  j["soc_after_kwh"] = r.soc_after_kwh;
  j["action"] = to_string(r.action);
  j["reward_cents"] = r.reward_cents;
  j["cum_reward_cents"] = r.cum_reward_cents;
  j["in_blackout"] = r.in_blackout;
  j["thoughts"] = r.thoughts;
  j["reflection"] = r.reflection;
  j["journal"] = r.journal;
  j["backend_model"] = r.backend_model;
  j["seed"] = r.seed;
  return j.dump();
}

DayRecord day_record_from_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad day record: ") + e.what());
  }
  DayRecord r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion)
      throw VersionMismatch("day record schema_version " + std::to_string(r.schema_version) +
                            ", expected " + std::to_string(kSchemaVersion));
    r.run_id = j.at("run_id").get<std::string>();
    r.repetition = j.at("repetition").get<int>();
    r.persona = j.at("persona").get<std::string>();
    r.day = j.at("day").get<int>();
    r.price_cents = j.at("price_cents").get<Cents>();
    r.soc_before_kwh = j.at("soc_before_kwh").get<double>();
    r.soc_after_kwh = j.at("soc_after_kwh").get<double>();
    r.action = action_from_string(j.at("action").get<std::string>());
    r.reward_cents = j.at("reward_cents").get<Cents>();
    r.cum_reward_cents = j.at("cum_reward_cents").get<Cents>();
    r.in_blackout = j.at("in_blackout").get<bool>();
    r.thoughts = j.at("thoughts").get<std::string>();
    r.reflection = j.at("reflection").get<std::string>();
    r.journal = j.at("journal").get<std::string>();
    r.backend_model = j.at("backend_model").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("day record missing field: ") + e.what());
  }
  return r;
}

void validate_record(const DayRecord& r, const BatteryConfig& cfg) {
  const WattHours before = kwh_to_wh(r.soc_before_kwh);
  const WattHours after = kwh_to_wh(r.soc_after_kwh);

  WattHours u = 0;
  switch (r.action) {
    case Action::Charge: u = -cfg.unit_wh; break;
    case Action::Discharge: u = cfg.unit_wh; break;
    case Action::Hold: u = 0; break;
    case Action::BlackoutDischargeAll: u = before - cfg.floor_wh; break;
  }
  if (after != before - u)
    throw SchemaViolation("soc_after != soc_before - u for action " + to_string(r.action));
  if (before < cfg.floor_wh || before > cfg.capacity_wh || after < cfg.floor_wh ||
      after > cfg.capacity_wh)
    throw SchemaViolation("soc outside [floor, capacity]");
  if (r.day < 1 || r.day > cfg.horizon_days) throw SchemaViolation("day outside horizon");

  if (r.in_blackout) {
    if (r.action == Action::Charge || r.action == Action::Discharge)
      throw SchemaViolation("grid trade recorded on a blackout day");
    if (r.reward_cents != 0) throw SchemaViolation("nonzero reward on a blackout day");
  } else {
    if (r.action == Action::BlackoutDischargeAll)
      throw SchemaViolation("blackout discharge recorded on a normal day");
    if (r.reward_cents != r.price_cents * static_cast<Cents>(u) / 1000)
      throw SchemaViolation("reward != price * u");
  }
}

std::string manifest_to_json_string(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["run_id"] = m.run_id;
  j["spec"] = nlohmann::ordered_json::parse(runspec_to_json_string(m.spec));
  j["code_version"] = m.code_version;
  j["created_at"] = m.created_at;
  j["record_count"] = m.record_count;
  j["failure_count"] = m.failure_count;
  return j.dump(2);
}

RunManifest manifest_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
  if (j.value("schema_version", -1) != kSchemaVersion)
    throw VersionMismatch("manifest schema_version mismatch");
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.spec = runspec_from_json_string(j.at("spec").dump());
  m.code_version = j.value("code_version", "");
  m.created_at = j.value("created_at", "");
  m.record_count = j.at("record_count").get<std::size_t>();
  m.failure_count = j.at("failure_count").get<std::size_t>();
  return m;
}

RecordSink::RecordSink(const std::filesystem::path& run_dir, const RunSpec& spec)
    : dir_(run_dir), spec_(spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create run directory " + dir_.string() + ": " + ec.message());
  out_.open(dir_ / "records.jsonl", std::ios::out | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + (dir_ / "records.jsonl").string());
}

RecordSink::~RecordSink() {
  if (!finalized_) {
    try {
      finalize();
    } catch (...) {
      // destructor must not throw; an unfinalized sink loses only the manifest
    }
  }
}

void RecordSink::append(const DayRecord& record) {
  validate_record(record, spec_.cfg);
  const std::string line = day_record_to_json_line(record);
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line << '\n';
  if (!out_) throw IoError("write failed in " + dir_.string());
  ++record_count_;
}

void RecordSink::finalize() {
  std::lock_guard<std::mutex> lock(mu_);
  if (finalized_) return;
  out_.flush();
  out_.close();
  RunManifest m;
  m.run_id = spec_.run_id;
  m.spec = spec_;
  m.code_version = kCodeVersion;
  m.created_at = iso8601_utc_now();
  m.record_count = record_count_;
  m.failure_count = failure_count_;
  std::ofstream mf(dir_ / "manifest.json", std::ios::out | std::ios::trunc);
  if (!mf) throw IoError("cannot open " + (dir_ / "manifest.json").string());
  mf << manifest_to_json_string(m) << '\n';
  finalized_ = true;
}

LoadedRun load_run(const std::filesystem::path& run_dir) {
  LoadedRun run;
  {
    std::ifstream mf(run_dir / "manifest.json");
    if (!mf) throw IoError("missing manifest.json in " + run_dir.string());
    std::stringstream ss;
    ss << mf.rdbuf();
    run.manifest = manifest_from_json_string(ss.str());
  }
  std::ifstream rf(run_dir / "records.jsonl");
  if (!rf) throw IoError("missing records.jsonl in " + run_dir.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(rf, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      DayRecord r = day_record_from_json_line(line);
      validate_record(r, run.manifest.spec.cfg);
      run.records.push_back(std::move(r));
    } catch (const VersionMismatch&) {
      throw;
    } catch (const Error& e) {
      throw CorruptLine(line_no, "records.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (run.records.size() != run.manifest.record_count)
    throw CorruptLine(line_no, "record count " + std::to_string(run.records.size()) +
                                   " does not match manifest " +
                                   std::to_string(run.manifest.record_count));
  return run;
}

std::size_t replay_run(const LoadedRun& run) {
  const BatteryConfig& cfg = run.manifest.spec.cfg;
  const InterventionSchedule& schedule = run.manifest.spec.intervention;

  std::map<int, std::vector<const DayRecord*>> by_rep;
  for (const auto& r : run.records) by_rep[r.repetition].push_back(&r);

  std::size_t checked = 0;
  for (auto& [rep, records] : by_rep) {
    EnvState state = initial_state(cfg, schedule);
    for (const DayRecord* r : records) {
      if (r->day != state.day)
        throw SchemaViolation("repetition " + std::to_string(rep) + " day sequence broken at day " +
                              std::to_string(r->day));
      if (r->soc_before_kwh != state.soc_wh / 1000.0 || r->in_blackout != state.in_blackout)
        throw SchemaViolation("replay mismatch entering day " + std::to_string(r->day));
      const StepOutcome out = step(state, r->action, r->price_cents, cfg, schedule);
      if (out.reward_cents != r->reward_cents ||
          out.next_state.cum_reward_cents != r->cum_reward_cents ||
          out.next_state.soc_wh / 1000.0 != r->soc_after_kwh)
        throw SchemaViolation("replay mismatch on day " + std::to_string(r->day));
      state = out.next_state;
      ++checked;
    }
  }
  return checked;
}

}  // namespace agentlab
