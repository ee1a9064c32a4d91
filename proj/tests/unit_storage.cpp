#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "agentlab/storage.hpp"
#include "agentlab/version.hpp"
#include "util.hpp"

using namespace agentlab;

namespace {

RunSpec small_spec() {
  RunSpec spec;
  spec.run_id = "unit_run";
  spec.scenario = Scenario::fixed(PricePath{500, 1000, 500});
  spec.policy_kind = PolicyKind::Greedy;
  spec.repetitions = 2;
  spec.cfg.horizon_days = 3;
  return spec;
}

DayRecord sample_record() {
  DayRecord r;
  r.schema_version = kSchemaVersion;
  r.run_id = "unit_run";
  r.repetition = 0;
  r.persona = "thinker";
  r.day = 1;
  r.price_cents = 500;
  r.soc_before_kwh = 5.0;
  r.soc_after_kwh = 6.0;
  r.action = Action::Charge;
  r.reward_cents = -500;
  r.cum_reward_cents = -500;
  r.in_blackout = false;
  r.thoughts = "prices look cheap — buy";
  r.reflection = "no regrets";
  r.journal = "day one: bought";
  r.backend_model = "mock:greedy";
  r.seed = 42;
  return r;
}

}  // namespace

TEST_CASE("day records survive a JSON line round trip") {
  DayRecord r = sample_record();
  r.thoughts = "unicode: émotions, 読書, smørrebrød";
  const std::string line = day_record_to_json_line(r);
  CHECK(line.rfind("{\"schema_version\":", 0) == 0);  // fixed leading key
  DayRecord back = day_record_from_json_line(line);
  CHECK_EQ(back.run_id, r.run_id);
  CHECK_EQ(back.repetition, r.repetition);
  CHECK_EQ(back.persona, r.persona);
  CHECK_EQ(back.day, r.day);
  CHECK_EQ(back.price_cents, r.price_cents);
  CHECK_EQ(back.soc_before_kwh, r.soc_before_kwh);
  CHECK_EQ(back.soc_after_kwh, r.soc_after_kwh);
  CHECK_EQ(back.action, r.action);
  CHECK_EQ(back.reward_cents, r.reward_cents);
  CHECK_EQ(back.cum_reward_cents, r.cum_reward_cents);
  CHECK_EQ(back.in_blackout, r.in_blackout);
  CHECK_EQ(back.thoughts, r.thoughts);
  CHECK_EQ(back.reflection, r.reflection);
  CHECK_EQ(back.journal, r.journal);
  CHECK_EQ(back.backend_model, r.backend_model);
  CHECK_EQ(back.seed, r.seed);

  // serialization is stable: same record, same bytes
  CHECK_EQ(line, day_record_to_json_line(back));
}

TEST_CASE("record parsing rejects other schema versions and junk") {
  DayRecord r = sample_record();
  r.schema_version = kSchemaVersion + 1;
  CHECK_THROWS_AS(day_record_from_json_line(day_record_to_json_line(r)), VersionMismatch);
  CHECK_THROWS_AS(day_record_from_json_line("not json at all"), ParseError);
  CHECK_THROWS_AS(day_record_from_json_line("{\"schema_version\": 1}"), ParseError);
}

TEST_CASE("record validation enforces the energy and money arithmetic") {
  BatteryConfig cfg;
  SUBCASE("consistent records pass") {
    CHECK_NOTHROW(validate_record(sample_record(), cfg));
  }
  SUBCASE("soc jump that does not match the action") {
    DayRecord r = sample_record();
    r.soc_after_kwh = 7.0;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("soc outside the battery") {
    DayRecord r = sample_record();
    r.soc_before_kwh = 10.0;
    r.soc_after_kwh = 11.0;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("reward that does not match price times units") {
    DayRecord r = sample_record();
    r.reward_cents = -499;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("grid trade on a blackout day") {
    DayRecord r = sample_record();
    r.in_blackout = true;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("money moved during a blackout") {
    DayRecord r = sample_record();
    r.in_blackout = true;
    r.action = Action::Hold;
    r.soc_after_kwh = 5.0;
    r.reward_cents = 1;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("household dump outside a blackout") {
    DayRecord r = sample_record();
    r.action = Action::BlackoutDischargeAll;
    r.soc_after_kwh = 0.0;
    r.reward_cents = 0;
    r.cum_reward_cents = 0;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("day outside the horizon") {
    DayRecord r = sample_record();
    r.day = 21;
    CHECK_THROWS_AS(validate_record(r, cfg), SchemaViolation);
  }
  SUBCASE("a valid blackout dump passes") {
    DayRecord r = sample_record();
    r.in_blackout = true;
    r.action = Action::BlackoutDischargeAll;
    r.soc_before_kwh = 5.0;
    r.soc_after_kwh = 0.0;
    r.reward_cents = 0;
    CHECK_NOTHROW(validate_record(r, cfg));
  }
}

TEST_CASE("run specs round-trip through JSON in both scenario shapes") {
  RunSpec spec = small_spec();
  spec.policy_kind = PolicyKind::Agent;
  spec.persona_id = "feeler";
  spec.backend_spec = "mock:shift";
  spec.intervention.blackout_days = {2};
  spec.base_seed = 77;
  spec.workers = 2;

  RunSpec back = runspec_from_json_string(runspec_to_json_string(spec));
  CHECK_EQ(back.run_id, spec.run_id);
  CHECK_EQ(back.scenario.kind, Scenario::Kind::FixedPath);
  CHECK_EQ(back.scenario.fixed_path, spec.scenario.fixed_path);
  CHECK_EQ(back.policy_kind, PolicyKind::Agent);
  CHECK_EQ(back.persona_id, "feeler");
  CHECK_EQ(back.backend_spec, "mock:shift");
  CHECK_EQ(back.repetitions, 2);
  CHECK_EQ(back.intervention.blackout_days, std::set<int>{2});
  CHECK_EQ(back.base_seed, 77);
  CHECK_EQ(back.cfg.horizon_days, 3);
  CHECK_EQ(back.workers, 2);

  RunSpec sampled = small_spec();
  sampled.scenario = Scenario::sampled(1234);
  RunSpec sback = runspec_from_json_string(runspec_to_json_string(sampled));
  CHECK_EQ(sback.scenario.kind, Scenario::Kind::Sampled);
  CHECK_EQ(sback.scenario.path_seed, 1234);
}

TEST_CASE("manifests round-trip and catch schema drift") {
  RunManifest m;
  m.run_id = "unit_run";
  m.spec = small_spec();
  m.code_version = kCodeVersion;
  m.created_at = "2026-01-01T00:00:00Z";
  m.record_count = 6;
  m.failure_count = 1;

  RunManifest back = manifest_from_json_string(manifest_to_json_string(m));
  CHECK_EQ(back.run_id, m.run_id);
  CHECK_EQ(back.code_version, kCodeVersion);
  CHECK_EQ(back.created_at, m.created_at);
  CHECK_EQ(back.record_count, 6);
  CHECK_EQ(back.failure_count, 1);
  CHECK_EQ(back.spec.run_id, "unit_run");

  std::string text = manifest_to_json_string(m);
  const std::string needle = "\"schema_version\": 1";
  auto pos = text.find(needle);
  REQUIRE_NE(pos, std::string::npos);
  text.replace(pos, needle.size(), "\"schema_version\": 2");
  CHECK_THROWS_AS(manifest_from_json_string(text), VersionMismatch);
}

TEST_CASE("a sink writes a run directory that loads back verbatim") {
  testutil::TempDir tmp("sink");
  RunSpec spec = small_spec();

  std::vector<DayRecord> written;
  {
    RecordSink sink(tmp / "run", spec);
    // rep 0: charge low, discharge high, hold
    DayRecord r = sample_record();
    sink.append(r);
    written.push_back(r);

    r.day = 2;
    r.price_cents = 1000;
    r.soc_before_kwh = 6.0;
    r.soc_after_kwh = 5.0;
    r.action = Action::Discharge;
    r.reward_cents = 1000;
    r.cum_reward_cents = 500;
    sink.append(r);
    written.push_back(r);

    r.day = 3;
    r.price_cents = 500;
    r.soc_before_kwh = 5.0;
    r.soc_after_kwh = 5.0;
    r.action = Action::Hold;
    r.reward_cents = 0;
    sink.append(r);
    written.push_back(r);

    sink.note_failure();
    CHECK_EQ(sink.record_count(), 3);
    sink.finalize();
  }

  LoadedRun run = load_run(tmp / "run");
  CHECK_EQ(run.manifest.run_id, "unit_run");
  CHECK_EQ(run.manifest.record_count, 3);
  CHECK_EQ(run.manifest.failure_count, 1);
  CHECK_EQ(run.manifest.code_version, kCodeVersion);
  CHECK_FALSE(run.manifest.created_at.empty());
  REQUIRE_EQ(run.records.size(), 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK_EQ(day_record_to_json_line(run.records[i]), day_record_to_json_line(written[i]));

  CHECK_EQ(replay_run(run), 3);
}

TEST_CASE("the sink refuses records that fail validation") {
  testutil::TempDir tmp("sink_bad");
  RecordSink sink(tmp / "run", small_spec());
  DayRecord r = sample_record();
  r.soc_after_kwh = 9.0;
  CHECK_THROWS_AS(sink.append(r), SchemaViolation);
}

TEST_CASE("corrupted trace lines are reported with their line number") {
  testutil::TempDir tmp("corrupt");
  RunSpec spec = small_spec();
  {
    RecordSink sink(tmp / "run", spec);
    sink.append(sample_record());
    sink.finalize();
  }

  SUBCASE("garbage appended after the last record") {
    std::string content = testutil::read_file(tmp / "run" / "records.jsonl");
    testutil::write_file(tmp / "run" / "records.jsonl", content + "{broken\n");
    try {
      load_run(tmp / "run");
      FAIL("expected CorruptLine");
    } catch (const CorruptLine& e) {
      CHECK_EQ(e.line_no, 2);
    }
  }

  SUBCASE("a record that contradicts the battery physics") {
    DayRecord bad = sample_record();
    bad.soc_after_kwh = 4.0;  // says charge, went down
    std::string content = testutil::read_file(tmp / "run" / "records.jsonl");
    testutil::write_file(tmp / "run" / "records.jsonl",
                         day_record_to_json_line(bad) + "\n" + content);
    try {
      load_run(tmp / "run");
      FAIL("expected CorruptLine");
    } catch (const CorruptLine& e) {
      CHECK_EQ(e.line_no, 1);
    }
  }

  SUBCASE("a count that disagrees with the manifest") {
    testutil::write_file(tmp / "run" / "records.jsonl", "");
    CHECK_THROWS_AS(load_run(tmp / "run"), CorruptLine);
  }

  SUBCASE("a record from a different schema era") {
    std::string line = day_record_to_json_line(sample_record());
    const std::string needle = "{\"schema_version\":1";
    REQUIRE(line.rfind(needle, 0) == 0);
    line.replace(0, needle.size(), "{\"schema_version\":9");
    std::string content = testutil::read_file(tmp / "run" / "records.jsonl");
    testutil::write_file(tmp / "run" / "records.jsonl", line + "\n" + content);
    CHECK_THROWS_AS(load_run(tmp / "run"), VersionMismatch);
  }

  SUBCASE("missing files") {
    CHECK_THROWS_AS(load_run(tmp / "nowhere"), IoError);
  }
}

TEST_CASE("replay catches cross-record tampering that per-record checks miss") {
  LoadedRun run;
  run.manifest.run_id = "fabricated";
  run.manifest.spec = small_spec();
  run.manifest.record_count = 2;

  DayRecord d1 = sample_record();          // day 1: 5 -> 6 (charge at 500)
  DayRecord d2 = sample_record();
  d2.day = 2;
  d2.price_cents = 1000;
  d2.soc_before_kwh = 7.0;                 // should be 6.0 after day 1
  d2.soc_after_kwh = 6.0;
  d2.action = Action::Discharge;
  d2.reward_cents = 1000;
  d2.cum_reward_cents = 500;
  CHECK_NOTHROW(validate_record(d2, run.manifest.spec.cfg));  // self-consistent alone

  run.records = {d1, d2};
  CHECK_THROWS_AS(replay_run(run), SchemaViolation);

  run.records[1].soc_before_kwh = 6.0;
  run.records[1].soc_after_kwh = 5.0;
  CHECK_EQ(replay_run(run), 2);
}
