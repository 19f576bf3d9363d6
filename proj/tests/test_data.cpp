#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "arflow/data.hpp"
#include "arflow/error.hpp"
#include "arflow/metrics.hpp"
#include "arflow/sampler.hpp"

using namespace arflow;

namespace {

std::vector<InteractionPair> pairs_of(const std::vector<InteractionSample>& samples) {
  std::vector<InteractionPair> out;
  for (const auto& s : samples) out.push_back({s.actor, s.reactor});
  return out;
}

}  // namespace

TEST_CASE("scenario names") {
  for (int i = 0; i < kScenarioCount; ++i) {
    const auto s = static_cast<Scenario>(i);
    CHECK(parse_scenario(scenario_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_scenario("hug"), Error);
}

TEST_CASE("desk skeletons") {
  CHECK(desk_skeleton(5) == Skeleton::desk_default());
  const Skeleton s = desk_skeleton(8);
  CHECK(s.joint_count() == 8);
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(desk_skeleton(4), Error);
}

TEST_CASE("scenario config validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  c.frames = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ScenarioConfig{};
  c.contact_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ScenarioConfig{};
  c.scenarios.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(generate_dataset(ScenarioConfig{}, -1), Error);
}

TEST_CASE("dataset generation is deterministic per seed and index") {
  ScenarioConfig c;
  c.seed = 3;
  const auto a = generate_dataset(c, 12);
  REQUIRE(a.size() == 12);
  CHECK(generate_dataset(c, 12) == a);
  CHECK(generate_sample(c, 7) == a[7]);
  CHECK(a[7].seed_used == derive_seed(3, 7));
  for (const auto& s : a) {
    CHECK(s.actor.rows() == 16);
    CHECK(s.actor.cols() == c.skeleton.frame_dim());
    CHECK(s.reactor.allFinite());
    CHECK(s.label >= 0);
    CHECK(s.label < kScenarioCount);
  }
  c.seed = 4;
  const auto b = generate_dataset(c, 12);
  int same = 0;
  for (int i = 0; i < 12; ++i) same += b[i] == a[i];
  CHECK(same == 0);
}

TEST_CASE("labels follow the configured scenarios") {
  ScenarioConfig c;
  c.scenarios = {Scenario::kKickDodge};
  for (const auto& s : generate_dataset(c, 10)) CHECK(s.label == static_cast<int>(Scenario::kKickDodge));
}

TEST_CASE("contact fraction controls ground-truth penetration") {
  ScenarioConfig c;
  c.seed = 9;
  c.contact_fraction = 0.0;
  const auto apart = generate_dataset(c, 60);
  for (int i = 0; i < 60; ++i) CHECK(!sample_in_contact(c, i));
  const PenetrationStats none = penetration_stats(pairs_of(apart), c.skeleton);
  CHECK(none.f_pene == 0);
  CHECK(none.iv == 0.0);

  c.contact_fraction = 1.0;
  c.scenarios = {Scenario::kPushRetreat};
  const PenetrationStats some = penetration_stats(pairs_of(generate_dataset(c, 60)), c.skeleton);
  CHECK(some.f_pene > 0);
  CHECK(some.iv > 0.0);
}

TEST_CASE("push_retreat: the reactor moves away from the actor") {
  ScenarioConfig c;
  c.seed = 10;
  c.scenarios = {Scenario::kPushRetreat};
  for (double fraction : {0.0, 1.0}) {
    c.contact_fraction = fraction;
    for (const auto& s : generate_dataset(c, 20)) {
      const int last = static_cast<int>(s.reactor.rows()) - 1;
      const Eigen::Vector3d displacement =
          root_position(s.reactor, c.skeleton, last) - root_position(s.reactor, c.skeleton, 0);
      const Eigen::Vector3d toward_actor =
          root_position(s.actor, c.skeleton, 0) - root_position(s.reactor, c.skeleton, 0);
      CHECK(displacement.dot(toward_actor) < 0.0);
    }
  }
}

TEST_CASE("split sends every tenth sample to test") {
  ScenarioConfig c;
  const auto all = generate_dataset(c, 40);
  const DatasetSplit s = split_dataset(all);
  CHECK(s.train.size() == 36);
  REQUIRE(s.test.size() == 4);
  CHECK(s.test[0] == all[9]);
  CHECK(s.test[3] == all[39]);
  CHECK(s.train[9] == all[10]);
}

TEST_CASE("motion files round-trip bit-exactly") {
  ScenarioConfig c;
  c.skeleton = desk_skeleton(6);
  c.frames = 5;
  MotionFile f{c.skeleton, 30.0, generate_dataset(c, 4)};
  const std::string text = serialize_motions(f);
  const MotionFile back = parse_motions(text);
  CHECK(back.skeleton == f.skeleton);
  CHECK(back.fps == 30.0);
  REQUIRE(back.samples.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(back.samples[i] == f.samples[i]);
  CHECK(serialize_motions(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "arflow_test_motions.jsonl";
  save_motions(path.string(), f);
  CHECK(load_motions(path.string()).samples == f.samples);
  std::filesystem::remove(path);
}

TEST_CASE("motion file errors") {
  ScenarioConfig c;
  c.frames = 3;
  const MotionFile f{c.skeleton, 20.0, generate_dataset(c, 2)};
  const std::string text = serialize_motions(f);
  const std::string truncated = text.substr(0, text.size() - 40);
  try {
    parse_motions(truncated);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_motions("{\"version\": 1}\n"), Error);
  CHECK(parse_motions("").samples.empty());
  try {
    load_motions("/nonexistent/arflow/motions.jsonl");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}
