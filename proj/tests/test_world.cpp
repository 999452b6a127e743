#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rma/world.hpp"

using namespace rma;

namespace {

SceneDescriptor demo_scene() {
  SceneDescriptor scene;
  scene.containers.push_back({"drawer_top", EntityKind::drawer, Openness::closed});
  scene.containers.push_back({"basket", EntityKind::basket, Openness::open});
  scene.objects.push_back({"butter", EntityKind::item, "drawer_top"});
  scene.objects.push_back({"mug", EntityKind::mug, ""});
  return scene;
}

WorldState must_apply(const WorldState& s, const WorldEvent& e) {
  ApplyResult r = apply_event(s, e);
  REQUIRE(std::holds_alternative<WorldState>(r));
  return std::get<WorldState>(r);
}

RuleViolation::Code must_fail(const WorldState& s, const WorldEvent& e) {
  ApplyResult r = apply_event(s, e);
  REQUIRE(std::holds_alternative<RuleViolation>(r));
  return std::get<RuleViolation>(r).code;
}

}  // namespace

TEST_CASE("init_scene declares entities and rejects duplicates") {
  WorldState s = init_scene(demo_scene(), 0);
  CHECK(s.has_entity("drawer_top"));
  CHECK(s.has_entity("butter"));
  CHECK(s.objects.at("butter") == Location::in("drawer_top"));
  CHECK(s.objects.at("mug") == Location::table());
  CHECK(s.containers.at("drawer_top").occludes);
  CHECK_FALSE(s.containers.at("basket").occludes);

  SceneDescriptor dup = demo_scene();
  dup.objects.push_back({"butter", EntityKind::item, ""});
  CHECK_THROWS_AS(init_scene(dup, 0), ConfigError);

  SceneDescriptor bad = demo_scene();
  bad.objects.push_back({"jam", EntityKind::item, "nonexistent"});
  CHECK_THROWS_AS(init_scene(bad, 0), ConfigError);

  SceneDescriptor nonc;
  nonc.containers.push_back({"b", EntityKind::bottle, Openness::open});
  CHECK_THROWS_AS(init_scene(nonc, 0), ConfigError);
}

TEST_CASE("open and close toggle state and reject redundant transitions") {
  WorldState s = init_scene(demo_scene(), 0);
  CHECK(must_fail(s, WorldEvent::close("drawer_top")) == RuleViolation::Code::already_closed);
  s = must_apply(s, WorldEvent::open("drawer_top"));
  CHECK(s.containers.at("drawer_top").openness == Openness::open);
  CHECK(s.cue.kind == CueKind::opened);
  CHECK(s.cue.a == "drawer_top");
  CHECK(s.inspection_log.size() == 1);
  CHECK(must_fail(s, WorldEvent::open("drawer_top")) == RuleViolation::Code::already_open);
  s = must_apply(s, WorldEvent::close("drawer_top"));
  CHECK(s.containers.at("drawer_top").openness == Openness::closed);
  CHECK(must_fail(s, WorldEvent::open("nope")) == RuleViolation::Code::unknown_entity);
}

TEST_CASE("grasp respects occlusion and gripper occupancy") {
  WorldState s = init_scene(demo_scene(), 0);
  // butter sits inside a closed drawer: unreachable
  CHECK(must_fail(s, WorldEvent::grasp("butter")) == RuleViolation::Code::occluded_target);
  s = must_apply(s, WorldEvent::open("drawer_top"));
  s = must_apply(s, WorldEvent::grasp("butter"));
  CHECK(s.gripper.held == "butter");
  CHECK(s.gripper.g == 1);
  CHECK(s.objects.at("butter") == Location::gripper());
  CHECK(must_fail(s, WorldEvent::grasp("mug")) == RuleViolation::Code::gripper_occupied);
}

TEST_CASE("grasp from a non-occluding closed container is allowed") {
  SceneDescriptor scene;
  scene.containers.push_back({"basket", EntityKind::basket, Openness::closed});
  scene.objects.push_back({"apple", EntityKind::item, "basket"});
  WorldState s = init_scene(scene, 0);
  s = must_apply(s, WorldEvent::grasp("apple"));
  CHECK(s.gripper.held == "apple");
}

TEST_CASE("release into containers and onto the table") {
  WorldState s = init_scene(demo_scene(), 0);
  CHECK(must_fail(s, WorldEvent::release_table()) == RuleViolation::Code::gripper_empty);
  s = must_apply(s, WorldEvent::open("drawer_top"));
  s = must_apply(s, WorldEvent::grasp("butter"));
  CHECK(must_fail(s, WorldEvent::release_into("nope")) == RuleViolation::Code::unknown_entity);
  WorldState closed = must_apply(s, WorldEvent::close("drawer_top"));
  CHECK(must_fail(closed, WorldEvent::release_into("drawer_top")) ==
        RuleViolation::Code::closed_container);
  s = must_apply(s, WorldEvent::release_into("basket"));
  CHECK(s.objects.at("butter") == Location::in("basket"));
  CHECK_FALSE(s.gripper.held.has_value());
  CHECK(s.gripper.g == 0);
  CHECK(s.placement_log.size() == 1);
  CHECK(std::get<1>(s.placement_log[0]) == "basket");

  s = must_apply(s, WorldEvent::grasp("mug"));
  s = must_apply(s, WorldEvent::release_table());
  CHECK(s.objects.at("mug") == Location::table());
  CHECK(std::get<1>(s.placement_log[1]) == "");
}

TEST_CASE("pour requires the held source and logs each repetition") {
  SceneDescriptor scene;
  scene.containers.push_back({"mug", EntityKind::mug, Openness::open});
  scene.objects.push_back({"kettle", EntityKind::bottle, ""});
  WorldState s = init_scene(scene, 0);
  CHECK(must_fail(s, WorldEvent::pour("kettle", "mug")) == RuleViolation::Code::gripper_empty);
  s = must_apply(s, WorldEvent::grasp("kettle"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::pour("kettle", "mug"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::pour("kettle", "mug"));
  CHECK(s.pour_count("kettle", "mug") == 2);
  CHECK(s.pour_count("kettle", "sink") == 0);
  CHECK(s.cue.kind == CueKind::poured);
  CHECK(s.cue.a == "kettle");
  CHECK(s.cue.b == "mug");
  CHECK(must_fail(s, WorldEvent::pour("kettle", "nope")) == RuleViolation::Code::unknown_entity);
}

TEST_CASE("occlusion semantics: hidden objects persist in state, vanish from observation") {
  WorldState s = init_scene(demo_scene(), 0);
  Observation obs = observe(s);
  auto visible = [&](const std::string& name) {
    for (const auto& [n, loc] : obs.visible_objects)
      if (n == name) return true;
    return false;
  };
  CHECK_FALSE(visible("butter"));  // closed drawer hides it
  CHECK(visible("mug"));
  CHECK(s.objects.count("butter") == 1);  // state still tracks it

  s = must_apply(s, WorldEvent::open("drawer_top"));
  obs = observe(s);
  bool butter_seen = false;
  for (const auto& [n, loc] : obs.visible_objects)
    if (n == "butter") butter_seen = true;
  CHECK(butter_seen);
}

TEST_CASE("held object is reported via the gripper, not the visible list") {
  WorldState s = init_scene(demo_scene(), 0);
  s = must_apply(s, WorldEvent::grasp("mug"));
  Observation obs = observe(s);
  CHECK(obs.held_visible == "mug");
  CHECK(obs.g == 1);
  for (const auto& [n, loc] : obs.visible_objects) CHECK(n != "mug");
}

TEST_CASE("cue transience helpers") {
  WorldState s = init_scene(demo_scene(), 0);
  s = must_apply(s, WorldEvent::open("drawer_top"));
  CHECK(s.cue.kind == CueKind::opened);
  int step_before = s.step;
  s = advance_step(s);
  CHECK(s.step == step_before + 1);
  CHECK(s.cue.kind == CueKind::opened);  // advancing time alone keeps the cue
  s = clear_cue(s);
  CHECK(s.cue.kind == CueKind::none);
  CHECK(observe(s).cue.kind == CueKind::none);
}

TEST_CASE("feature vector has the documented fixed layout") {
  WorldState s = init_scene(demo_scene(), 0);
  Observation obs = observe(s);
  REQUIRE(static_cast<int>(obs.feature.size()) == kFeatureDim);
  // sorted entity inventory: containers {basket, drawer_top}, objects {butter, mug}
  CHECK(obs.feature[0] == 0.0);            // butter hidden
  CHECK(obs.feature[1] == doctest::Approx(0.25));  // mug on table
  CHECK(obs.feature[12] == 1.0);           // basket open
  CHECK(obs.feature[13] == 0.0);           // drawer_top closed
  CHECK(obs.feature[20] == 0.0);

  s = must_apply(s, WorldEvent::grasp("mug"));
  obs = observe(s);
  CHECK(obs.feature[20] == 1.0);
  CHECK(obs.feature[21] == doctest::Approx(2.0 / 16.0));  // mug is object index 1
  CHECK(obs.feature[24] == 1.0);                          // grasped cue slot
  CHECK(obs.feature[27] == doctest::Approx(2.0 / 16.0));
}

TEST_CASE("check_predicate covers every predicate kind") {
  WorldState s = init_scene(demo_scene(), 0);
  auto pred = [](StagePredicate::Kind k, std::vector<std::string> e, int c = 0) {
    return StagePredicate{k, std::move(e), c};
  };
  CHECK(check_predicate(s, pred(StagePredicate::Kind::in_container, {"butter", "drawer_top"})));
  CHECK_FALSE(check_predicate(s, pred(StagePredicate::Kind::on_table, {"butter"})));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::on_table, {"mug"})));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::gripper_empty, {})));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::container_closed, {"drawer_top"})));
  CHECK_FALSE(check_predicate(s, pred(StagePredicate::Kind::container_open, {"drawer_top"})));
  CHECK_FALSE(check_predicate(s, pred(StagePredicate::Kind::visited_all, {"drawer_top"})));

  s = must_apply(s, WorldEvent::open("drawer_top"));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::visited_all, {"drawer_top"})));
  CHECK_FALSE(
      check_predicate(s, pred(StagePredicate::Kind::visited_all, {"drawer_top", "basket"})));

  // placement ordering: mug placed first, then butter
  s = must_apply(s, WorldEvent::grasp("mug"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::release_into("basket"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::grasp("butter"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::release_into("basket"));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::placed_before, {"mug", "butter"})));
  CHECK_FALSE(check_predicate(s, pred(StagePredicate::Kind::placed_before, {"butter", "mug"})));
  CHECK(check_predicate(s, pred(StagePredicate::Kind::container_count_eq, {"basket"}, 2)));
  CHECK_FALSE(check_predicate(s, pred(StagePredicate::Kind::container_count_eq, {"basket"}, 1)));

  CHECK_THROWS_AS(
      check_predicate(s, pred(StagePredicate::Kind::container_open, {"ghost"})), ConfigError);
}

TEST_CASE("placed_after_pours counts against the k-th pour") {
  SceneDescriptor scene;
  scene.containers.push_back({"mug", EntityKind::mug, Openness::open});
  scene.containers.push_back({"plate", EntityKind::plate, Openness::open});
  scene.objects.push_back({"kettle", EntityKind::bottle, ""});
  scene.objects.push_back({"spoon", EntityKind::item, ""});
  WorldState s = init_scene(scene, 0);
  s = must_apply(s, WorldEvent::grasp("kettle"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::pour("kettle", "mug"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::pour("kettle", "mug"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::release_table());
  s = advance_step(s);
  s = must_apply(s, WorldEvent::grasp("spoon"));
  s = advance_step(s);
  s = must_apply(s, WorldEvent::release_into("plate"));
  StagePredicate after2{StagePredicate::Kind::placed_after_pours, {"spoon", "kettle", "mug"}, 2};
  CHECK(check_predicate(s, after2));
  StagePredicate after3 = after2;
  after3.count = 3;
  CHECK_FALSE(check_predicate(s, after3));  // third pour never happened
}

TEST_CASE("string conversions round-trip") {
  for (EntityKind k : {EntityKind::item, EntityKind::drawer, EntityKind::microwave,
                       EntityKind::basket, EntityKind::plate, EntityKind::cabinet,
                       EntityKind::mug, EntityKind::frypan, EntityKind::drainer,
                       EntityKind::bottle})
    CHECK(entity_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(entity_kind_from_string("gizmo"), ConfigError);
  CHECK(to_string(WorldEvent::pour("a", "b")) == "pour(a,b)");
}
