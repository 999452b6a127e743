#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace rma {

// Thrown for malformed scenes, suites, configs, and undeclared entity references.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class EntityKind {
  item,
  drawer,
  microwave,
  basket,
  plate,
  cabinet,
  mug,
  frypan,
  drainer,
  bottle,
};

const char* to_string(EntityKind k);
EntityKind entity_kind_from_string(const std::string& s);

// Drawers, microwaves, and cabinets hide their contents when closed.
bool occludes_when_closed(EntityKind k);
bool is_container_kind(EntityKind k);

enum class Openness { open, closed };

struct SceneDescriptor {
  struct ObjectDecl {
    std::string name;
    EntityKind kind = EntityKind::item;
    std::string initial_container;  // empty = on table
  };
  struct ContainerDecl {
    std::string name;
    EntityKind kind = EntityKind::drawer;
    Openness initial = Openness::closed;
  };
  std::vector<ObjectDecl> objects;
  std::vector<ContainerDecl> containers;
};

struct Location {
  enum class Tag { on_table, in_container, in_gripper };
  Tag tag = Tag::on_table;
  std::string container;  // valid when tag == in_container

  static Location table() { return {Tag::on_table, {}}; }
  static Location in(std::string c) { return {Tag::in_container, std::move(c)}; }
  static Location gripper() { return {Tag::in_gripper, {}}; }

  bool operator==(const Location&) const = default;
};

// The most recent world event, visible only while the gripper dwells at the
// event site; the executor wipes it once motion resumes. Counting tasks rely on
// this transience: the cumulative pour count itself is never observable.
enum class CueKind { none, opened, closed, grasped, released, poured };

struct EventCue {
  CueKind kind = CueKind::none;
  std::string a;  // primary entity (container / object / pour source)
  std::string b;  // secondary entity (pour destination)

  bool operator==(const EventCue&) const = default;
};

struct WorldEvent {
  enum class Kind { open, close, grasp, release_into, release_table, pour };
  Kind kind;
  std::string a;
  std::string b;

  static WorldEvent open(std::string c) { return {Kind::open, std::move(c), {}}; }
  static WorldEvent close(std::string c) { return {Kind::close, std::move(c), {}}; }
  static WorldEvent grasp(std::string o) { return {Kind::grasp, std::move(o), {}}; }
  static WorldEvent release_into(std::string c) { return {Kind::release_into, std::move(c), {}}; }
  static WorldEvent release_table() { return {Kind::release_table, {}, {}}; }
  static WorldEvent pour(std::string src, std::string dst) {
    return {Kind::pour, std::move(src), std::move(dst)};
  }

  bool operator==(const WorldEvent&) const = default;
};

std::string to_string(const WorldEvent& e);

struct WorldState {
  struct ContainerState {
    Openness openness = Openness::closed;
    bool occludes = false;
    bool operator==(const ContainerState&) const = default;
  };
  struct Gripper {
    std::optional<std::string> held;
    int g = 0;  // 1 = closed
    bool operator==(const Gripper&) const = default;
  };

  std::map<std::string, EntityKind> kinds;  // full entity inventory, fixed per scene
  std::map<std::string, Location> objects;
  std::map<std::string, ContainerState> containers;
  Gripper gripper;
  std::vector<std::pair<std::string, int>> inspection_log;          // (container, step) open events
  std::vector<std::tuple<std::string, std::string, int>> pour_log;  // (src, dst, step)
  std::vector<std::tuple<std::string, std::string, int>> placement_log;  // (object, dest|"" table, step)
  EventCue cue;
  int step = 0;

  int pour_count(const std::string& src, const std::string& dst) const;
  bool has_entity(const std::string& name) const { return kinds.count(name) != 0; }

  bool operator==(const WorldState&) const = default;
};

struct RuleViolation {
  enum class Code {
    gripper_occupied,
    gripper_empty,
    closed_container,
    already_open,
    already_closed,
    occluded_target,
    unknown_entity,
    not_a_container,
  };
  Code code;
  std::string detail;
};

const char* to_string(RuleViolation::Code c);

using ApplyResult = std::variant<WorldState, RuleViolation>;

WorldState init_scene(const SceneDescriptor& scene, std::uint64_t seed);
ApplyResult apply_event(const WorldState& state, const WorldEvent& event);

// Time/bookkeeping helpers used by the executor; not world events.
WorldState advance_step(WorldState state);
WorldState clear_cue(WorldState state);

inline constexpr int kFeatureDim = 32;
inline constexpr const char* kFeatureSchemaVersion = "rma-feature-v1";

struct Observation {
  std::vector<std::pair<std::string, Location>> visible_objects;  // name-sorted
  std::map<std::string, Openness> container_states;
  std::optional<std::string> held_visible;
  int g = 0;
  EventCue cue;
  std::vector<double> feature;  // length kFeatureDim

  bool operator==(const Observation&) const = default;
};

Observation observe(const WorldState& state);

struct StagePredicate {
  enum class Kind {
    in_container,        // entities: [object, container]
    on_table,            // entities: [object]
    gripper_empty,       // entities: []
    container_open,      // entities: [container]
    container_closed,    // entities: [container]
    visited_all,         // entities: [containers...]
    pour_count_eq,       // entities: [src, dst], count
    placed_before,       // entities: [object_a, object_b] (last placements)
    placed_after_pours,  // entities: [object, src, dst], count (k-th pour)
    container_count_eq,  // entities: [container], count
  };
  Kind kind;
  std::vector<std::string> entities;
  int count = 0;

  std::string describe() const;
};

bool check_predicate(const WorldState& state, const StagePredicate& predicate);

}  // namespace rma
