#include "rma/world.hpp"

#include <algorithm>
#include <sstream>

namespace rma {

const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::item: return "item";
    case EntityKind::drawer: return "drawer";
    case EntityKind::microwave: return "microwave";
    case EntityKind::basket: return "basket";
    case EntityKind::plate: return "plate";
    case EntityKind::cabinet: return "cabinet";
    case EntityKind::mug: return "mug";
    case EntityKind::frypan: return "frypan";
    case EntityKind::drainer: return "drainer";
    case EntityKind::bottle: return "bottle";
  }
  return "?";
}

EntityKind entity_kind_from_string(const std::string& s) {
  static const std::map<std::string, EntityKind> table = {
      {"item", EntityKind::item},       {"drawer", EntityKind::drawer},
      {"microwave", EntityKind::microwave}, {"basket", EntityKind::basket},
      {"plate", EntityKind::plate},     {"cabinet", EntityKind::cabinet},
      {"mug", EntityKind::mug},         {"frypan", EntityKind::frypan},
      {"drainer", EntityKind::drainer}, {"bottle", EntityKind::bottle},
  };
  auto it = table.find(s);
  if (it == table.end()) throw ConfigError("unknown entity kind: " + s);
  return it->second;
}

bool occludes_when_closed(EntityKind k) {
  return k == EntityKind::drawer || k == EntityKind::microwave || k == EntityKind::cabinet;
}

bool is_container_kind(EntityKind k) {
  return k != EntityKind::item && k != EntityKind::bottle;
}

std::string to_string(const WorldEvent& e) {
  switch (e.kind) {
    case WorldEvent::Kind::open: return "open(" + e.a + ")";
    case WorldEvent::Kind::close: return "close(" + e.a + ")";
    case WorldEvent::Kind::grasp: return "grasp(" + e.a + ")";
    case WorldEvent::Kind::release_into: return "release_into(" + e.a + ")";
    case WorldEvent::Kind::release_table: return "release_table()";
    case WorldEvent::Kind::pour: return "pour(" + e.a + "," + e.b + ")";
  }
  return "?";
}

const char* to_string(RuleViolation::Code c) {
  switch (c) {
    case RuleViolation::Code::gripper_occupied: return "gripper-occupied";
    case RuleViolation::Code::gripper_empty: return "gripper-empty";
    case RuleViolation::Code::closed_container: return "closed-container";
    case RuleViolation::Code::already_open: return "already-open";
    case RuleViolation::Code::already_closed: return "already-closed";
    case RuleViolation::Code::occluded_target: return "occluded-target";
    case RuleViolation::Code::unknown_entity: return "unknown-entity";
    case RuleViolation::Code::not_a_container: return "not-a-container";
  }
  return "?";
}

int WorldState::pour_count(const std::string& src, const std::string& dst) const {
  int n = 0;
  for (const auto& [s, d, t] : pour_log)
    if (s == src && d == dst) ++n;
  return n;
}

WorldState init_scene(const SceneDescriptor& scene, std::uint64_t /*seed*/) {
  WorldState state;
  auto declare = [&](const std::string& name, EntityKind kind) {
    if (!state.kinds.emplace(name, kind).second)
      throw ConfigError("duplicate entity identifier: " + name);
  };
  for (const auto& c : scene.containers) {
    if (!is_container_kind(c.kind))
      throw ConfigError("declared container with non-container kind: " + c.name);
    declare(c.name, c.kind);
    state.containers[c.name] = {c.initial, occludes_when_closed(c.kind)};
  }
  for (const auto& o : scene.objects) {
    declare(o.name, o.kind);
    if (o.initial_container.empty()) {
      state.objects[o.name] = Location::table();
    } else {
      if (!state.containers.count(o.initial_container))
        throw ConfigError("object " + o.name + " placed in undeclared container " +
                          o.initial_container);
      state.objects[o.name] = Location::in(o.initial_container);
    }
  }
  return state;
}

namespace {

RuleViolation violation(RuleViolation::Code code, std::string detail) {
  return {code, std::move(detail)};
}

}  // namespace

ApplyResult apply_event(const WorldState& state, const WorldEvent& event) {
  WorldState next = state;
  switch (event.kind) {
    case WorldEvent::Kind::open: {
      auto it = next.containers.find(event.a);
      if (it == next.containers.end())
        return violation(RuleViolation::Code::unknown_entity, event.a);
      if (it->second.openness == Openness::open)
        return violation(RuleViolation::Code::already_open, event.a);
      it->second.openness = Openness::open;
      next.inspection_log.emplace_back(event.a, next.step);
      next.cue = {CueKind::opened, event.a, {}};
      break;
    }
    case WorldEvent::Kind::close: {
      auto it = next.containers.find(event.a);
      if (it == next.containers.end())
        return violation(RuleViolation::Code::unknown_entity, event.a);
      if (it->second.openness == Openness::closed)
        return violation(RuleViolation::Code::already_closed, event.a);
      it->second.openness = Openness::closed;
      next.cue = {CueKind::closed, event.a, {}};
      break;
    }
    case WorldEvent::Kind::grasp: {
      if (next.gripper.held)
        return violation(RuleViolation::Code::gripper_occupied, *next.gripper.held);
      auto it = next.objects.find(event.a);
      if (it == next.objects.end())
        return violation(RuleViolation::Code::unknown_entity, event.a);
      if (it->second.tag == Location::Tag::in_container) {
        const auto& c = next.containers.at(it->second.container);
        if (c.openness == Openness::closed && c.occludes)
          return violation(RuleViolation::Code::occluded_target, event.a);
      }
      it->second = Location::gripper();
      next.gripper.held = event.a;
      next.gripper.g = 1;
      next.cue = {CueKind::grasped, event.a, {}};
      break;
    }
    case WorldEvent::Kind::release_into: {
      if (!next.gripper.held)
        return violation(RuleViolation::Code::gripper_empty, to_string(event));
      auto it = next.containers.find(event.a);
      if (it == next.containers.end())
        return violation(RuleViolation::Code::unknown_entity, event.a);
      if (it->second.openness == Openness::closed)
        return violation(RuleViolation::Code::closed_container, event.a);
      const std::string obj = *next.gripper.held;
      next.objects[obj] = Location::in(event.a);
      next.gripper.held.reset();
      next.gripper.g = 0;
      next.placement_log.emplace_back(obj, event.a, next.step);
      next.cue = {CueKind::released, obj, event.a};
      break;
    }
    case WorldEvent::Kind::release_table: {
      if (!next.gripper.held)
        return violation(RuleViolation::Code::gripper_empty, to_string(event));
      const std::string obj = *next.gripper.held;
      next.objects[obj] = Location::table();
      next.gripper.held.reset();
      next.gripper.g = 0;
      next.placement_log.emplace_back(obj, std::string{}, next.step);
      next.cue = {CueKind::released, obj, {}};
      break;
    }
    case WorldEvent::Kind::pour: {
      if (!next.gripper.held || *next.gripper.held != event.a)
        return violation(RuleViolation::Code::gripper_empty, to_string(event));
      if (!next.has_entity(event.b))
        return violation(RuleViolation::Code::unknown_entity, event.b);
      next.pour_log.emplace_back(event.a, event.b, next.step);
      next.cue = {CueKind::poured, event.a, event.b};
      break;
    }
  }
  return next;
}

WorldState advance_step(WorldState state) {
  ++state.step;
  return state;
}

WorldState clear_cue(WorldState state) {
  state.cue = {};
  return state;
}

namespace {

bool object_visible(const WorldState& state, const Location& loc) {
  if (loc.tag != Location::Tag::in_container) return true;
  const auto& c = state.containers.at(loc.container);
  return !(c.openness == Openness::closed && c.occludes);
}

// Fixed slot layout, documented in data/feature_schema.txt (rma-feature-v1).
std::vector<double> featurize(const WorldState& state, const Observation& obs) {
  std::vector<double> f(kFeatureDim, 0.0);
  std::vector<std::string> object_names;
  std::vector<std::string> container_names;
  for (const auto& [name, kind] : state.kinds) {
    if (state.objects.count(name))
      object_names.push_back(name);
    else
      container_names.push_back(name);
  }
  auto container_index = [&](const std::string& name) {
    auto it = std::find(container_names.begin(), container_names.end(), name);
    return static_cast<int>(it - container_names.begin());
  };
  auto object_index = [&](const std::string& name) {
    auto it = std::find(object_names.begin(), object_names.end(), name);
    return static_cast<int>(it - object_names.begin());
  };

  // 0..11: visible object location codes
  for (const auto& [name, loc] : obs.visible_objects) {
    int i = object_index(name);
    if (i >= 12) continue;
    switch (loc.tag) {
      case Location::Tag::on_table: f[i] = 0.25; break;
      case Location::Tag::in_gripper: f[i] = 0.5; break;
      case Location::Tag::in_container:
        f[i] = 0.6 + 0.05 * container_index(loc.container);
        break;
    }
  }
  // 12..19: container openness
  for (const auto& [name, openness] : obs.container_states) {
    int i = container_index(name);
    if (i < 8) f[12 + i] = openness == Openness::open ? 1.0 : 0.0;
  }
  // 20: gripper bit, 21: held object id
  f[20] = obs.g;
  if (obs.held_visible) f[21] = (object_index(*obs.held_visible) + 1) / 16.0;
  // 22..26: event cue one-hot, 27..28: cue entity ids
  switch (obs.cue.kind) {
    case CueKind::none: break;
    case CueKind::opened: f[22] = 1.0; break;
    case CueKind::closed: f[23] = 1.0; break;
    case CueKind::grasped: f[24] = 1.0; break;
    case CueKind::released: f[25] = 1.0; break;
    case CueKind::poured: f[26] = 1.0; break;
  }
  if (!obs.cue.a.empty() && state.has_entity(obs.cue.a)) {
    int i = state.objects.count(obs.cue.a) ? object_index(obs.cue.a) : container_index(obs.cue.a);
    f[27] = (i + 1) / 16.0;
  }
  if (!obs.cue.b.empty() && state.has_entity(obs.cue.b)) {
    int i = state.objects.count(obs.cue.b) ? object_index(obs.cue.b) : container_index(obs.cue.b);
    f[28] = (i + 1) / 16.0;
  }
  // 29..31 reserved
  return f;
}

}  // namespace

Observation observe(const WorldState& state) {
  Observation obs;
  for (const auto& [name, loc] : state.objects) {
    if (loc.tag == Location::Tag::in_gripper) continue;  // reported via gripper
    if (object_visible(state, loc)) obs.visible_objects.emplace_back(name, loc);
  }
  for (const auto& [name, c] : state.containers) obs.container_states[name] = c.openness;
  obs.held_visible = state.gripper.held;
  obs.g = state.gripper.g;
  obs.cue = state.cue;
  obs.feature = featurize(state, obs);
  return obs;
}

std::string StagePredicate::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::in_container: os << "in_container(" << entities[0] << "," << entities[1] << ")"; break;
    case Kind::on_table: os << "on_table(" << entities[0] << ")"; break;
    case Kind::gripper_empty: os << "gripper_empty"; break;
    case Kind::container_open: os << "container_open(" << entities[0] << ")"; break;
    case Kind::container_closed: os << "container_closed(" << entities[0] << ")"; break;
    case Kind::visited_all: {
      os << "visited_all(";
      for (size_t i = 0; i < entities.size(); ++i) os << (i ? "," : "") << entities[i];
      os << ")";
      break;
    }
    case Kind::pour_count_eq:
      os << "pour_count(" << entities[0] << "," << entities[1] << ")==" << count;
      break;
    case Kind::placed_before:
      os << "placed_before(" << entities[0] << "," << entities[1] << ")";
      break;
    case Kind::placed_after_pours:
      os << "placed_after_pours(" << entities[0] << "," << entities[1] << "," << entities[2]
         << "," << count << ")";
      break;
    case Kind::container_count_eq:
      os << "container_count(" << entities[0] << ")==" << count;
      break;
  }
  return os.str();
}

namespace {

void require_entity(const WorldState& state, const std::string& name) {
  if (!state.has_entity(name)) throw ConfigError("predicate references undeclared entity: " + name);
}

std::optional<int> last_placement_step(const WorldState& state, const std::string& obj) {
  std::optional<int> step;
  for (const auto& [o, dest, t] : state.placement_log)
    if (o == obj) step = t;
  return step;
}

}  // namespace

bool check_predicate(const WorldState& state, const StagePredicate& p) {
  for (const auto& e : p.entities) require_entity(state, e);
  switch (p.kind) {
    case StagePredicate::Kind::in_container:
      return state.objects.at(p.entities[0]) == Location::in(p.entities[1]);
    case StagePredicate::Kind::on_table:
      return state.objects.at(p.entities[0]) == Location::table();
    case StagePredicate::Kind::gripper_empty:
      return !state.gripper.held.has_value();
    case StagePredicate::Kind::container_open:
      return state.containers.at(p.entities[0]).openness == Openness::open;
    case StagePredicate::Kind::container_closed:
      return state.containers.at(p.entities[0]).openness == Openness::closed;
    case StagePredicate::Kind::visited_all: {
      for (const auto& c : p.entities) {
        bool seen = std::any_of(state.inspection_log.begin(), state.inspection_log.end(),
                                [&](const auto& entry) { return entry.first == c; });
        if (!seen) return false;
      }
      return true;
    }
    case StagePredicate::Kind::pour_count_eq:
      return state.pour_count(p.entities[0], p.entities[1]) == p.count;
    case StagePredicate::Kind::placed_before: {
      auto a = last_placement_step(state, p.entities[0]);
      auto b = last_placement_step(state, p.entities[1]);
      return a && b && *a < *b;
    }
    case StagePredicate::Kind::placed_after_pours: {
      auto placed = last_placement_step(state, p.entities[0]);
      if (!placed) return false;
      int seen = 0;
      for (const auto& [s, d, t] : state.pour_log) {
        if (s == p.entities[1] && d == p.entities[2] && ++seen == p.count)
          return *placed > t;
      }
      return false;
    }
    case StagePredicate::Kind::container_count_eq: {
      int n = 0;
      for (const auto& [name, loc] : state.objects)
        if (loc == Location::in(p.entities[0])) ++n;
      return n == p.count;
    }
  }
  return false;
}

}  // namespace rma
