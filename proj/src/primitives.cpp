#include "rma/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rma/rng.hpp"

namespace rma {

using nlohmann::json;

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& v) { return {s * v[0], s * v[1], s * v[2]}; }
double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double DurationTable::scale_for(int task_id) const {
  auto it = task_scale.find(task_id);
  return it == task_scale.end() ? 1.0 : it->second;
}

int DurationTable::scaled_travel(Primitive p, int task_id) const {
  const double scaled = travel_frames.at(p) * scale_for(task_id);
  return std::max(2, static_cast<int>(std::lround(scaled)));
}

namespace {

constexpr Vec3 kTableDrop{0.2, 0.2, 0.0};

int entity_index(const WorldState& state, const std::string& name, bool container) {
  int i = 0;
  for (const auto& [n, kind] : state.kinds) {
    const bool is_container = state.containers.count(n) != 0;
    if (is_container != container) continue;
    if (n == name) return i;
    ++i;
  }
  return -1;
}

Vec3 home_position(const WorldState& state, const std::string& name) {
  if (state.containers.count(name)) {
    const int i = entity_index(state, name, true);
    return {-0.8 + 0.4 * i, 0.8, 0.2};
  }
  const int i = entity_index(state, name, false);
  return {-0.8 + 0.3 * i, 0.2, 0.0};
}

}  // namespace

Vec3 entity_position(const WorldState& state, const std::string& name) {
  if (!state.has_entity(name)) throw PlanError("unknown entity: " + name);
  auto it = state.objects.find(name);
  if (it != state.objects.end()) {
    switch (it->second.tag) {
      case Location::Tag::on_table: return home_position(state, name);
      case Location::Tag::in_container: return home_position(state, it->second.container);
      case Location::Tag::in_gripper: return home_position(state, name);  // carried; unused
    }
  }
  return home_position(state, name);
}

PrimitivePlan plan_primitive(const SubtaskSpec& subtask, const WorldState& state,
                             const Vec3& ee_start, const DurationTable& durations,
                             int task_id, const NoiseConfig& noise, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x706c616eULL));
  auto jitter = [&]() -> Vec3 {
    const double j = noise.waypoint_jitter;
    return {rng.uniform(-j, j), rng.uniform(-j, j), rng.uniform(-j, j)};
  };

  PrimitivePlan plan;
  plan.subtask = subtask;
  plan.waypoints.push_back(ee_start);

  const int travel = durations.scaled_travel(subtask.primitive, task_id);
  const int dwell = durations.dwell_frames;

  auto add_leg = [&](Vec3 target, int frames) {
    plan.waypoints.push_back(target + jitter());
    plan.leg_frames.push_back(std::max(1, frames));
  };
  auto add_dwell = [&](const WorldEvent& event) {
    // Dwell frames repeat the last waypoint; the event fires mid-dwell.
    int offset = 0;
    for (int f : plan.leg_frames) offset += f;
    for (int k = 0; k < dwell; ++k) plan.dwell_offsets.push_back(offset + k);
    plan.event_schedule[offset + dwell / 2] = event;
    plan.waypoints.push_back(plan.waypoints.back());
    plan.leg_frames.push_back(dwell);
  };

  auto require_reachable = [&](const std::string& object) {
    const auto& loc = state.objects.at(object);
    if (loc.tag == Location::Tag::in_container) {
      const auto& c = state.containers.at(loc.container);
      if (c.openness == Openness::closed && c.occludes)
        throw PlanError("target inside closed container: " + object);
    }
  };

  switch (subtask.primitive) {
    case Primitive::Move: {
      if (!state.has_entity(subtask.target)) throw PlanError("unknown target: " + subtask.target);
      require_reachable(subtask.target);
      const Vec3 target = entity_position(state, subtask.target);
      add_leg(target + Vec3{0, 0, 0.3}, travel);
      add_leg(target, travel / 2);
      add_dwell(WorldEvent::grasp(subtask.target));
      add_leg(target + Vec3{0, 0, 0.3}, travel / 2);
      break;
    }
    case Primitive::Place: {
      if (subtask.target.empty()) {
        add_leg(kTableDrop + Vec3{0, 0, 0.3}, travel);
        add_leg(kTableDrop, travel / 2);
        add_dwell(WorldEvent::release_table());
        add_leg(kTableDrop + Vec3{0, 0, 0.3}, travel / 2);
      } else {
        if (!state.containers.count(subtask.target))
          throw PlanError("place target is not a container: " + subtask.target);
        if (state.containers.at(subtask.target).openness == Openness::closed)
          throw PlanError("place target container is closed: " + subtask.target);
        const Vec3 target = entity_position(state, subtask.target);
        add_leg(target + Vec3{0, 0, 0.3}, travel);
        add_leg(target, travel / 2);
        add_dwell(WorldEvent::release_into(subtask.target));
        add_leg(target + Vec3{0, 0, 0.3}, travel / 2);
      }
      break;
    }
    case Primitive::Pour: {
      if (!state.has_entity(subtask.target)) throw PlanError("unknown target: " + subtask.target);
      const Vec3 above = entity_position(state, subtask.target) + Vec3{0, 0, 0.35};
      add_leg(above, travel);
      add_dwell(WorldEvent::pour(subtask.object, subtask.target));
      // Tilt-and-return creates a direction change at the pour site.
      add_leg(above + Vec3{0.08, 0, -0.05}, std::max(2, travel / 2));
      add_leg(above, std::max(2, travel / 2));
      break;
    }
    case Primitive::Open:
    case Primitive::Close: {
      if (!state.containers.count(subtask.target))
        throw PlanError("open/close target is not a container: " + subtask.target);
      const Vec3 handle = entity_position(state, subtask.target) + Vec3{0, -0.15, 0};
      add_leg(handle, travel);
      add_dwell(subtask.primitive == Primitive::Open ? WorldEvent::open(subtask.target)
                                                     : WorldEvent::close(subtask.target));
      add_leg(handle + Vec3{0, -0.1, 0.1}, travel / 2);
      break;
    }
  }

  for (int f : plan.leg_frames) plan.duration += f;
  return plan;
}

bool subtask_postcondition(const SubtaskSpec& subtask, const WorldState& state) {
  switch (subtask.primitive) {
    case Primitive::Move:
      return state.gripper.held == subtask.target;
    case Primitive::Place:
      if (subtask.target.empty()) return state.objects.at(subtask.object) == Location::table();
      return state.objects.at(subtask.object) == Location::in(subtask.target);
    case Primitive::Pour:
      return state.pour_count(subtask.object, subtask.target) >= 1;
    case Primitive::Open:
      return state.containers.at(subtask.target).openness == Openness::open;
    case Primitive::Close:
      return state.containers.at(subtask.target).openness == Openness::closed;
  }
  return false;
}

namespace {

struct AttemptResult {
  bool postcondition_ok = false;
  bool rule_violation = false;
  std::string diagnostic;
  Vec3 ee_end{0, 0, 0};
};

AttemptResult run_attempt(const PrimitivePlan& plan, WorldState& state,
                          std::vector<TrajectoryFrame>& frames, std::vector<WorldState>& states,
                          const NoiseConfig& noise, Rng& rng, int& step_counter,
                          const WorldState& pre_state) {
  AttemptResult result;
  Vec3 prev = plan.waypoints.front();
  int offset = 0;
  bool aborted = false;

  for (size_t leg = 0; leg + 1 < plan.waypoints.size() && !aborted; ++leg) {
    const Vec3& from = plan.waypoints[leg];
    const Vec3& to = plan.waypoints[leg + 1];
    const int n = plan.leg_frames[leg];
    // Event cues are visible only while the gripper dwells at the event site;
    // resuming motion wipes them, so an observation taken between subtasks
    // carries no trace of past events.
    if (leg > 0 && !(from == to)) state = clear_cue(std::move(state));
    for (int j = 1; j <= n && !aborted; ++j, ++offset) {
      const Vec3 pos = from + (static_cast<double>(j) / n) * (to - from);
      state = advance_step(std::move(state));
      ++step_counter;

      TrajectoryFrame frame;
      frame.t = step_counter;
      frame.pos = pos;
      frame.v = pos - prev;
      prev = pos;

      auto ev = plan.event_schedule.find(offset);
      if (ev != plan.event_schedule.end()) {
        const WorldEvent& event = ev->second;
        const bool grasp_fails =
            event.kind == WorldEvent::Kind::grasp && rng.bernoulli(noise.grasp_failure_p);
        if (grasp_fails) {
          result.diagnostic = "grasp failed: " + event.a;
          aborted = true;
        } else {
          ApplyResult applied = apply_event(state, event);
          if (auto* violation = std::get_if<RuleViolation>(&applied)) {
            result.rule_violation = true;
            result.diagnostic = std::string(to_string(violation->code)) + ": " + violation->detail;
            aborted = true;
          } else {
            state = std::get<WorldState>(std::move(applied));
            frame.event = event;
          }
        }
      }

      frame.g = state.gripper.g;
      frames.push_back(frame);
      states.push_back(state);
      result.ee_end = pos;
    }
  }

  if (!aborted) {
    if (plan.subtask.primitive == Primitive::Pour) {
      result.postcondition_ok = state.pour_count(plan.subtask.object, plan.subtask.target) >
                                pre_state.pour_count(plan.subtask.object, plan.subtask.target);
    } else {
      result.postcondition_ok = subtask_postcondition(plan.subtask, state);
    }
    if (!result.postcondition_ok && result.diagnostic.empty())
      result.diagnostic = "postcondition not satisfied";
  }
  return result;
}

}  // namespace

std::pair<WorldState, ExecutionOutcome> execute(const PrimitivePlan& plan, WorldState state,
                                                const DurationTable& durations, int task_id,
                                                const NoiseConfig& noise, std::uint64_t seed,
                                                int base_step) {
  ExecutionOutcome outcome;
  state = clear_cue(std::move(state));
  const WorldState pre_state = state;
  Rng rng(derive_seed(seed, 0x65786563ULL));
  int step_counter = base_step;

  PrimitivePlan current = plan;
  for (int attempt = 0; attempt <= noise.max_retries; ++attempt) {
    AttemptResult result = run_attempt(current, state, outcome.frames, outcome.states, noise, rng,
                                       step_counter, pre_state);
    if (result.postcondition_ok) {
      outcome.success = true;
      outcome.retries_used = attempt;
      return {std::move(state), std::move(outcome)};
    }
    if (result.rule_violation) {
      outcome.retries_used = attempt;
      outcome.diagnostic = result.diagnostic;
      return {std::move(state), std::move(outcome)};
    }
    outcome.diagnostic = result.diagnostic;
    if (attempt < noise.max_retries) {
      current = plan_primitive(plan.subtask, state, result.ee_end, durations, task_id, noise,
                               derive_seed(seed, 1000 + attempt));
    } else {
      outcome.retries_used = attempt;
    }
  }
  return {std::move(state), std::move(outcome)};
}

DurationTable calibrate_durations(
    const std::vector<TaskSpec>& suite, const DurationTable& base,
    const std::function<double(const TaskSpec&, const DurationTable&)>& episode_length,
    int iterations) {
  DurationTable table = base;
  for (int it = 0; it < iterations; ++it) {
    for (const auto& task : suite) {
      const double length = episode_length(task, table);
      if (length <= 0) throw CalibrationError("episode length not positive for " + task.name);
      double scale = table.scale_for(task.task_id) * task.target_steps / length;
      if (scale <= 0) throw CalibrationError("non-positive scale for " + task.name);
      table.task_scale[task.task_id] = scale;
    }
  }
  for (const auto& task : suite) {
    for (const auto& [p, f] : table.travel_frames) {
      if (table.scaled_travel(p, task.task_id) < 2)
        throw CalibrationError("infeasible budget for " + task.name);
    }
  }
  return table;
}

void save_durations(const DurationTable& table, const std::string& path) {
  json j;
  for (const auto& [p, f] : table.travel_frames) j["travel_frames"][to_string(p)] = f;
  j["dwell_frames"] = table.dwell_frames;
  for (const auto& [task_id, scale] : table.task_scale)
    j["task_scale"][std::to_string(task_id)] = scale;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write durations file: " + path);
  out << j.dump(2) << "\n";
}

DurationTable load_durations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open durations file: " + path);
  json j;
  in >> j;
  DurationTable table;
  for (const auto& [name, frames] : j.at("travel_frames").items())
    table.travel_frames[primitive_from_string(name)] = frames.get<int>();
  table.dwell_frames = j.at("dwell_frames").get<int>();
  if (j.contains("task_scale"))
    for (const auto& [task_id, scale] : j.at("task_scale").items())
      table.task_scale[std::stoi(task_id)] = scale.get<double>();
  return table;
}

}  // namespace rma
