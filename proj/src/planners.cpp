#include "rma/planners.hpp"

#include <algorithm>

namespace rma {

const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::oracle: return "oracle";
    case PlannerKind::reactive: return "reactive";
    case PlannerKind::memory: return "memory";
  }
  return "?";
}

PlannerKind planner_kind_from_string(const std::string& s) {
  if (s == "oracle") return PlannerKind::oracle;
  if (s == "reactive") return PlannerKind::reactive;
  if (s == "memory") return PlannerKind::memory;
  throw ConfigError("unknown planner: " + s);
}

namespace {

// Event tallies a planner believes have happened so far. The oracle fills them
// from the true world logs, the memory planner from reconstructed cues.
struct EventCounts {
  std::map<std::string, int> opens;
  std::map<std::string, int> closes;
  std::map<std::pair<std::string, std::string>, int> pours;
  std::map<std::pair<std::string, std::string>, int> places;  // (object, dest|"")
};

// Decompositions may repeat a signature (open the same drawer twice); the k-th
// occurrence is satisfied by the k-th matching event.
std::vector<int> occurrence_numbers(const std::vector<SubtaskSpec>& subtasks) {
  std::vector<int> occ(subtasks.size(), 1);
  for (size_t i = 0; i < subtasks.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (subtasks[j].primitive == subtasks[i].primitive &&
          subtasks[j].target == subtasks[i].target && subtasks[j].object == subtasks[i].object)
        ++occ[i];
  return occ;
}

int count_of(const std::map<std::string, int>& m, const std::string& k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

int count_of(const std::map<std::pair<std::string, std::string>, int>& m,
             const std::pair<std::string, std::string>& k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

bool milestone_done(const SubtaskSpec& sub, int occ, const EventCounts& counts,
                    const std::optional<std::string>& held) {
  switch (sub.primitive) {
    case Primitive::Open: return count_of(counts.opens, sub.target) >= occ;
    case Primitive::Close: return count_of(counts.closes, sub.target) >= occ;
    case Primitive::Place: return count_of(counts.places, {sub.object, sub.target}) >= occ;
    case Primitive::Pour: return count_of(counts.pours, {sub.object, sub.target}) >= occ;
    case Primitive::Move: return held == sub.target;
  }
  return false;
}

// First subtask whose milestone has not happened yet. A Move also counts as
// done when its follow-up milestone is done (the grip was already released).
std::optional<size_t> frontier_scan(const std::vector<SubtaskSpec>& subtasks,
                                    const EventCounts& counts,
                                    const std::optional<std::string>& held) {
  const std::vector<int> occ = occurrence_numbers(subtasks);
  for (size_t i = 0; i < subtasks.size(); ++i) {
    bool done = milestone_done(subtasks[i], occ[i], counts, held);
    if (!done && subtasks[i].primitive == Primitive::Move && i + 1 < subtasks.size())
      done = milestone_done(subtasks[i + 1], occ[i + 1], counts, held);
    if (!done) return i;
  }
  return std::nullopt;
}

}  // namespace

PlannerDecision oracle_plan(const TaskSpec& task, const OracleInputs& inputs,
                            const KinThresholds& thresholds, int nms_gap) {
  const WorldState& state = *inputs.state;

  EventCounts counts;
  for (const auto& [container, step] : state.inspection_log) counts.opens[container]++;
  for (const auto& [container, opens] : counts.opens) {
    const bool open_now = state.containers.at(container).openness == Openness::open;
    counts.closes[container] = opens - (open_now ? 1 : 0);
  }
  for (const auto& [src, dst, step] : state.pour_log) counts.pours[{src, dst}]++;
  for (const auto& [object, dest, step] : state.placement_log) counts.places[{object, dest}]++;

  PlannerDecision decision;
  const auto frontier = frontier_scan(task.subtasks, counts, state.gripper.held);
  if (frontier)
    decision.subtask = task.subtasks[*frontier];
  else
    decision.halted = true;

  if (inputs.trajectory && inputs.trajectory->size() >= 2) {
    const KeyframeSet keys = extract_keyframes(*inputs.trajectory, thresholds, nms_gap);
    const std::set<int> flagged(keys.indices.begin(), keys.indices.end());
    for (size_t i = 0; i < inputs.window_steps.size(); ++i)
      if (flagged.count(inputs.window_steps[i]))
        decision.keyframe_positions.push_back(static_cast<int>(i) + 1);
  }
  return decision;
}

MemoryBelief reconstruct_belief(const MemoryView& view) {
  MemoryBelief belief;

  // Merge keyframes and the recent window by step. The same event frame can
  // appear in both; the step index deduplicates it.
  std::map<int, const Observation*> merged;
  int last_recent_step = -1;
  for (const auto& entry : view.entries) {
    merged[entry.step] = entry.obs;
    if (entry.origin == MemoryOrigin::recent && entry.step > last_recent_step) {
      last_recent_step = entry.step;
      belief.current = *entry.obs;
    }
  }

  // Cues are wiped once motion resumes, so each remembered frame with a live
  // cue is a distinct event.
  for (const auto& [step, obs] : merged) {
    switch (obs->cue.kind) {
      case CueKind::opened: belief.opens[obs->cue.a]++; break;
      case CueKind::closed: belief.closes[obs->cue.a]++; break;
      case CueKind::poured: belief.pours[{obs->cue.a, obs->cue.b}]++; break;
      case CueKind::released: belief.places[{obs->cue.a, obs->cue.b}]++; break;
      case CueKind::grasped:
      case CueKind::none: break;
    }
  }
  return belief;
}

PlannerDecision memory_plan(const TaskSpec& task, const MemoryView& view) {
  const MemoryBelief belief = reconstruct_belief(view);

  EventCounts counts;
  counts.opens = belief.opens;
  counts.closes = belief.closes;
  counts.pours = belief.pours;
  counts.places = belief.places;

  std::optional<std::string> held;
  if (belief.current) held = belief.current->held_visible;

  PlannerDecision decision;
  const auto frontier = frontier_scan(task.subtasks, counts, held);
  if (frontier)
    decision.subtask = task.subtasks[*frontier];
  else
    decision.halted = true;

  // Flag window frames that carry an event cue or flip the gripper bit; these
  // are the frames worth keeping once the window slides past them.
  const Observation* prev = nullptr;
  int pos = 0;
  for (const auto& entry : view.entries) {
    if (entry.origin != MemoryOrigin::recent) continue;
    ++pos;
    const bool cue_live = entry.obs->cue.kind != CueKind::none;
    const bool g_flip = prev != nullptr && entry.obs->g != prev->g;
    if (cue_live || g_flip) decision.keyframe_positions.push_back(pos);
    prev = entry.obs;
  }
  return decision;
}

namespace {

bool occludes_by_scene(const TaskSpec& task, const std::string& container) {
  for (const auto& c : task.scene.containers)
    if (c.name == container) return occludes_when_closed(c.kind);
  return false;
}

bool visible_at(const std::vector<std::pair<std::string, Location>>& visible,
                const std::string& object, const Location& where) {
  for (const auto& [name, loc] : visible)
    if (name == object && loc == where) return true;
  return false;
}

bool visible_anywhere(const std::vector<std::pair<std::string, Location>>& visible,
                      const std::string& object) {
  for (const auto& [name, loc] : visible)
    if (name == object) return true;
  return false;
}

SubtaskSpec synthesized_open(const std::string& container) {
  SubtaskSpec sub;
  sub.step_id = 0;
  sub.instruction = "open the " + container;
  sub.primitive = Primitive::Open;
  sub.target = container;
  return sub;
}

}  // namespace

PlannerDecision reactive_plan(const TaskSpec& task, const ReactiveInput& input) {
  const auto& visible = input.visible_objects();
  const auto& openness = input.container_states();
  const auto& held = input.held();

  auto is_open = [&](const std::string& c) {
    auto it = openness.find(c);
    return it != openness.end() && it->second == Openness::open;
  };

  PlannerDecision decision;

  // Greedy rule: if the goal container of the final placement is open right
  // now and the payload is at hand, place immediately. This is the "locally
  // valid target" shortcut; it never waits for intermediate inspections.
  const SubtaskSpec* final_place = nullptr;
  for (const auto& sub : task.subtasks)
    if (sub.primitive == Primitive::Place && !sub.target.empty() &&
        occludes_by_scene(task, sub.target))
      final_place = &sub;
  if (final_place && is_open(final_place->target) &&
      !visible_at(visible, final_place->object, Location::in(final_place->target))) {
    if (held == final_place->object) {
      decision.subtask = *final_place;
      return decision;
    }
    if (!held && visible_at(visible, final_place->object, Location::table())) {
      for (const auto& sub : task.subtasks)
        if (sub.primitive == Primitive::Move && sub.target == final_place->object) {
          decision.subtask = sub;
          return decision;
        }
    }
  }

  // Otherwise walk the decomposition and act on the first step that does not
  // look finished in the current frame. With no event memory the check is
  // purely visual: an open drawer reads as "already opened", a second open of
  // the same drawer is indistinguishable from the first.
  const size_t n = task.subtasks.size();
  for (size_t i = 0; i < n; ++i) {
    const SubtaskSpec& sub = task.subtasks[i];
    bool done = false;
    switch (sub.primitive) {
      case Primitive::Open: done = is_open(sub.target); break;
      case Primitive::Close: done = !is_open(sub.target); break;
      case Primitive::Place:
        done = sub.target.empty() ? visible_at(visible, sub.object, Location::table())
                                  : visible_at(visible, sub.object, Location::in(sub.target));
        break;
      case Primitive::Pour:
        done = false;  // pouring leaves no visible trace
        break;
      case Primitive::Move: {
        done = held == sub.target;
        if (!done && i + 1 < n) {
          const SubtaskSpec& next = task.subtasks[i + 1];
          if (next.primitive == Primitive::Place && next.object == sub.target)
            done = next.target.empty()
                       ? visible_at(visible, sub.target, Location::table())
                       : visible_at(visible, sub.target, Location::in(next.target));
        }
        break;
      }
    }
    if (done) continue;

    if (sub.primitive == Primitive::Move && !visible_anywhere(visible, sub.target) &&
        held != sub.target) {
      // The payload is hidden; probe closed occluders in declaration order.
      for (const auto& c : task.scene.containers)
        if (occludes_when_closed(c.kind) && !is_open(c.name)) {
          decision.subtask = synthesized_open(c.name);
          return decision;
        }
    }
    decision.subtask = sub;
    return decision;
  }

  decision.halted = true;
  return decision;
}

}  // namespace rma
