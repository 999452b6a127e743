#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rma/keyframe.hpp"
#include "rma/memory.hpp"
#include "rma/tasks.hpp"
#include "rma/world.hpp"

namespace rma {

enum class PlannerKind { oracle, reactive, memory };

const char* to_string(PlannerKind k);
PlannerKind planner_kind_from_string(const std::string& s);

struct PlannerDecision {
  std::optional<SubtaskSpec> subtask;
  std::vector<int> keyframe_positions;  // 1-based positions inside the recent window
  bool halted = false;
};

// Full state access plus the trajectory so far; the upper-bound reference.
struct OracleInputs {
  const WorldState* state = nullptr;
  const std::vector<TrajectoryFrame>* trajectory = nullptr;
  std::vector<int> window_steps;  // steps of the recent-window entries, ascending
};

PlannerDecision oracle_plan(const TaskSpec& task, const OracleInputs& inputs,
                            const KinThresholds& thresholds, int nms_gap);

// The reactive planner's input type carries a single observation and nothing
// else; the accessor methods keep an audit trail of every field it touches.
class ReactiveInput {
 public:
  explicit ReactiveInput(const Observation& obs) : obs_(&obs) {}

  const std::vector<std::pair<std::string, Location>>& visible_objects() const {
    audit_.push_back("visible_objects");
    return obs_->visible_objects;
  }
  const std::map<std::string, Openness>& container_states() const {
    audit_.push_back("container_states");
    return obs_->container_states;
  }
  const std::optional<std::string>& held() const {
    audit_.push_back("gripper.held");
    return obs_->held_visible;
  }
  const std::vector<std::string>& audit() const { return audit_; }

 private:
  const Observation* obs_;
  mutable std::vector<std::string> audit_;
};

PlannerDecision reactive_plan(const TaskSpec& task, const ReactiveInput& input);

PlannerDecision memory_plan(const TaskSpec& task, const MemoryView& view);

// Belief reconstructed from a memory view; exposed for tests.
struct MemoryBelief {
  std::map<std::string, int> opens;
  std::map<std::string, int> closes;
  std::map<std::pair<std::string, std::string>, int> pours;
  std::map<std::pair<std::string, std::string>, int> places;  // (object, dest|""=table)
  std::optional<Observation> current;
};

MemoryBelief reconstruct_belief(const MemoryView& view);

}  // namespace rma
