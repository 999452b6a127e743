#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rma/tasks.hpp"
#include "rma/world.hpp"

namespace rma {

using Vec3 = std::array<double, 3>;

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& v);
double norm(const Vec3& v);

struct TrajectoryFrame {
  int t = 0;  // 1-based step index
  int g = 0;  // gripper bit
  Vec3 v{0, 0, 0};
  Vec3 pos{0, 0, 0};
  std::optional<WorldEvent> event;  // event applied at this step, if any
};

struct NoiseConfig {
  double grasp_failure_p = 0.0;
  double waypoint_jitter = 0.01;  // workspace-lengths
  int max_retries = 3;
};

struct DurationTable {
  // Per-primitive travel frames per leg, before per-task scaling.
  std::map<Primitive, int> travel_frames = {
      {Primitive::Move, 18}, {Primitive::Place, 18}, {Primitive::Pour, 14},
      {Primitive::Open, 12}, {Primitive::Close, 12},
  };
  int dwell_frames = 6;
  std::map<int, double> task_scale;  // task_id -> multiplier, default 1

  double scale_for(int task_id) const;
  int scaled_travel(Primitive p, int task_id) const;
};

struct PrimitivePlan {
  SubtaskSpec subtask;
  std::vector<Vec3> waypoints;
  std::vector<int> leg_frames;              // interpolation frames per leg
  std::map<int, WorldEvent> event_schedule;  // step offset -> event
  std::vector<int> dwell_offsets;            // step offsets with zero velocity
  int duration = 0;
};

struct ExecutionOutcome {
  std::vector<TrajectoryFrame> frames;
  std::vector<WorldState> states;  // world state after each frame, parallel to frames
  bool success = false;
  int retries_used = 0;
  std::string diagnostic;
};

struct PlanError : std::runtime_error {
  explicit PlanError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic workspace layout: every entity gets a fixed abstract position.
Vec3 entity_position(const WorldState& state, const std::string& name);

PrimitivePlan plan_primitive(const SubtaskSpec& subtask, const WorldState& state,
                             const Vec3& ee_start, const DurationTable& durations,
                             int task_id, const NoiseConfig& noise, std::uint64_t seed);

// Executes a plan against the world, with grasp-failure retries. Frames are
// numbered starting at base_step + 1.
std::pair<WorldState, ExecutionOutcome> execute(const PrimitivePlan& plan, WorldState state,
                                                const DurationTable& durations, int task_id,
                                                const NoiseConfig& noise, std::uint64_t seed,
                                                int base_step = 0);

// Post-condition used by the Stage-2 retry checker and the planners.
bool subtask_postcondition(const SubtaskSpec& subtask, const WorldState& state);

// Fits per-task scale factors so that mean generated episode length matches each
// task's target_steps. episode_length must report the mean episode length for a
// task under the candidate table.
struct CalibrationError : std::runtime_error {
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

DurationTable calibrate_durations(
    const std::vector<TaskSpec>& suite, const DurationTable& base,
    const std::function<double(const TaskSpec&, const DurationTable&)>& episode_length,
    int iterations = 3);

void save_durations(const DurationTable& table, const std::string& path);
DurationTable load_durations(const std::string& path);

}  // namespace rma
