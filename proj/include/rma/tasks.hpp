#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rma/world.hpp"

namespace rma {

inline constexpr int kSuiteSchemaVersion = 1;

enum class Primitive { Move, Place, Pour, Open, Close };

const char* to_string(Primitive p);
Primitive primitive_from_string(const std::string& s);

enum class TaskCategory { transferring, occlusion, counting, sequence };

const char* to_string(TaskCategory c);
TaskCategory category_from_string(const std::string& s);

enum class MemoryKind { occlusion, counting, transferring, sequence };

const char* to_string(MemoryKind k);
MemoryKind memory_kind_from_string(const std::string& s);

struct SubtaskSpec {
  int step_id = 0;  // consecutive from 1
  std::string instruction;
  Primitive primitive = Primitive::Move;
  std::string target;  // container / object / pour destination; empty target = table
  std::string object;  // payload for Place / source for Pour
  bool memory_dependent = false;
  std::optional<MemoryKind> memory_kind;
};

struct TaskSpec {
  int task_id = 0;  // 1..26
  std::string name;
  TaskCategory category = TaskCategory::occlusion;
  std::string instruction;
  SceneDescriptor scene;
  std::vector<SubtaskSpec> subtasks;
  std::vector<StagePredicate> stage_predicates;
  int target_steps = 0;

  int memory_dependent_count() const;
};

struct SuiteLintError : std::runtime_error {
  explicit SuiteLintError(const std::string& what) : std::runtime_error(what) {}
};

// Parses and lints a suite file. Aggregate violations (subtask totals, category
// composition, predicate-count bounds) raise SuiteLintError naming the task and
// the violated constraint.
std::vector<TaskSpec> load_suite(const std::string& path);

// Structural lint over already-parsed tasks; reused by load_suite and tests.
void lint_suite(const std::vector<TaskSpec>& tasks);

// Deterministic stand-in for the VLM decomposer: returns the authored
// decomposition after validating every referenced entity against the scene.
std::vector<SubtaskSpec> decompose(const TaskSpec& task, const WorldState& state);

// Renders the fixed decomposition prompt (system + user) with an image
// placeholder token; byte-stable for fixed inputs.
std::string emit_decomposition_prompt(const TaskSpec& task, const WorldState& state);

}  // namespace rma
