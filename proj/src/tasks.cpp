#include "rma/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace rma {

using nlohmann::json;

const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::Move: return "Move";
    case Primitive::Place: return "Place";
    case Primitive::Pour: return "Pour";
    case Primitive::Open: return "Open";
    case Primitive::Close: return "Close";
  }
  return "?";
}

Primitive primitive_from_string(const std::string& s) {
  static const std::map<std::string, Primitive> table = {
      {"Move", Primitive::Move}, {"Place", Primitive::Place}, {"Pour", Primitive::Pour},
      {"Open", Primitive::Open}, {"Close", Primitive::Close},
  };
  auto it = table.find(s);
  if (it == table.end()) throw ConfigError("unknown primitive: " + s);
  return it->second;
}

const char* to_string(TaskCategory c) {
  switch (c) {
    case TaskCategory::transferring: return "transferring";
    case TaskCategory::occlusion: return "occlusion";
    case TaskCategory::counting: return "counting";
    case TaskCategory::sequence: return "sequence";
  }
  return "?";
}

TaskCategory category_from_string(const std::string& s) {
  static const std::map<std::string, TaskCategory> table = {
      {"transferring", TaskCategory::transferring},
      {"occlusion", TaskCategory::occlusion},
      {"counting", TaskCategory::counting},
      {"sequence", TaskCategory::sequence},
  };
  auto it = table.find(s);
  if (it == table.end()) throw ConfigError("unknown task category: " + s);
  return it->second;
}

const char* to_string(MemoryKind k) {
  switch (k) {
    case MemoryKind::occlusion: return "occlusion";
    case MemoryKind::counting: return "counting";
    case MemoryKind::transferring: return "transferring";
    case MemoryKind::sequence: return "sequence";
  }
  return "?";
}

MemoryKind memory_kind_from_string(const std::string& s) {
  static const std::map<std::string, MemoryKind> table = {
      {"occlusion", MemoryKind::occlusion},
      {"counting", MemoryKind::counting},
      {"transferring", MemoryKind::transferring},
      {"sequence", MemoryKind::sequence},
  };
  auto it = table.find(s);
  if (it == table.end()) throw ConfigError("unknown memory kind: " + s);
  return it->second;
}

int TaskSpec::memory_dependent_count() const {
  return static_cast<int>(
      std::count_if(subtasks.begin(), subtasks.end(),
                    [](const SubtaskSpec& s) { return s.memory_dependent; }));
}

namespace {

StagePredicate parse_predicate(const json& j) {
  static const std::map<std::string, StagePredicate::Kind> table = {
      {"in_container", StagePredicate::Kind::in_container},
      {"on_table", StagePredicate::Kind::on_table},
      {"gripper_empty", StagePredicate::Kind::gripper_empty},
      {"container_open", StagePredicate::Kind::container_open},
      {"container_closed", StagePredicate::Kind::container_closed},
      {"visited_all", StagePredicate::Kind::visited_all},
      {"pour_count_eq", StagePredicate::Kind::pour_count_eq},
      {"placed_before", StagePredicate::Kind::placed_before},
      {"placed_after_pours", StagePredicate::Kind::placed_after_pours},
      {"container_count_eq", StagePredicate::Kind::container_count_eq},
  };
  const std::string type = j.at("type").get<std::string>();
  auto it = table.find(type);
  if (it == table.end()) throw ConfigError("unknown predicate type: " + type);
  StagePredicate p;
  p.kind = it->second;
  if (j.contains("entities")) p.entities = j.at("entities").get<std::vector<std::string>>();
  if (j.contains("count")) p.count = j.at("count").get<int>();
  return p;
}

SceneDescriptor parse_scene(const json& j) {
  SceneDescriptor scene;
  for (const auto& c : j.at("containers")) {
    SceneDescriptor::ContainerDecl decl;
    decl.name = c.at("name").get<std::string>();
    decl.kind = entity_kind_from_string(c.at("kind").get<std::string>());
    decl.initial = c.value("open", false) ? Openness::open : Openness::closed;
    scene.containers.push_back(decl);
  }
  for (const auto& o : j.at("objects")) {
    SceneDescriptor::ObjectDecl decl;
    decl.name = o.at("name").get<std::string>();
    decl.kind = entity_kind_from_string(o.value("kind", std::string("item")));
    decl.initial_container = o.value("in", std::string());
    scene.objects.push_back(decl);
  }
  return scene;
}

TaskSpec parse_task(const json& j) {
  TaskSpec task;
  task.task_id = j.at("task_id").get<int>();
  task.name = j.at("name").get<std::string>();
  task.category = category_from_string(j.at("category").get<std::string>());
  task.instruction = j.at("instruction").get<std::string>();
  task.target_steps = j.at("target_steps").get<int>();
  task.scene = parse_scene(j.at("scene"));
  int step_id = 0;
  for (const auto& s : j.at("subtasks")) {
    SubtaskSpec sub;
    sub.step_id = ++step_id;
    sub.instruction = s.at("instruction").get<std::string>();
    sub.primitive = primitive_from_string(s.at("primitive").get<std::string>());
    // A null target means the tabletop (Place back on the table).
    if (s.contains("target") && !s.at("target").is_null())
      sub.target = s.at("target").get<std::string>();
    if (s.contains("object") && !s.at("object").is_null())
      sub.object = s.at("object").get<std::string>();
    sub.memory_dependent = s.value("memory_dependent", false);
    if (s.contains("memory_kind"))
      sub.memory_kind = memory_kind_from_string(s.at("memory_kind").get<std::string>());
    task.subtasks.push_back(sub);
  }
  for (const auto& p : j.at("predicates")) task.stage_predicates.push_back(parse_predicate(p));
  return task;
}

void fail_lint(const std::string& where, const std::string& what) {
  throw SuiteLintError("suite lint: " + where + ": " + what);
}

}  // namespace

void lint_suite(const std::vector<TaskSpec>& tasks) {
  if (tasks.size() != 26)
    fail_lint("suite", "expected 26 tasks, got " + std::to_string(tasks.size()));

  int total_subtasks = 0;
  int total_memory_dependent = 0;
  std::map<TaskCategory, int> composition;
  std::vector<int> predicate_counts;

  for (const auto& task : tasks) {
    const std::string where = "task " + std::to_string(task.task_id) + " (" + task.name + ")";
    if (task.target_steps <= 0) fail_lint(where, "target_steps must be positive");
    const int k = static_cast<int>(task.stage_predicates.size());
    if (k < 3 || k > 9)
      fail_lint(where, "predicate count " + std::to_string(k) + " outside [3,9]");
    predicate_counts.push_back(k);
    composition[task.category]++;

    WorldState state = init_scene(task.scene, 0);
    for (const auto& sub : task.subtasks) {
      total_subtasks++;
      if (sub.memory_dependent) {
        total_memory_dependent++;
        if (!sub.memory_kind)
          fail_lint(where, "memory-dependent subtask " + std::to_string(sub.step_id) +
                               " has no memory_kind");
      } else if (sub.memory_kind) {
        fail_lint(where, "memory-free subtask " + std::to_string(sub.step_id) +
                             " carries a memory_kind");
      }
      if (!sub.target.empty() && !state.has_entity(sub.target))
        fail_lint(where, "subtask target not in scene: " + sub.target);
      if (!sub.object.empty() && !state.has_entity(sub.object))
        fail_lint(where, "subtask object not in scene: " + sub.object);
    }

    for (const auto& p : task.stage_predicates) {
      for (const auto& e : p.entities)
        if (!state.has_entity(e)) fail_lint(where, "predicate entity not in scene: " + e);
    }

    if (task.category == TaskCategory::occlusion) {
      bool has_occluding_containment = false;
      for (const auto& p : task.stage_predicates) {
        if (p.kind != StagePredicate::Kind::in_container) continue;
        auto kind = state.kinds.at(p.entities[1]);
        if (occludes_when_closed(kind)) has_occluding_containment = true;
      }
      if (!has_occluding_containment)
        fail_lint(where, "occlusion task lacks a containment predicate on an occluding container");
    }
  }

  if (total_subtasks != 151)
    fail_lint("suite", "subtask total " + std::to_string(total_subtasks) + " != 151");
  if (total_memory_dependent != 104)
    fail_lint("suite",
              "memory-dependent total " + std::to_string(total_memory_dependent) + " != 104");
  auto want = [&](TaskCategory c, int n) {
    if (composition[c] != n)
      fail_lint("suite", std::string("category ") + to_string(c) + " count " +
                             std::to_string(composition[c]) + " != " + std::to_string(n));
  };
  want(TaskCategory::transferring, 4);
  want(TaskCategory::occlusion, 11);
  want(TaskCategory::counting, 7);
  want(TaskCategory::sequence, 4);

  std::sort(predicate_counts.begin(), predicate_counts.end());
  const double median =
      (predicate_counts[12] + predicate_counts[13]) / 2.0;  // 26 entries
  if (!(median > 5.0))
    fail_lint("suite", "median predicate count " + std::to_string(median) + " not > 5");
}

std::vector<TaskSpec> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open suite file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("suite file parse error: " + std::string(e.what()));
  }
  if (doc.value("schema_version", -1) != kSuiteSchemaVersion)
    throw ConfigError("suite schema_version mismatch (want " +
                      std::to_string(kSuiteSchemaVersion) + ")");
  std::vector<TaskSpec> tasks;
  for (const auto& t : doc.at("tasks")) tasks.push_back(parse_task(t));
  lint_suite(tasks);
  return tasks;
}

std::vector<SubtaskSpec> decompose(const TaskSpec& task, const WorldState& state) {
  for (const auto& sub : task.subtasks) {
    if (!sub.target.empty() && !state.has_entity(sub.target))
      throw ConfigError("decomposition target missing from scene: " + sub.target);
    if (!sub.object.empty() && !state.has_entity(sub.object))
      throw ConfigError("decomposition object missing from scene: " + sub.object);
  }
  return task.subtasks;
}

std::string emit_decomposition_prompt(const TaskSpec& task, const WorldState& state) {
  std::ostringstream os;
  os << "System:\n"
        "You are a robotic data-generation assistant for long-horizon,\n"
        "memory-dependent manipulation tasks.\n"
        "\n"
        "You will be given:\n"
        "1. One RGB image of the current environment.\n"
        "2. A coarse long-horizon task description.\n"
        "\n"
        "Your job is to:\n"
        "- decompose the task into an ordered list of executable subtasks;\n"
        "- assign each subtask to one predefined planner from\n"
        "  {Move, Place, Pour, Open, Close};\n"
        "- keep the subtasks grounded in the visible scene;\n"
        "- preserve memory-dependent structure when later steps depend on earlier\n"
        "  placements, occluded objects, or counted actions;\n"
        "- return strict JSON only.\n"
        "\n"
        "Return exactly one field:\n"
        "- subtasks: a list of ordered subtask entries, each with\n"
        "  step_id, subtask, planner, and target.\n"
        "\n"
        "User:\n"
        "Current environment image:\n"
        "<image>\n"
        "\n"
        "Scene entities: ";
  bool first = true;
  for (const auto& [name, kind] : state.kinds) {
    os << (first ? "" : ", ") << name << " (" << to_string(kind) << ")";
    first = false;
  }
  os << "\n\nLong-horizon task description:\n"
     << task.instruction
     << "\n\nPlease decompose this task into executable subtasks and assign the\n"
        "predefined planner to each step.\n";
  return os.str();
}

}  // namespace rma
