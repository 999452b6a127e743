#include "rma/datagen.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rma {

using nlohmann::json;

namespace {

std::vector<TrajectoryFrame> traj_from_log(const EpisodeLog& log) {
  std::vector<TrajectoryFrame> traj;
  traj.reserve(log.frames.size());
  for (const auto& f : log.frames) {
    TrajectoryFrame t;
    t.t = f.t;
    t.g = f.g;
    t.v = f.v;
    t.pos = f.pos;
    traj.push_back(t);
  }
  return traj;
}

std::string system_prompt(int task_id) {
  std::ostringstream os;
  os << "You are a robotic planning assistant specialized in memory-based task\n"
        "understanding.\n"
        "\n"
        "Your task is to infer the current primitive action from multi-image\n"
        "observation:\n"
        "1. Historical keyframes from earlier in the same trajectory.\n"
        "2. A recent 5-timestep visual window ending at the current frame.\n"
        "\n"
        "Important rules:\n"
        "- Historical keyframes are earlier than the current window.\n"
        "- Each timestep contains two images: one agentview_rgb image and one\n"
        "  eye_in_hand_rgb image.\n"
        "- The recent 5-timestep window is the primary evidence for current action.\n"
        "- If there is no keyframe inside the current window, keyframe_positions\n"
        "  must be an empty list.\n"
        "- Return strict JSON only. Do not output extra text.\n"
        "- Return exactly two fields:\n"
        "  - current_primitive: one primitive from the predefined task"
     << task_id
     << " primitive set.\n"
        "  - keyframe_positions: 1-indexed keyframe positions inside the recent\n"
        "    5-timestep window.";
  return os.str();
}

std::string user_prompt(const TaskSpec& task, int window) {
  std::ostringstream os;
  os << "Global task: Infer the current primitive action from recent visual history\n"
        "for the following task: "
     << task.instruction
     << "\n"
        "\n"
        "Scene description:\n"
        "- The manipulation happens on a tabletop.\n";
  for (const auto& c : task.scene.containers)
    os << "- The " << c.name << " is a " << to_string(c.kind) << ", initially "
       << (c.initial == Openness::open ? "open" : "closed") << ".\n";
  for (const auto& o : task.scene.objects) {
    os << "- The " << o.name << " is a " << to_string(o.kind);
    if (o.initial_container.empty())
      os << " on the table.\n";
    else
      os << " inside the " << o.initial_container << ".\n";
  }
  os << "- Each timestep contains two images: one agentview_rgb image and one\n"
        "  eye_in_hand_rgb image.\n"
        "- Camera order for every timestep: agentview_rgb, eye_in_hand_rgb.\n"
        "\n"
        "Current observation:\n"
        "Recent visual context: "
     << window
     << " consecutive timesteps ending at the current frame\n("
     << 2 * window
     << " images total; two per timestep, ordered as agentview_rgb followed by\n"
        "eye_in_hand_rgb):\n";
  for (int i = 0; i < 2 * window; ++i)
    os << "<image>" << ((i + 1) % 5 == 0 || i + 1 == 2 * window ? "\n" : " ");
  os << "\n"
        "Return strict JSON with fields current_primitive and keyframe_positions\n"
        "(1-indexed positions inside the recent "
     << window << "-timestep context).";
  return os.str();
}

}  // namespace

ExportSummary export_jsonl(const EpisodeLog& log, const TaskSpec& task,
                           const KinThresholds& thresholds, int nms_gap, int window,
                           const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write jsonl file: " + out_path);
  return export_jsonl(log, task, thresholds, nms_gap, window, out);
}

ExportSummary export_jsonl(const EpisodeLog& log, const TaskSpec& task,
                           const KinThresholds& thresholds, int nms_gap, int window,
                           std::ostream& out) {
  if (window < 1) throw ConfigError("window must be positive");
  ExportSummary summary;

  {
    int prev = 0;
    for (const auto& f : log.frames) {
      if (f.step_id != 0 && f.step_id != prev) ++summary.segments;
      prev = f.step_id;
    }
  }

  if (static_cast<int>(log.frames.size()) < window) {
    summary.warnings.push_back("episode shorter than window; nothing exported");
    return summary;
  }

  const std::vector<TrajectoryFrame> traj = traj_from_log(log);
  std::set<int> flagged;
  if (traj.size() >= 2) {
    const KeyframeSet keys = extract_keyframes(traj, thresholds, nms_gap);
    flagged.insert(keys.indices.begin(), keys.indices.end());
  }

  std::map<int, std::string> label_of;
  for (const auto& a : log.attempts)
    if (a.step_id != 0) label_of[a.step_id] = a.instruction;

  const std::string sys = system_prompt(log.task_id);
  const std::string usr = user_prompt(task, window);

  for (size_t start = 0; start + window <= log.frames.size(); ++start) {
    const FrameRecord& last = log.frames[start + window - 1];
    auto lbl = label_of.find(last.step_id);
    if (last.step_id == 0 || lbl == label_of.end()) continue;  // idle frame, no label

    std::vector<int> positions;
    for (int p = 1; p <= window; ++p)
      if (flagged.count(log.frames[start + p - 1].t)) positions.push_back(p);

    int history = 0;
    for (int t : flagged)
      if (t < log.frames[start].t) ++history;

    json assistant;
    assistant["current_primitive"] = lbl->second;
    assistant["keyframe_positions"] = positions;

    json images = json::array();
    for (int p = 0; p < window; ++p) {
      const int t = log.frames[start + p].t;
      std::ostringstream base;
      base << "feature://seed" << log.seed << "/task" << log.task_id << "/frame" << t << "/";
      images.push_back(base.str() + "agentview_rgb");
      images.push_back(base.str() + "eye_in_hand_rgb");
    }

    json line;
    {
      std::ostringstream qid;
      qid << "seed" << log.seed << "_order" << (log.task_id - 1) << "_win" << start << "_r0";
      line["qid"] = qid.str();
    }
    line["messages"] = json::array({json{{"role", "system"}, {"content", sys}},
                                    json{{"role", "user"}, {"content", usr}},
                                    json{{"role", "assistant"}, {"content", assistant.dump()}}});
    line["images"] = images;
    line["metadata"] = {{"task_id", log.task_id},
                        {"prompt_style", "feature_ref"},
                        {"current_primitive", lbl->second},
                        {"keyframe_positions", positions},
                        {"camera_keys", json::array({"agentview_rgb", "eye_in_hand_rgb"})},
                        {"history_keyframe_count", history},
                        {"num_context_frames", window},
                        {"num_context_images", 2 * window},
                        {"image_size", json::array({256, 256})},
                        {"window_start_t", log.frames[start].t},
                        {"window_end_t", last.t},
                        {"planner", log.planner},
                        {"seed", log.seed}};
    out << line.dump() << "\n";
    ++summary.samples;
  }
  return summary;
}

int export_features(const EpisodeLog& log, const KinThresholds& thresholds, int nms_gap,
                    const std::string& out_path) {
  if (log.frames.empty()) throw ConfigError("cannot export features from an empty episode");
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write feature file: " + out_path);

  const std::vector<TrajectoryFrame> traj = traj_from_log(log);
  std::set<int> flagged;
  if (traj.size() >= 2) {
    const KeyframeSet keys = extract_keyframes(traj, thresholds, nms_gap);
    flagged.insert(keys.indices.begin(), keys.indices.end());
  }

  std::map<int, Primitive> primitive_of;
  for (const auto& a : log.attempts) primitive_of[a.step_id] = a.primitive;

  int count = 0;
  for (size_t i = 0; i + 1 < log.frames.size(); ++i) {
    const auto& f = log.frames[i];
    json rec;
    rec["t"] = f.t;
    rec["step_id"] = f.step_id;
    auto it = primitive_of.find(f.step_id);
    rec["primitive"] =
        (f.step_id == 0 || it == primitive_of.end()) ? "idle" : to_string(it->second);
    rec["keyframe"] = flagged.count(f.t) ? 1 : 0;
    rec["x"] = f.feature;
    rec["z"] = log.frames[i + 1].feature;
    out << rec.dump() << "\n";
    ++count;
  }
  return count;
}

std::vector<FeatureRecord> load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open feature file: " + path);
  std::vector<FeatureRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    FeatureRecord r;
    r.t = rec.at("t").get<int>();
    r.step_id = rec.at("step_id").get<int>();
    r.primitive = rec.at("primitive").get<std::string>();
    r.keyframe = rec.at("keyframe").get<int>();
    r.x = rec.at("x").get<std::vector<double>>();
    r.z = rec.at("z").get<std::vector<double>>();
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PredcodeSample> features_to_samples(const std::vector<FeatureRecord>& records) {
  std::vector<PredcodeSample> samples;
  for (const auto& r : records) {
    if (r.primitive == "idle") continue;
    PredcodeSample s;
    s.x = r.x;
    s.z = r.z;
    s.primitive = static_cast<int>(primitive_from_string(r.primitive));
    s.keyframe = r.keyframe;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace rma
