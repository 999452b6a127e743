#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rma/keyframe.hpp"
#include "rma/memory.hpp"
#include "rma/planners.hpp"
#include "rma/primitives.hpp"
#include "rma/tasks.hpp"
#include "rma/world.hpp"

namespace rma {

// Latency in virtual seconds; either a fixed value or a lognormal fitted to
// (p50, p95) quantiles.
struct LatencySpec {
  bool lognormal = true;
  double value = 0.0;  // used when lognormal == false
  double p50 = 0.0;
  double p95 = 0.0;

  double mu() const;
  double sigma() const;
};

struct TimingModel {
  LatencySpec s2{true, 0.0, 0.939, 1.136};
  LatencySpec s1_chunk{true, 0.0, 0.289, 0.365};
  // Added to the first slow-system call of an episode (model load and prompt
  // cache warmup in the system being mimicked).
  double cold_start_extra = 0.813;
};

struct SchedulerLog {
  struct Event {
    double time = 0.0;
    std::string kind;  // s1_chunk | s2_start | s2_end | keyframe_write | ...
    std::string detail;
  };
  std::vector<Event> events;
  std::vector<double> s1_latencies;
  std::vector<double> s2_latencies;
};

struct SchedulerProfile {
  int s1_chunks = 0;
  int s2_updates = 0;
  double s1_rate_hz = 0.0;
  double s2_rate_hz = 0.0;
  double s1_latency_mean = 0.0;
  double s2_latency_mean = 0.0;
  double chunks_per_update = 0.0;  // mean fast-chunk count per slow span
  double rate_ratio = 0.0;         // s1_rate_hz / s2_rate_hz
};

SchedulerProfile profile(const SchedulerLog& log);

// Cadence-only run: both loops free-running with no world attached. Used to
// measure rates over many updates.
SchedulerLog run_timing_profile(const TimingModel& timing, int n_updates, std::uint64_t seed);

struct EpisodeConfig {
  PlannerKind planner = PlannerKind::oracle;
  MemoryConfig memory;
  KinThresholds thresholds;
  int nms_gap = 3;
  NoiseConfig noise;
  TimingModel timing;
  DurationTable durations;
  int chunk_frames = 8;
  double budget_multiplier = 3.0;
  int min_window_fill = 1;  // recent entries required before the slow loop arms
};

struct FrameRecord {
  int t = 0;
  int g = 0;
  Vec3 v{0, 0, 0};
  Vec3 pos{0, 0, 0};
  std::optional<std::string> event;
  int step_id = 0;  // active subtask, 0 when idle
  std::vector<double> feature;
};

struct SubtaskAttempt {
  int step_id = 0;
  std::string instruction;
  Primitive primitive = Primitive::Move;
  int start_t = 0;
  int end_t = 0;
  bool success = false;
  int retries = 0;
  std::string diagnostic;
};

struct EpisodeLog {
  int task_id = 0;
  std::string task_name;
  std::string planner;
  std::uint64_t seed = 0;
  int chunk_frames = 0;
  int recent_horizon = 0;
  std::optional<int> keyframe_cap;
  std::vector<FrameRecord> frames;
  std::vector<SubtaskAttempt> attempts;
  SchedulerLog scheduler;
  SchedulerProfile measured;
  bool success = false;
  std::string termination;  // success | budget | planner_halt
  std::vector<std::pair<std::string, bool>> predicate_results;
  int budget_frames = 0;
};

EpisodeLog run_episode(const TaskSpec& task, const EpisodeConfig& config, std::uint64_t seed);

// Byte-stable serialization; identical seeds and configs produce identical text.
std::string episode_to_json(const EpisodeLog& log);
void save_episode(const EpisodeLog& log, const std::string& path);
EpisodeLog episode_from_json(const std::string& text);
EpisodeLog load_episode(const std::string& path);

}  // namespace rma
