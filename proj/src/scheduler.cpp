#include "rma/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "rma/rng.hpp"

namespace rma {

using nlohmann::json;

namespace {

// z-score of the 95th percentile; maps a (p50, p95) pair onto lognormal
// parameters: mu = ln(p50), sigma = ln(p95/p50) / z.
constexpr double kZ95 = 1.6448536269514722;

}  // namespace

double LatencySpec::mu() const { return std::log(p50); }

double LatencySpec::sigma() const {
  if (p50 <= 0 || p95 <= p50) throw ConfigError("latency quantiles need 0 < p50 < p95");
  return std::log(p95 / p50) / kZ95;
}

namespace {

double sample_latency(const LatencySpec& spec, Rng& rng) {
  if (!spec.lognormal) {
    if (spec.value <= 0) throw ConfigError("fixed latency must be positive");
    return spec.value;
  }
  return rng.lognormal(spec.mu(), spec.sigma());
}

bool same_directive(const SubtaskSpec& a, const SubtaskSpec& b) {
  return a.step_id == b.step_id && a.primitive == b.primitive && a.target == b.target &&
         a.object == b.object;
}

struct ActiveFeed {
  SubtaskSpec subtask;
  std::vector<TrajectoryFrame> frames;
  std::vector<WorldState> states;
  size_t next = 0;
  bool success = false;
  int retries = 0;
  std::string diagnostic;
  int start_t = 0;
};

struct PendingS2 {
  double due = 0.0;
  PlannerDecision decision;
  std::vector<std::pair<int, Observation>> window;
};

struct EpisodeRunner {
  const TaskSpec& task;
  const EpisodeConfig& config;
  std::uint64_t seed;

  WorldState world;
  Vec3 ee{0, 0, 0.4};
  std::vector<TrajectoryFrame> traj;
  MemoryBank bank;
  EpisodeLog log;

  Rng rng_s1;
  Rng rng_s2;
  std::optional<ActiveFeed> feed;
  std::optional<PendingS2> pending;
  std::optional<std::pair<SubtaskSpec, bool>> last_attempt;
  bool first_s2 = true;
  bool terminated = false;
  int plan_counter = 0;
  double chunk_due = 0.0;

  EpisodeRunner(const TaskSpec& t, const EpisodeConfig& c, std::uint64_t s)
      : task(t),
        config(c),
        seed(s),
        world(init_scene(t.scene, s)),
        bank(c.memory),
        rng_s1(derive_seed(s, 0x73316c74ULL)),
        rng_s2(derive_seed(s, 0x73326c74ULL)) {}

  void note(double time, const std::string& kind, const std::string& detail) {
    log.scheduler.events.push_back({time, kind, detail});
  }

  bool predicates_hold() const {
    for (const auto& p : task.stage_predicates)
      if (!check_predicate(world, p)) return false;
    return !task.stage_predicates.empty();
  }

  void terminate(const std::string& reason, double time) {
    terminated = true;
    if (feed) finalize_feed(false, time);
    log.success = reason == "success";
    log.termination = reason;
    note(time, "episode_end", reason);
    for (const auto& p : task.stage_predicates)
      log.predicate_results.emplace_back(p.describe(), check_predicate(world, p));
  }

  void finalize_feed(bool superseded, double time) {
    SubtaskAttempt attempt;
    attempt.step_id = feed->subtask.step_id;
    attempt.instruction = feed->subtask.instruction;
    attempt.primitive = feed->subtask.primitive;
    attempt.start_t = feed->start_t;
    attempt.end_t = feed->next == 0 ? feed->start_t - 1 : feed->frames[feed->next - 1].t;
    // A feed cut short (superseded, or episode over) still counts as a success
    // if its goal already holds; plans keep moving past the goal frame (retreat
    // and settle legs), so the cut itself is not a failure signal.
    const bool consumed_all = feed->next == feed->frames.size();
    const bool goal_met = subtask_postcondition(feed->subtask, world);
    attempt.success = consumed_all ? feed->success : goal_met;
    attempt.retries = feed->retries;
    attempt.diagnostic = consumed_all  ? feed->diagnostic
                         : goal_met    ? "goal reached; remaining motion dropped"
                         : superseded  ? "superseded by a newer directive"
                                       : "interrupted before completion";
    log.attempts.push_back(attempt);
    last_attempt = {feed->subtask, attempt.success};
    if (feed->next > 0) ee = feed->frames[feed->next - 1].pos;
    feed.reset();
    if (superseded) note(time, "s1_abort", "step_id=" + std::to_string(attempt.step_id));
  }

  void start_plan(const SubtaskSpec& subtask, double time) {
    const std::uint64_t plan_seed = derive_seed(seed, 0xA000ULL + plan_counter++);
    PrimitivePlan plan;
    try {
      plan = plan_primitive(subtask, world, ee, config.durations, task.task_id, config.noise,
                            plan_seed);
    } catch (const PlanError& e) {
      note(time, "plan_error", e.what());
      SubtaskAttempt attempt;
      attempt.step_id = subtask.step_id;
      attempt.instruction = subtask.instruction;
      attempt.primitive = subtask.primitive;
      attempt.start_t = world.step;
      attempt.end_t = world.step;
      attempt.diagnostic = e.what();
      log.attempts.push_back(attempt);
      last_attempt = {subtask, false};
      return;
    }
    auto [final_state, outcome] =
        execute(plan, world, config.durations, task.task_id, config.noise, plan_seed, world.step);
    (void)final_state;  // committed frame by frame as the fast loop feeds
    ActiveFeed f;
    f.subtask = subtask;
    f.frames = std::move(outcome.frames);
    f.states = std::move(outcome.states);
    f.success = outcome.success;
    f.retries = outcome.retries_used;
    f.diagnostic = outcome.diagnostic;
    f.start_t = world.step + 1;
    feed = std::move(f);
    note(time, "plan_start",
         "step_id=" + std::to_string(subtask.step_id) + " " + subtask.instruction);
  }

  void maybe_trigger_s2(double time) {
    if (terminated || pending || static_cast<int>(bank.recent().size()) < config.min_window_fill)
      return;

    PendingS2 p;
    for (const auto& entry : bank.recent()) p.window.emplace_back(entry.step, entry.obs);

    // The decision is a pure function of the trigger-time snapshot; the
    // latency only delays when it lands.
    switch (config.planner) {
      case PlannerKind::oracle: {
        OracleInputs inputs;
        inputs.state = &world;
        inputs.trajectory = &traj;
        for (const auto& [step, obs] : p.window) inputs.window_steps.push_back(step);
        p.decision = oracle_plan(task, inputs, config.thresholds, config.nms_gap);
        break;
      }
      case PlannerKind::reactive: {
        const Observation obs = observe(world);
        ReactiveInput input(obs);
        p.decision = reactive_plan(task, input);
        break;
      }
      case PlannerKind::memory:
        p.decision = memory_plan(task, bank.snapshot());
        break;
    }

    double latency = sample_latency(config.timing.s2, rng_s2);
    if (first_s2) {
      latency += config.timing.cold_start_extra;
      first_s2 = false;
    }
    p.due = time + latency;
    log.scheduler.s2_latencies.push_back(latency);
    note(time, "s2_start", "");
    pending = std::move(p);
  }

  void complete_s2() {
    const double time = pending->due;
    PendingS2 p = std::move(*pending);
    pending.reset();
    note(time, "s2_end", "");

    for (int pos : p.decision.keyframe_positions) {
      if (pos < 1 || pos > static_cast<int>(p.window.size())) continue;
      const auto& [step, obs] = p.window[pos - 1];
      const bool stale = !bank.keyframes().empty() && step <= bank.keyframes().back().step;
      if (stale) {
        note(time, "keyframe_stale", "step=" + std::to_string(step));
      } else {
        bank.write_keyframe(step, obs);
        note(time, "keyframe_write", "step=" + std::to_string(step));
      }
    }

    if (p.decision.halted) {
      if (!feed) {
        terminate("planner_halt", time);
        return;
      }
    } else if (p.decision.subtask) {
      const SubtaskSpec& directive = *p.decision.subtask;
      if (feed && same_directive(feed->subtask, directive)) {
        note(time, "directive_active", "step_id=" + std::to_string(directive.step_id));
      } else if (feed) {
        finalize_feed(true, time);
        start_plan(directive, time);
      } else if (last_attempt && last_attempt->second &&
                 same_directive(last_attempt->first, directive)) {
        note(time, "directive_stale", "step_id=" + std::to_string(directive.step_id));
      } else {
        start_plan(directive, time);
      }
    }
    maybe_trigger_s2(time);
  }

  void run_chunk() {
    // chunk_due is when the in-flight chunk lands; its frames commit then.
    const double time = chunk_due;
    std::optional<std::pair<int, Observation>> salient;
    std::pair<int, Observation> last{0, {}};
    int fed = 0;
    for (int k = 0; k < config.chunk_frames && !terminated; ++k) {
      TrajectoryFrame frame;
      if (feed && feed->next < feed->frames.size()) {
        frame = feed->frames[feed->next];
        world = feed->states[feed->next];
        ++feed->next;
      } else {
        world = advance_step(std::move(world));
        frame.t = world.step;
        frame.g = world.gripper.g;
        frame.pos = ee;
      }
      traj.push_back(frame);
      ++fed;

      const Observation obs = observe(world);
      FrameRecord record;
      record.t = frame.t;
      record.g = frame.g;
      record.v = frame.v;
      record.pos = frame.pos;
      if (frame.event) record.event = to_string(*frame.event);
      record.step_id = feed ? feed->subtask.step_id : 0;
      record.feature = obs.feature;
      log.frames.push_back(std::move(record));

      last = {frame.t, obs};
      if (frame.event) salient = last;

      if (feed && feed->next == feed->frames.size()) finalize_feed(false, time);

      if (predicates_hold()) {
        terminate("success", time);
      } else if (static_cast<int>(traj.size()) >= log.budget_frames) {
        terminate("budget", time);
      }
    }

    if (fed > 0) {
      const auto& push = salient ? *salient : last;
      bank.push_frame(push.first, push.second);
      note(time, "s1_chunk",
           "frames=" + std::to_string(traj.back().t - fed + 1) + ".." +
               std::to_string(traj.back().t));
    }
    const double lat = sample_latency(config.timing.s1_chunk, rng_s1);
    log.scheduler.s1_latencies.push_back(lat);
    chunk_due = time + lat;
    if (!terminated) maybe_trigger_s2(time);
  }

  EpisodeLog run() {
    log.task_id = task.task_id;
    log.task_name = task.name;
    log.planner = to_string(config.planner);
    log.seed = seed;
    log.chunk_frames = config.chunk_frames;
    log.recent_horizon = config.memory.recent_horizon;
    log.keyframe_cap = config.memory.keyframe_cap;
    log.budget_frames = std::max(
        config.chunk_frames,
        static_cast<int>(std::lround(config.budget_multiplier * task.target_steps)));

    chunk_due = sample_latency(config.timing.s1_chunk, rng_s1);
    log.scheduler.s1_latencies.push_back(chunk_due);
    while (!terminated) {
      if (pending && pending->due < chunk_due)
        complete_s2();
      else
        run_chunk();
    }
    log.measured = profile(log.scheduler);
    return std::move(log);
  }
};

}  // namespace

EpisodeLog run_episode(const TaskSpec& task, const EpisodeConfig& config, std::uint64_t seed) {
  config.thresholds.validate();
  if (config.chunk_frames < 1) throw ConfigError("chunk_frames must be positive");
  if (config.min_window_fill < 1 || config.min_window_fill > config.memory.recent_horizon)
    throw ConfigError("min_window_fill must lie in [1, recent_horizon]");
  EpisodeRunner runner(task, config, seed);
  return runner.run();
}

SchedulerProfile profile(const SchedulerLog& log) {
  SchedulerProfile p;
  // The latency vectors can hold one final scheduled-but-unfinished sample;
  // only completed spans (the logged events) count.
  for (const auto& e : log.events)
    if (e.kind == "s1_chunk") ++p.s1_chunks;
  double s1_sum = 0;
  for (int i = 0; i < p.s1_chunks && i < static_cast<int>(log.s1_latencies.size()); ++i)
    s1_sum += log.s1_latencies[i];
  if (p.s1_chunks > 0 && s1_sum > 0) {
    p.s1_latency_mean = s1_sum / p.s1_chunks;
    p.s1_rate_hz = p.s1_chunks / s1_sum;
  }

  double first_start = -1, last_end = -1;
  int chunk_since_update = 0;
  std::vector<int> span_chunks;
  for (const auto& e : log.events) {
    if (e.kind == "s2_start" && first_start < 0) first_start = e.time;
    if (e.kind == "s1_chunk") ++chunk_since_update;
    if (e.kind == "s2_end") {
      ++p.s2_updates;
      last_end = e.time;
      span_chunks.push_back(chunk_since_update);
      chunk_since_update = 0;
    }
  }
  if (p.s2_updates > 0) {
    double lat_sum = 0;
    for (int i = 0; i < p.s2_updates && i < static_cast<int>(log.s2_latencies.size()); ++i)
      lat_sum += log.s2_latencies[i];
    p.s2_latency_mean = lat_sum / p.s2_updates;
    if (last_end > first_start) p.s2_rate_hz = p.s2_updates / (last_end - first_start);
    double spans = 0;
    for (int c : span_chunks) spans += c;
    p.chunks_per_update = spans / p.s2_updates;
  }
  if (p.s2_rate_hz > 0) p.rate_ratio = p.s1_rate_hz / p.s2_rate_hz;
  return p;
}

SchedulerLog run_timing_profile(const TimingModel& timing, int n_updates, std::uint64_t seed) {
  if (n_updates < 1) throw ConfigError("n_updates must be positive");
  SchedulerLog log;
  Rng rng_s1(derive_seed(seed, 0x73316c74ULL));
  Rng rng_s2(derive_seed(seed, 0x73326c74ULL));

  double chunk_due = sample_latency(timing.s1_chunk, rng_s1);
  log.s1_latencies.push_back(chunk_due);
  double s2_due = sample_latency(timing.s2, rng_s2) + timing.cold_start_extra;
  log.s2_latencies.push_back(s2_due);
  log.events.push_back({0.0, "s2_start", ""});
  int updates = 0;

  while (updates < n_updates) {
    if (s2_due < chunk_due) {
      log.events.push_back({s2_due, "s2_end", ""});
      if (++updates == n_updates) break;
      log.events.push_back({s2_due, "s2_start", ""});
      const double lat = sample_latency(timing.s2, rng_s2);
      log.s2_latencies.push_back(lat);
      s2_due += lat;
    } else {
      log.events.push_back({chunk_due, "s1_chunk", ""});
      const double lat = sample_latency(timing.s1_chunk, rng_s1);
      log.s1_latencies.push_back(lat);
      chunk_due += lat;
    }
  }
  return log;
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

std::string episode_to_json(const EpisodeLog& log) {
  json j;
  j["schema"] = "rma-episode-v1";
  j["task_id"] = log.task_id;
  j["task_name"] = log.task_name;
  j["planner"] = log.planner;
  j["seed"] = log.seed;
  j["chunk_frames"] = log.chunk_frames;
  j["recent_horizon"] = log.recent_horizon;
  j["keyframe_cap"] = log.keyframe_cap ? json(*log.keyframe_cap) : json(nullptr);
  j["budget_frames"] = log.budget_frames;
  j["success"] = log.success;
  j["termination"] = log.termination;

  j["predicates"] = json::array();
  for (const auto& [desc, holds] : log.predicate_results)
    j["predicates"].push_back({{"predicate", desc}, {"holds", holds}});

  j["frames"] = json::array();
  for (const auto& f : log.frames) {
    json fj{{"t", f.t},       {"g", f.g},
            {"v", vec3_json(f.v)},   {"pos", vec3_json(f.pos)},
            {"step_id", f.step_id},  {"feature", f.feature}};
    if (f.event) fj["event"] = *f.event;
    j["frames"].push_back(std::move(fj));
  }

  j["attempts"] = json::array();
  for (const auto& a : log.attempts)
    j["attempts"].push_back({{"step_id", a.step_id},
                             {"instruction", a.instruction},
                             {"primitive", to_string(a.primitive)},
                             {"start_t", a.start_t},
                             {"end_t", a.end_t},
                             {"success", a.success},
                             {"retries", a.retries},
                             {"diagnostic", a.diagnostic}});

  j["scheduler"]["events"] = json::array();
  for (const auto& e : log.scheduler.events)
    j["scheduler"]["events"].push_back({{"time", e.time}, {"kind", e.kind}, {"detail", e.detail}});
  j["scheduler"]["s1_latencies"] = log.scheduler.s1_latencies;
  j["scheduler"]["s2_latencies"] = log.scheduler.s2_latencies;

  j["measured"] = {{"s1_chunks", log.measured.s1_chunks},
                   {"s2_updates", log.measured.s2_updates},
                   {"s1_rate_hz", log.measured.s1_rate_hz},
                   {"s2_rate_hz", log.measured.s2_rate_hz},
                   {"s1_latency_mean", log.measured.s1_latency_mean},
                   {"s2_latency_mean", log.measured.s2_latency_mean},
                   {"chunks_per_update", log.measured.chunks_per_update},
                   {"rate_ratio", log.measured.rate_ratio}};
  return j.dump(2) + "\n";
}

void save_episode(const EpisodeLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write episode log: " + path);
  out << episode_to_json(log);
}

namespace {

Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

EpisodeLog episode_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("episode log parse error: " + std::string(e.what()));
  }
  if (j.value("schema", "") != "rma-episode-v1") throw ConfigError("unexpected episode schema");

  EpisodeLog log;
  log.task_id = j.at("task_id").get<int>();
  log.task_name = j.at("task_name").get<std::string>();
  log.planner = j.at("planner").get<std::string>();
  log.seed = j.at("seed").get<std::uint64_t>();
  log.chunk_frames = j.at("chunk_frames").get<int>();
  log.recent_horizon = j.at("recent_horizon").get<int>();
  if (!j.at("keyframe_cap").is_null()) log.keyframe_cap = j.at("keyframe_cap").get<int>();
  log.budget_frames = j.at("budget_frames").get<int>();
  log.success = j.at("success").get<bool>();
  log.termination = j.at("termination").get<std::string>();

  for (const auto& p : j.at("predicates"))
    log.predicate_results.emplace_back(p.at("predicate").get<std::string>(),
                                       p.at("holds").get<bool>());
  for (const auto& fj : j.at("frames")) {
    FrameRecord f;
    f.t = fj.at("t").get<int>();
    f.g = fj.at("g").get<int>();
    f.v = vec3_from(fj.at("v"));
    f.pos = vec3_from(fj.at("pos"));
    if (fj.contains("event")) f.event = fj.at("event").get<std::string>();
    f.step_id = fj.at("step_id").get<int>();
    f.feature = fj.at("feature").get<std::vector<double>>();
    log.frames.push_back(std::move(f));
  }
  for (const auto& aj : j.at("attempts")) {
    SubtaskAttempt a;
    a.step_id = aj.at("step_id").get<int>();
    a.instruction = aj.at("instruction").get<std::string>();
    a.primitive = primitive_from_string(aj.at("primitive").get<std::string>());
    a.start_t = aj.at("start_t").get<int>();
    a.end_t = aj.at("end_t").get<int>();
    a.success = aj.at("success").get<bool>();
    a.retries = aj.at("retries").get<int>();
    a.diagnostic = aj.at("diagnostic").get<std::string>();
    log.attempts.push_back(std::move(a));
  }
  for (const auto& ej : j.at("scheduler").at("events"))
    log.scheduler.events.push_back({ej.at("time").get<double>(), ej.at("kind").get<std::string>(),
                                    ej.at("detail").get<std::string>()});
  log.scheduler.s1_latencies = j.at("scheduler").at("s1_latencies").get<std::vector<double>>();
  log.scheduler.s2_latencies = j.at("scheduler").at("s2_latencies").get<std::vector<double>>();

  const json& m = j.at("measured");
  log.measured.s1_chunks = m.at("s1_chunks").get<int>();
  log.measured.s2_updates = m.at("s2_updates").get<int>();
  log.measured.s1_rate_hz = m.at("s1_rate_hz").get<double>();
  log.measured.s2_rate_hz = m.at("s2_rate_hz").get<double>();
  log.measured.s1_latency_mean = m.at("s1_latency_mean").get<double>();
  log.measured.s2_latency_mean = m.at("s2_latency_mean").get<double>();
  log.measured.chunks_per_update = m.at("chunks_per_update").get<double>();
  log.measured.rate_ratio = m.at("rate_ratio").get<double>();
  return log;
}

EpisodeLog load_episode(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open episode log: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return episode_from_json(text);
}

}  // namespace rma
