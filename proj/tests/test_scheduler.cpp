#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rma/scheduler.hpp"

using namespace rma;

namespace {

const std::vector<TaskSpec>& suite() {
  static const std::vector<TaskSpec> s = load_suite("data/suite.json");
  return s;
}

EpisodeConfig base_config() {
  EpisodeConfig cfg;
  cfg.durations = load_durations("data/durations.json");
  cfg.noise.grasp_failure_p = 0.05;
  return cfg;
}

constexpr double kZ95 = 1.6448536269514722;

}  // namespace

TEST_CASE("lognormal fit recovers the target quantiles") {
  LatencySpec spec{true, 0.0, 0.939, 1.136};
  CHECK(std::exp(spec.mu()) == doctest::Approx(0.939));
  CHECK(std::exp(spec.mu() + kZ95 * spec.sigma()) == doctest::Approx(1.136));
  LatencySpec bad{true, 0.0, 1.0, 0.5};
  CHECK_THROWS_AS(bad.sigma(), ConfigError);
  LatencySpec zero{true, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(zero.sigma(), ConfigError);
}

TEST_CASE("profile aggregates a hand-built log") {
  SchedulerLog log;
  log.events.push_back({0.0, "s2_start", ""});
  log.events.push_back({0.3, "s1_chunk", ""});
  log.events.push_back({0.6, "s1_chunk", ""});
  log.events.push_back({1.0, "s2_end", ""});
  log.events.push_back({1.0, "s2_start", ""});
  log.events.push_back({1.2, "s1_chunk", ""});
  log.events.push_back({2.0, "s2_end", ""});
  log.s1_latencies = {0.3, 0.3, 0.3, 0.4};  // trailing scheduled-but-unfinished sample
  log.s2_latencies = {1.0, 1.0};
  SchedulerProfile p = profile(log);
  CHECK(p.s1_chunks == 3);
  CHECK(p.s2_updates == 2);
  CHECK(p.s1_latency_mean == doctest::Approx(0.3));
  CHECK(p.s1_rate_hz == doctest::Approx(3.0 / 0.9));
  CHECK(p.s2_rate_hz == doctest::Approx(1.0));
  CHECK(p.s2_latency_mean == doctest::Approx(1.0));
  CHECK(p.chunks_per_update == doctest::Approx(1.5));
  CHECK(p.rate_ratio == doctest::Approx(3.0 / 0.9));
}

TEST_CASE("fixed latencies give an exact analytic cadence") {
  TimingModel timing;
  timing.s1_chunk = {false, 0.25, 0, 0};
  timing.s2 = {false, 1.0, 0, 0};
  timing.cold_start_extra = 0.5;
  SchedulerLog log = run_timing_profile(timing, 10, 123);
  SchedulerProfile p = profile(log);
  CHECK(p.s2_updates == 10);
  CHECK(p.s1_rate_hz == doctest::Approx(4.0));
  // first update lands at 1.5 (cold start), then one per second
  double first_end = -1;
  for (const auto& e : log.events)
    if (e.kind == "s2_end") {
      first_end = e.time;
      break;
    }
  CHECK(first_end == doctest::Approx(1.5));
  CHECK(p.s2_rate_hz == doctest::Approx(10.0 / 10.5));
}

TEST_CASE("default timing reproduces the target loop rates") {
  TimingModel timing;
  SchedulerLog log = run_timing_profile(timing, 600, 7);
  SchedulerProfile p = profile(log);
  CHECK(p.s2_rate_hz == doctest::Approx(1.06).epsilon(0.10));
  CHECK(p.s1_rate_hz == doctest::Approx(3.40).epsilon(0.10));
  CHECK(p.rate_ratio > 2.5);
  CHECK(p.chunks_per_update > 2.0);
}

TEST_CASE("timing profile is deterministic per seed") {
  TimingModel timing;
  SchedulerLog a = run_timing_profile(timing, 50, 9);
  SchedulerLog b = run_timing_profile(timing, 50, 9);
  REQUIRE(a.events.size() == b.events.size());
  for (size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].kind == b.events[i].kind);
  }
  CHECK(a.s1_latencies == b.s1_latencies);
  SchedulerLog c = run_timing_profile(timing, 50, 10);
  CHECK(a.s1_latencies != c.s1_latencies);
  CHECK_THROWS_AS(run_timing_profile(timing, 0, 1), ConfigError);
}

TEST_CASE("episode runs are byte-identical for identical seeds") {
  EpisodeConfig cfg = base_config();
  const TaskSpec& task = suite()[0];
  EpisodeLog a = run_episode(task, cfg, 11);
  EpisodeLog b = run_episode(task, cfg, 11);
  CHECK(episode_to_json(a) == episode_to_json(b));
  EpisodeLog c = run_episode(task, cfg, 12);
  CHECK(episode_to_json(a) != episode_to_json(c));
}

TEST_CASE("episode logs round-trip through json") {
  EpisodeConfig cfg = base_config();
  EpisodeLog log = run_episode(suite()[0], cfg, 3);
  const std::string text = episode_to_json(log);
  EpisodeLog back = episode_from_json(text);
  CHECK(episode_to_json(back) == text);
  CHECK(back.frames.size() == log.frames.size());
  CHECK(back.success == log.success);
  CHECK_THROWS_AS(episode_from_json("{\"schema\":\"nope\"}"), ConfigError);
  CHECK_THROWS_AS(episode_from_json("not json"), ConfigError);
}

TEST_CASE("oracle episode succeeds with coherent frame and attempt records") {
  EpisodeConfig cfg = base_config();
  const TaskSpec& task = suite()[0];
  EpisodeLog log = run_episode(task, cfg, 0);
  CHECK(log.success);
  CHECK(log.termination == "success");
  REQUIRE_FALSE(log.frames.empty());
  for (size_t i = 0; i < log.frames.size(); ++i) {
    CHECK(log.frames[i].t == static_cast<int>(i) + 1);  // contiguous virtual steps
    CHECK(static_cast<int>(log.frames[i].feature.size()) == kFeatureDim);
  }
  REQUIRE_FALSE(log.attempts.empty());
  for (const auto& a : log.attempts) {
    CHECK(a.start_t >= 1);
    if (a.success) CHECK(a.end_t >= a.start_t);
  }
  // every stage predicate holds at termination
  for (const auto& [desc, holds] : log.predicate_results) CHECK(holds);
  // scheduler alternated: both loops produced events
  CHECK(log.measured.s1_chunks > 0);
  CHECK(log.measured.s2_updates > 0);
}

TEST_CASE("budget exhaustion terminates the episode at the frame cap") {
  EpisodeConfig cfg = base_config();
  cfg.budget_multiplier = 0.05;
  const TaskSpec& task = suite()[0];
  EpisodeLog log = run_episode(task, cfg, 0);
  CHECK_FALSE(log.success);
  CHECK(log.termination == "budget");
  CHECK(static_cast<int>(log.frames.size()) == log.budget_frames);
  CHECK(log.budget_frames == std::lround(0.05 * task.target_steps));
}

TEST_CASE("config validation rejects bad values") {
  EpisodeConfig cfg = base_config();
  cfg.chunk_frames = 0;
  CHECK_THROWS_AS(run_episode(suite()[0], cfg, 0), ConfigError);
  cfg = base_config();
  cfg.min_window_fill = 0;
  CHECK_THROWS_AS(run_episode(suite()[0], cfg, 0), ConfigError);
  cfg = base_config();
  cfg.min_window_fill = cfg.memory.recent_horizon + 1;
  CHECK_THROWS_AS(run_episode(suite()[0], cfg, 0), ConfigError);
  cfg = base_config();
  cfg.thresholds.epsilon = -1;
  CHECK_THROWS_AS(run_episode(suite()[0], cfg, 0), ConfigError);
}

TEST_CASE("cold start delays only the first slow update") {
  EpisodeConfig cfg = base_config();
  EpisodeLog log = run_episode(suite()[0], cfg, 5);
  REQUIRE(log.scheduler.s2_latencies.size() >= 2);
  // The first latency includes the cold-start surcharge; it must dominate the
  // p95 of the steady-state distribution.
  CHECK(log.scheduler.s2_latencies[0] > cfg.timing.cold_start_extra);
  double later_max = 0;
  for (size_t i = 1; i < log.scheduler.s2_latencies.size(); ++i)
    later_max = std::max(later_max, log.scheduler.s2_latencies[i]);
  CHECK(log.scheduler.s2_latencies[0] > later_max * 0.9);
}

TEST_CASE("memory planner episodes write keyframes into the bank") {
  EpisodeConfig cfg = base_config();
  cfg.planner = PlannerKind::memory;
  EpisodeLog log = run_episode(suite()[4], cfg, 0);  // an occlusion task
  CHECK(log.success);
  int writes = 0;
  for (const auto& e : log.scheduler.events)
    if (e.kind == "keyframe_write") ++writes;
  CHECK(writes > 0);
}
