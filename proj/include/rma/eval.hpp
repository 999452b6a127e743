#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rma/scheduler.hpp"
#include "rma/tasks.hpp"

namespace rma {

// Stage outcome bits for one episode, in predicate order.
struct StageOutcomes {
  int task_id = 0;
  std::vector<bool> outcomes;
};

StageOutcomes outcomes_from_log(const EpisodeLog& log);

// Fraction of episodes whose every stage holds.
double tsr(const std::vector<StageOutcomes>& results);

// Mean over episodes of the per-episode stage completion fraction.
double csr(const std::vector<StageOutcomes>& results);

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / den; }
  // One-decimal percent rendering ("68.9%"); the stored value stays exact.
  std::string percent_one_decimal() const;
};

Rational memory_ratio(const std::vector<TaskSpec>& suite);
std::vector<std::pair<int, Rational>> per_task_memory_ratio(const std::vector<TaskSpec>& suite);

inline constexpr const char* kStatsSchemaVersion = "rma-stats-v1";

struct StatsReport {
  std::string csv;        // versioned header + one row per task
  std::string plot_json;  // histogram / composition / ratio payload
  std::vector<std::string> warnings;
  double suite_mean_steps = 0.0;
  int segment_total = 0;  // labeled frame spans across all episodes
};

StatsReport suite_stats(const std::vector<TaskSpec>& suite,
                        const std::vector<EpisodeLog>& logs);

}  // namespace rma
