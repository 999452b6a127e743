#include "rma/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace rma {

using nlohmann::json;

StageOutcomes outcomes_from_log(const EpisodeLog& log) {
  StageOutcomes result;
  result.task_id = log.task_id;
  for (const auto& [desc, holds] : log.predicate_results) result.outcomes.push_back(holds);
  return result;
}

double tsr(const std::vector<StageOutcomes>& results) {
  if (results.empty()) throw ConfigError("tsr over empty result set");
  int wins = 0;
  for (const auto& r : results) {
    if (r.outcomes.empty()) throw ConfigError("episode with no stage outcomes");
    if (std::all_of(r.outcomes.begin(), r.outcomes.end(), [](bool b) { return b; })) ++wins;
  }
  return static_cast<double>(wins) / results.size();
}

double csr(const std::vector<StageOutcomes>& results) {
  if (results.empty()) throw ConfigError("csr over empty result set");
  double sum = 0;
  for (const auto& r : results) {
    if (r.outcomes.empty()) throw ConfigError("episode with no stage outcomes");
    const double hits = std::count(r.outcomes.begin(), r.outcomes.end(), true);
    sum += hits / r.outcomes.size();
  }
  return sum / results.size();
}

std::string Rational::percent_one_decimal() const {
  // Round half away from zero on the first decimal of the percentage.
  const double pct = 100.0 * value();
  const double rounded = std::floor(pct * 10.0 + 0.5) / 10.0;
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << rounded << "%";
  return os.str();
}

namespace {

Rational reduced(long long num, long long den) {
  const long long g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

}  // namespace

Rational memory_ratio(const std::vector<TaskSpec>& suite) {
  if (suite.empty()) throw ConfigError("memory_ratio over empty suite");
  long long m = 0, n = 0;
  for (const auto& task : suite) {
    m += task.memory_dependent_count();
    n += static_cast<long long>(task.subtasks.size());
  }
  if (n == 0) throw ConfigError("suite has no subtasks");
  if (m == 0) return {0, 1};
  return reduced(m, n);
}

std::vector<std::pair<int, Rational>> per_task_memory_ratio(const std::vector<TaskSpec>& suite) {
  std::vector<std::pair<int, Rational>> out;
  for (const auto& task : suite) {
    const long long n = static_cast<long long>(task.subtasks.size());
    if (n == 0) throw ConfigError("task without subtasks: " + task.name);
    const long long m = task.memory_dependent_count();
    out.emplace_back(task.task_id, m == 0 ? Rational{0, 1} : reduced(m, n));
  }
  return out;
}

namespace {

int labeled_segments(const EpisodeLog& log) {
  int segments = 0;
  int prev = 0;
  for (const auto& f : log.frames) {
    if (f.step_id != 0 && f.step_id != prev) ++segments;
    prev = f.step_id;
  }
  return segments;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

StatsReport suite_stats(const std::vector<TaskSpec>& suite, const std::vector<EpisodeLog>& logs) {
  if (suite.empty()) throw ConfigError("suite_stats over empty suite");
  StatsReport report;

  std::map<int, std::vector<const EpisodeLog*>> by_task;
  for (const auto& log : logs) by_task[log.task_id].push_back(&log);

  std::ostringstream csv;
  csv << "# " << kStatsSchemaVersion << "\n";
  csv << "task_id,category,tsr,csr,mean_steps,k_i,n_i,m_i\n";

  std::map<int, int> k_histogram;
  std::map<std::string, int> composition;
  double steps_sum = 0;
  int tasks_with_logs = 0;

  for (const auto& task : suite) {
    const int k_i = static_cast<int>(task.stage_predicates.size());
    const int n_i = static_cast<int>(task.subtasks.size());
    const int m_i = task.memory_dependent_count();
    k_histogram[k_i]++;
    composition[to_string(task.category)]++;

    double task_tsr = 0, task_csr = 0, mean_steps = 0;
    auto it = by_task.find(task.task_id);
    if (it == by_task.end()) {
      report.warnings.push_back("no episodes for task " + std::to_string(task.task_id) +
                                "; partial report");
    } else {
      std::vector<StageOutcomes> results;
      for (const EpisodeLog* log : it->second) {
        results.push_back(outcomes_from_log(*log));
        mean_steps += static_cast<double>(log->frames.size());
        report.segment_total += labeled_segments(*log);
      }
      mean_steps /= it->second.size();
      task_tsr = tsr(results);
      task_csr = csr(results);
      steps_sum += mean_steps;
      ++tasks_with_logs;
    }

    csv << task.task_id << "," << to_string(task.category) << "," << fmt(task_tsr) << ","
        << fmt(task_csr) << "," << fmt(mean_steps) << "," << k_i << "," << n_i << "," << m_i
        << "\n";
  }

  if (tasks_with_logs > 0) report.suite_mean_steps = steps_sum / tasks_with_logs;

  const Rational r = memory_ratio(suite);
  json plot;
  plot["schema"] = kStatsSchemaVersion;
  plot["k_histogram"] = json::object();
  for (const auto& [k, count] : k_histogram) plot["k_histogram"][std::to_string(k)] = count;
  plot["composition"] = composition;
  plot["memory_ratio"] = {{"num", r.num}, {"den", r.den}, {"percent", r.percent_one_decimal()}};
  plot["suite_mean_steps"] = report.suite_mean_steps;
  plot["segment_total"] = report.segment_total;
  report.plot_json = plot.dump(2) + "\n";
  report.csv = csv.str();
  return report;
}

}  // namespace rma
