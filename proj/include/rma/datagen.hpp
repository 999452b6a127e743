#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rma/predcode.hpp"
#include "rma/scheduler.hpp"
#include "rma/tasks.hpp"

namespace rma {

struct ExportSummary {
  int samples = 0;
  int segments = 0;  // labeled frame spans in the source episode
  std::vector<std::string> warnings;
};

// One JSONL training sample per sliding window (stride 1) over the episode.
// Image slots carry feature-record reference strings instead of base64
// payloads; metadata.prompt_style marks the substitution.
ExportSummary export_jsonl(const EpisodeLog& log, const TaskSpec& task,
                           const KinThresholds& thresholds, int nms_gap, int window,
                           const std::string& out_path);
ExportSummary export_jsonl(const EpisodeLog& log, const TaskSpec& task,
                           const KinThresholds& thresholds, int nms_gap, int window,
                           std::ostream& out);

struct FeatureRecord {
  int t = 0;
  int step_id = 0;
  std::string primitive;  // "idle" when no subtask is active
  int keyframe = 0;
  std::vector<double> x;  // feature at t
  std::vector<double> z;  // teacher feature at t + 1
};

// Per-step (feature, next-feature, labels) records; the final frame has no
// successor and emits nothing.
int export_features(const EpisodeLog& log, const KinThresholds& thresholds, int nms_gap,
                    const std::string& out_path);

std::vector<FeatureRecord> load_features(const std::string& path);
std::vector<PredcodeSample> features_to_samples(const std::vector<FeatureRecord>& records);

}  // namespace rma
