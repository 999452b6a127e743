#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rma/primitives.hpp"

namespace rma {

struct KinThresholds {
  double epsilon = 0.05;  // speed floor, workspace-lengths per step
  double theta_degrees = 30.0;
  double v_floor = 1e-9;  // below this, the cosine clause is skipped

  void validate() const;
};

enum class KeyframeSource { phys, kin_speed, kin_direction };

struct KeyframeSet {
  std::vector<int> indices;  // ascending step indices
  std::map<int, std::set<KeyframeSource>> provenance;
};

// Gripper-bit transitions: {t >= 2 : g_t != g_{t-1}}. The first frame has no
// predecessor and is never flagged.
std::set<int> extract_phys(const std::vector<TrajectoryFrame>& traj);

// Velocity minima and direction changes: ||v_t|| < epsilon, or
// cos(v_t, v_{t-1}) < cos(theta) when both norms are above v_floor.
std::set<int> extract_kin(const std::vector<TrajectoryFrame>& traj,
                          const KinThresholds& thresholds);

// Union with provenance. Runs of kin-only frames spaced closer than nms_gap are
// collapsed to the minimum-speed frame; phys frames are never suppressed.
// nms_gap = 0 disables suppression (exact set union).
KeyframeSet extract_keyframes(const std::vector<TrajectoryFrame>& traj,
                              const KinThresholds& thresholds, int nms_gap);

}  // namespace rma
