#include "rma/keyframe.hpp"

#include <cmath>
#include <stdexcept>

namespace rma {

void KinThresholds::validate() const {
  if (epsilon < 0) throw ConfigError("epsilon must be nonnegative");
  if (theta_degrees <= 0 || theta_degrees >= 180)
    throw ConfigError("theta must lie in (0, 180) degrees");
  if (v_floor < 0 || v_floor > epsilon)
    throw ConfigError("v_floor must satisfy 0 <= v_floor <= epsilon");
}

namespace {

void require_trajectory(const std::vector<TrajectoryFrame>& traj) {
  if (traj.size() < 2) throw std::invalid_argument("trajectory needs at least two frames");
}

double cosine(const Vec3& a, const Vec3& b) {
  return (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (norm(a) * norm(b));
}

}  // namespace

std::set<int> extract_phys(const std::vector<TrajectoryFrame>& traj) {
  require_trajectory(traj);
  std::set<int> flagged;
  for (size_t i = 1; i < traj.size(); ++i)
    if (traj[i].g != traj[i - 1].g) flagged.insert(traj[i].t);
  return flagged;
}

std::set<int> extract_kin(const std::vector<TrajectoryFrame>& traj,
                          const KinThresholds& thresholds) {
  require_trajectory(traj);
  thresholds.validate();
  const double cos_theta = std::cos(thresholds.theta_degrees * M_PI / 180.0);
  std::set<int> flagged;
  for (size_t i = 1; i < traj.size(); ++i) {
    const double speed = norm(traj[i].v);
    if (speed < thresholds.epsilon) {
      flagged.insert(traj[i].t);
      continue;
    }
    const double prev_speed = norm(traj[i - 1].v);
    if (speed < thresholds.v_floor || prev_speed < thresholds.v_floor) continue;
    if (cosine(traj[i].v, traj[i - 1].v) < cos_theta) flagged.insert(traj[i].t);
  }
  return flagged;
}

KeyframeSet extract_keyframes(const std::vector<TrajectoryFrame>& traj,
                              const KinThresholds& thresholds, int nms_gap) {
  if (nms_gap < 0) throw ConfigError("nms_gap must be nonnegative");
  require_trajectory(traj);
  thresholds.validate();

  const std::set<int> phys = extract_phys(traj);
  const double cos_theta = std::cos(thresholds.theta_degrees * M_PI / 180.0);

  std::map<int, std::set<KeyframeSource>> provenance;
  std::map<int, double> speed_at;
  for (size_t i = 1; i < traj.size(); ++i) {
    const int t = traj[i].t;
    const double speed = norm(traj[i].v);
    speed_at[t] = speed;
    if (phys.count(t)) provenance[t].insert(KeyframeSource::phys);
    if (speed < thresholds.epsilon) provenance[t].insert(KeyframeSource::kin_speed);
    const double prev_speed = norm(traj[i - 1].v);
    if (speed >= thresholds.v_floor && prev_speed >= thresholds.v_floor &&
        cosine(traj[i].v, traj[i - 1].v) < cos_theta)
      provenance[t].insert(KeyframeSource::kin_direction);
  }

  KeyframeSet result;
  if (nms_gap == 0) {
    result.provenance = std::move(provenance);
    for (const auto& [t, sources] : result.provenance) result.indices.push_back(t);
    return result;
  }

  // Group consecutive kin-only flags spaced closer than nms_gap; keep the
  // minimum-speed representative of each group. Phys frames pass through.
  std::vector<int> kin_only;
  std::set<int> kept;
  auto flush = [&]() {
    if (kin_only.empty()) return;
    int best = kin_only.front();
    for (int t : kin_only)
      if (speed_at[t] < speed_at[best]) best = t;
    kept.insert(best);
    kin_only.clear();
  };
  for (const auto& [t, sources] : provenance) {
    if (sources.count(KeyframeSource::phys)) {
      flush();
      kept.insert(t);
      continue;
    }
    if (!kin_only.empty() && t - kin_only.back() >= nms_gap) flush();
    kin_only.push_back(t);
  }
  flush();

  for (int t : kept) {
    result.indices.push_back(t);
    result.provenance[t] = provenance.at(t);
  }
  return result;
}

}  // namespace rma
