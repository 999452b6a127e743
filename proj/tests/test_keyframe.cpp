#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rma/keyframe.hpp"
#include "rma/rng.hpp"

using namespace rma;

namespace {

// Independent re-statement of the flagging rules, written against the math
// rather than the implementation: gripper transitions union velocity minima
// union direction changes.
std::set<int> brute_force_union(const std::vector<TrajectoryFrame>& traj,
                                const KinThresholds& th) {
  std::set<int> flagged;
  const double cos_theta = std::cos(th.theta_degrees * M_PI / 180.0);
  for (size_t i = 1; i < traj.size(); ++i) {
    const auto& cur = traj[i];
    const auto& prev = traj[i - 1];
    if (cur.g != prev.g) flagged.insert(cur.t);
    const double sp = norm(cur.v);
    const double sp_prev = norm(prev.v);
    if (sp < th.epsilon) flagged.insert(cur.t);
    if (sp >= th.v_floor && sp_prev >= th.v_floor) {
      const double dot =
          cur.v[0] * prev.v[0] + cur.v[1] * prev.v[1] + cur.v[2] * prev.v[2];
      if (dot / (sp * sp_prev) < cos_theta) flagged.insert(cur.t);
    }
  }
  return flagged;
}

std::vector<TrajectoryFrame> random_trajectory(Rng& rng, int length) {
  std::vector<TrajectoryFrame> traj(length);
  Vec3 pos{0, 0, 0};
  int g = 0;
  for (int i = 0; i < length; ++i) {
    if (rng.bernoulli(0.05)) g ^= 1;
    Vec3 v{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    if (rng.bernoulli(0.15)) v = {0, 0, 0};                  // dwell frames
    if (rng.bernoulli(0.1)) v = {1e-12 * v[0], 0, 0};        // sub-floor speeds
    pos = pos + v;
    traj[i] = {i + 1, g, v, pos, std::nullopt};
  }
  return traj;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("threshold validation") {
  KinThresholds th;
  CHECK_NOTHROW(th.validate());
  th.epsilon = -0.1;
  CHECK_THROWS_AS(th.validate(), ConfigError);
  th = {};
  th.theta_degrees = 0;
  CHECK_THROWS_AS(th.validate(), ConfigError);
  th = {};
  th.theta_degrees = 180;
  CHECK_THROWS_AS(th.validate(), ConfigError);
  th = {};
  th.v_floor = th.epsilon * 2;
  CHECK_THROWS_AS(th.validate(), ConfigError);
}

TEST_CASE("short trajectories are rejected") {
  std::vector<TrajectoryFrame> one{{1, 0, {0, 0, 0}, {0, 0, 0}, std::nullopt}};
  KinThresholds th;
  CHECK_THROWS(extract_phys(one));
  CHECK_THROWS(extract_kin(one, th));
  CHECK_THROWS(extract_keyframes(one, th, 0));
  CHECK_THROWS_AS(extract_keyframes({{1, 0, {0, 0, 0}, {0, 0, 0}, std::nullopt},
                                     {2, 0, {0.1, 0, 0}, {0.1, 0, 0}, std::nullopt}},
                                    th, -1),
                  ConfigError);
}

TEST_CASE("gripper transitions are flagged, the first frame never is") {
  std::vector<TrajectoryFrame> traj;
  int gs[] = {1, 1, 0, 0, 1};
  for (int i = 0; i < 5; ++i)
    traj.push_back({i + 1, gs[i], {0.1, 0, 0}, {0.1 * (i + 1), 0, 0}, std::nullopt});
  std::set<int> phys = extract_phys(traj);
  CHECK(phys == std::set<int>{3, 5});
  CHECK(phys.count(1) == 0);  // t=1 has no predecessor even though g starts at 1
}

TEST_CASE("velocity minima and direction changes are flagged") {
  KinThresholds th;
  th.epsilon = 0.05;
  th.theta_degrees = 30.0;
  std::vector<TrajectoryFrame> traj;
  // steady +x motion, a right-angle turn at t=4, a dwell at t=6
  Vec3 vs[] = {{0.1, 0, 0}, {0.1, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}, {0, 0.1, 0}, {0, 0, 0}};
  Vec3 pos{0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    pos = pos + vs[i];
    traj.push_back({i + 1, 0, vs[i], pos, std::nullopt});
  }
  std::set<int> kin = extract_kin(traj, th);
  CHECK(kin == std::set<int>{4, 6});  // 90-degree turn and stop
}

TEST_CASE("frames below the velocity floor skip the cosine clause") {
  KinThresholds th;
  th.epsilon = 0.05;
  th.v_floor = 1e-9;
  std::vector<TrajectoryFrame> traj;
  // opposite directions but tiny magnitudes at t=2: speed clause fires anyway
  traj.push_back({1, 0, {1e-12, 0, 0}, {0, 0, 0}, std::nullopt});
  traj.push_back({2, 0, {-1e-12, 0, 0}, {0, 0, 0}, std::nullopt});
  traj.push_back({3, 0, {0.1, 0, 0}, {0.1, 0, 0}, std::nullopt});
  std::set<int> kin = extract_kin(traj, th);
  CHECK(kin.count(2) == 1);   // flagged as a speed minimum, not a turn
  CHECK(kin.count(3) == 0);   // prev below floor: cosine clause skipped
}

TEST_CASE("union with nms 0 equals the brute-force oracle on random trajectories") {
  Rng rng(2024);
  KinThresholds th;
  for (int trial = 0; trial < 300; ++trial) {
    th.epsilon = rng.uniform(0.01, 0.15);
    th.theta_degrees = rng.uniform(10.0, 120.0);
    auto traj = random_trajectory(rng, rng.uniform_int(50, 200));
    KeyframeSet keys = extract_keyframes(traj, th, 0);
    CHECK(as_set(keys.indices) == brute_force_union(traj, th));
    // provenance is consistent with the component extractors
    std::set<int> phys = extract_phys(traj);
    for (const auto& [t, sources] : keys.provenance)
      if (sources.count(KeyframeSource::phys)) CHECK(phys.count(t) == 1);
  }
}

TEST_CASE("flag sets grow with epsilon and shrink with theta") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    auto traj = random_trajectory(rng, rng.uniform_int(50, 150));
    KinThresholds lo, hi;
    lo.epsilon = rng.uniform(0.01, 0.08);
    hi = lo;
    hi.epsilon = lo.epsilon + rng.uniform(0.0, 0.1);
    auto a = as_set(extract_keyframes(traj, lo, 0).indices);
    auto b = as_set(extract_keyframes(traj, hi, 0).indices);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));

    KinThresholds narrow, wide;
    narrow.theta_degrees = rng.uniform(10.0, 60.0);
    wide = narrow;
    wide.theta_degrees = narrow.theta_degrees + rng.uniform(0.0, 90.0);
    auto c = as_set(extract_keyframes(traj, narrow, 0).indices);
    auto d = as_set(extract_keyframes(traj, wide, 0).indices);
    CHECK(std::includes(c.begin(), c.end(), d.begin(), d.end()));
  }
}

TEST_CASE("nms collapses dense kin runs to the slowest frame") {
  KinThresholds th;
  th.epsilon = 0.05;
  std::vector<TrajectoryFrame> traj;
  // five consecutive near-zero speeds with a distinct minimum at t=4
  double speeds[] = {0.1, 0.04, 0.03, 0.001, 0.02, 0.1};
  Vec3 pos{0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    Vec3 v{speeds[i], 0, 0};
    pos = pos + v;
    traj.push_back({i + 1, 0, v, pos, std::nullopt});
  }
  KeyframeSet keys = extract_keyframes(traj, th, 3);
  CHECK(keys.indices == std::vector<int>{4});
  // with suppression disabled the whole run is present
  CHECK(extract_keyframes(traj, th, 0).indices == std::vector<int>{2, 3, 4, 5});
}

TEST_CASE("phys frames survive suppression and split kin runs") {
  KinThresholds th;
  th.epsilon = 0.05;
  std::vector<TrajectoryFrame> traj;
  double speeds[] = {0.1, 0.01, 0.02, 0.03, 0.1};
  int gs[] = {0, 0, 1, 1, 1};
  Vec3 pos{0, 0, 0};
  for (int i = 0; i < 5; ++i) {
    Vec3 v{speeds[i], 0, 0};
    pos = pos + v;
    traj.push_back({i + 1, gs[i], v, pos, std::nullopt});
  }
  KeyframeSet keys = extract_keyframes(traj, th, 3);
  // t=3 is a phys frame: kept verbatim; the kin run {2,3,4} flushes around it
  CHECK(as_set(keys.indices).count(3) == 1);
  CHECK(keys.provenance.at(3).count(KeyframeSource::phys) == 1);
  // suppression never invents frames
  auto unsuppressed = as_set(extract_keyframes(traj, th, 0).indices);
  for (int t : keys.indices) CHECK(unsuppressed.count(t) == 1);
}

TEST_CASE("suppressed output is always a subset of the raw union") {
  Rng rng(5150);
  KinThresholds th;
  for (int trial = 0; trial < 100; ++trial) {
    auto traj = random_trajectory(rng, rng.uniform_int(50, 150));
    auto raw = as_set(extract_keyframes(traj, th, 0).indices);
    for (int gap : {1, 2, 3, 5, 8}) {
      KeyframeSet keys = extract_keyframes(traj, th, gap);
      for (int t : keys.indices) CHECK(raw.count(t) == 1);
      // every phys frame survives
      for (int t : extract_phys(traj)) CHECK(as_set(keys.indices).count(t) == 1);
    }
  }
}
