#include "rma/memory.hpp"

namespace rma {

void MemoryBank::push_frame(int step, Observation obs) {
  if (step <= last_pushed_step_)
    throw OrderingError("push_frame steps must be strictly increasing (got " +
                        std::to_string(step) + " after " + std::to_string(last_pushed_step_) +
                        ")");
  last_pushed_step_ = step;
  ++push_count_;
  if (config_.recent_stride > 1 && (push_count_ - 1) % config_.recent_stride != 0) return;
  recent_.push_back({step, std::move(obs)});
  while (static_cast<int>(recent_.size()) > config_.recent_horizon) recent_.pop_front();
}

void MemoryBank::write_keyframe(int step, Observation obs) {
  if (!keyframes_.empty()) {
    const int last = keyframes_.back().step;
    if (step == last) return;  // idempotent duplicate
    if (step < last)
      throw OrderingError("keyframe steps must be non-decreasing (got " + std::to_string(step) +
                          " after " + std::to_string(last) + ")");
  }
  keyframes_.push_back({step, std::move(obs)});
  if (config_.keyframe_cap)
    while (static_cast<int>(keyframes_.size()) > *config_.keyframe_cap) keyframes_.pop_front();
}

MemoryView MemoryBank::snapshot() const {
  MemoryView view;
  view.entries.reserve(keyframes_.size() + recent_.size());
  for (const auto& e : keyframes_)
    view.entries.push_back({e.step, &e.obs, MemoryOrigin::keyframe});
  for (const auto& e : recent_) view.entries.push_back({e.step, &e.obs, MemoryOrigin::recent});
  return view;
}

}  // namespace rma
