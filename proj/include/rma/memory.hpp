#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rma/world.hpp"

namespace rma {

struct MemoryConfig {
  int recent_horizon = 5;          // W
  std::optional<int> keyframe_cap;  // C; nullopt = uncapped
  int recent_stride = 1;
};

struct OrderingError : std::runtime_error {
  explicit OrderingError(const std::string& what) : std::runtime_error(what) {}
};

struct MemoryEntry {
  int step = 0;
  Observation obs;
};

enum class MemoryOrigin { keyframe, recent };

struct MemoryView {
  struct Entry {
    int step;
    const Observation* obs;
    MemoryOrigin origin;
  };
  std::vector<Entry> entries;  // keyframes first, then recent, step-ordered within each

  bool empty() const { return entries.empty(); }
  size_t size() const { return entries.size(); }
};

class MemoryBank {
 public:
  explicit MemoryBank(MemoryConfig config) : config_(config) {}

  // Appends to the recent window, evicting the oldest frame beyond W.
  void push_frame(int step, Observation obs);

  // Appends to the keyframe buffer (FIFO eviction when capped). Re-writing the
  // last step is an idempotent no-op.
  void write_keyframe(int step, Observation obs);

  MemoryView snapshot() const;

  const std::deque<MemoryEntry>& recent() const { return recent_; }
  const std::deque<MemoryEntry>& keyframes() const { return keyframes_; }
  const MemoryConfig& config() const { return config_; }

 private:
  MemoryConfig config_;
  std::deque<MemoryEntry> recent_;
  std::deque<MemoryEntry> keyframes_;
  int last_pushed_step_ = -1;
  int push_count_ = 0;
};

}  // namespace rma
