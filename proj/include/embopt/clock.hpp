#pragma once

#include <chrono>

namespace embopt {

/// Seconds elapsed since the clock was started.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Deterministic clock that only moves when told to. Used with the mock backend
/// so that wall-time columns and time-budget clipping are reproducible.
class VirtualClock final : public Clock {
 public:
  double now() const override { return seconds_; }
  void advance(double seconds) { seconds_ += seconds; }

 private:
  double seconds_ = 0.0;
};

}  // namespace embopt
