#pragma once

#include <array>
#include <chrono>
#include <cstddef>

namespace mdsipm {

/// K1 dense vector ops, K2 matrix-vector products, K3 fused M += A D B^T, K4 dense factor/solve.
enum class KernelClass : std::size_t { K1 = 0, K2 = 1, K3 = 2, K4 = 3 };

struct KernelTimes {
  std::array<double, 4> by_class{};  // seconds
  double total = 0.0;

  double operator[](KernelClass c) const { return by_class[static_cast<std::size_t>(c)]; }
};

/// Accumulates wall-clock time per kernel class. Disabled timers never read the clock.
class KernelTimers {
 public:
  using Clock = std::chrono::steady_clock;

  explicit KernelTimers(bool enabled = true) : enabled_(enabled) {}

  class Scope {
   public:
    Scope(KernelTimers& owner, KernelClass c) : owner_(owner), cls_(c) {
      if (owner_.enabled_) start_ = Clock::now();
    }
    ~Scope() {
      if (owner_.enabled_)
        owner_.times_.by_class[static_cast<std::size_t>(cls_)] +=
            std::chrono::duration<double>(Clock::now() - start_).count();
    }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    KernelTimers& owner_;
    KernelClass cls_;
    Clock::time_point start_{};
  };

  Scope scope(KernelClass c) { return Scope(*this, c); }

  bool enabled() const noexcept { return enabled_; }
  const KernelTimes& times() const noexcept { return times_; }
  void set_total(double t) {
    if (enabled_) times_.total = t;
  }
  void reset() { times_ = {}; }

 private:
  bool enabled_;
  KernelTimes times_;
};

}  // namespace mdsipm
