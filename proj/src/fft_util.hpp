#pragma once

// Internal FFTW helpers. FFTW plan creation/destruction mutates global planner
// state and is not thread safe; every plan must be made and destroyed under
// plan_mutex(). Executing a plan through the new-array interface is safe from
// multiple threads as long as each thread passes its own buffers, which is why
// all plans here are created with FFTW_UNALIGNED (no alignment assumptions
// baked into the plan). FFTW_ESTIMATE keeps planning deterministic.

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace gwdc::detail {

inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

class R2RPlan {
 public:
  R2RPlan() = default;

  R2RPlan(int n, fftw_r2r_kind kind) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    std::vector<double> in(static_cast<size_t>(n)), out(static_cast<size_t>(n));
    plan_ = fftw_plan_r2r_1d(n, in.data(), out.data(), kind,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  ~R2RPlan() { reset(); }

  R2RPlan(const R2RPlan&) = delete;
  R2RPlan& operator=(const R2RPlan&) = delete;

  R2RPlan(R2RPlan&& other) noexcept : plan_(other.plan_) { other.plan_ = nullptr; }
  R2RPlan& operator=(R2RPlan&& other) noexcept {
    if (this != &other) {
      reset();
      plan_ = other.plan_;
      other.plan_ = nullptr;
    }
    return *this;
  }

  void execute(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }

  explicit operator bool() const { return plan_ != nullptr; }

 private:
  void reset() {
    if (plan_) {
      std::lock_guard<std::mutex> lock(plan_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }

  fftw_plan plan_ = nullptr;
};

}  // namespace gwdc::detail
