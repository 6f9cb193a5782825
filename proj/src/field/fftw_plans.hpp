#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace rfm::detail {

// FFTW planning is not thread-safe; execution is. Plans live per thread
// together with the buffers they were planned on.
std::mutex& fftw_planner_mutex();

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> fftw_alloc(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * (n == 0 ? 1 : n))));
}

enum class PlanKind { r2c, c2r, dst1_2d, dct1_2d };

struct PlanSlot {
  fftw_plan plan = nullptr;
  FftwBuffer<double> real;
  FftwBuffer<fftw_complex> complex;
  PlanSlot() = default;
  PlanSlot(PlanSlot&& o) noexcept
      : plan(std::exchange(o.plan, nullptr)), real(std::move(o.real)), complex(std::move(o.complex)) {}
  PlanSlot& operator=(PlanSlot&&) = delete;
  ~PlanSlot();
};

/// Returns this thread's plan for (kind, n), creating it on first use.
PlanSlot& plan_for(PlanKind kind, int n);

}  // namespace rfm::detail
