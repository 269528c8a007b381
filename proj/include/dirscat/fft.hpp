#pragma once

// Thin RAII layer over FFTW3 for cubic complex transforms. Plans are created
// once per (size, batch, direction) with FFTW_ESTIMATE so that the chosen
// algorithm, and therefore every output bit, is identical across runs.

#include <fftw3.h>

#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace dirscat {

using cplx = std::complex<double>;

/// Allocator returning SIMD-aligned storage from fftw_malloc.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t count) {
    void* p = fftw_malloc(count * sizeof(T));
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<cplx, FftwAllocator<cplx>>;

enum class FftDirection { forward, inverse };

namespace detail {

inline int thread_count_from_env() {
  const char* env = std::getenv("DIRSCAT_THREADS");
  if (env == nullptr) return 1;
  const int v = std::atoi(env);
  return v > 0 ? v : 1;
}

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int batch, FftDirection dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, batch, dir);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
    const std::size_t per = static_cast<std::size_t>(n) * n * n;
    ComplexBuffer scratch(per * batch);
    int dims[3] = {n, n, n};
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_many_dft(3, dims, batch, buf, nullptr, 1, static_cast<int>(per), buf, nullptr, 1,
                                     static_cast<int>(per), dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                     FFTW_ESTIMATE);
    if (p == nullptr) throw std::runtime_error("fft: plan creation failed for n=" + std::to_string(n));
    plans_.emplace(key, PlanHandle(p));
    return p;
  }

 private:
  struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
  };
  using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

  PlanCache() {
    const int threads = thread_count_from_env();
    if (threads > 1 && fftw_init_threads() != 0) fftw_plan_with_nthreads(threads);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, FftDirection>, PlanHandle> plans_;
};

}  // namespace detail

/// Unnormalized in-place DFT of `batch` contiguous n^3 blocks.
inline void fft_inplace(cplx* data, int n, int batch, FftDirection dir) {
  fftw_plan p = detail::PlanCache::instance().get(n, batch, dir);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
}

}  // namespace dirscat
