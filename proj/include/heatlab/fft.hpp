#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

#include <fftw3.h>

#include "heatlab/grid.hpp"

namespace heatlab {

using Complex = std::complex<double>;

/// std::allocator replacement returning FFTW-aligned storage, so arrays can be
/// handed to plans through the new-array execute interface.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using RealArray = std::vector<double, FftwAllocator<double>>;
using SpectralArray = std::vector<Complex, FftwAllocator<Complex>>;

/// Real-to-complex transform pair for one (dimension, points) shape.
///
/// forward() returns coefficients normalized by 1/M^d so that slot k holds the
/// lattice approximation of (1/L^d) * integral f(x) exp(-i k.x) dx; inverse()
/// is the exact left inverse.  Plans are built with FFTW_ESTIMATE, which keeps
/// results bit-reproducible from run to run.  Execution is thread-safe.
class FftPlan {
 public:
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  static std::shared_ptr<const FftPlan> for_grid(const Grid& grid);

  void forward(std::span<const double> physical, std::span<Complex> spectral) const;
  void inverse(std::span<const Complex> spectral, std::span<double> physical) const;

  /// Copy-free variants for aligned work arrays.  forward_aligned leaves
  /// `physical` untouched; inverse_destructive clobbers `spectral`.
  void forward_aligned(RealArray& physical, SpectralArray& spectral) const;
  void inverse_destructive(SpectralArray& spectral, RealArray& physical) const;

 private:
  FftPlan(int dimension, int points);

  int dimension_;
  int points_;
  std::size_t physical_size_;
  std::size_t spectral_size_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace heatlab
