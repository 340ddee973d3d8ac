#include "heatlab/fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace heatlab {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(int dimension, int points) : dimension_(dimension), points_(points) {
  physical_size_ = 1;
  for (int i = 0; i < dimension; ++i) physical_size_ *= static_cast<std::size_t>(points);
  spectral_size_ = physical_size_ / static_cast<std::size_t>(points) * static_cast<std::size_t>(points / 2 + 1);

  RealArray real(physical_size_);
  SpectralArray spec(spectral_size_);
  int n[3] = {points, points, points};
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  r2c_ = fftw_plan_dft_r2c(dimension, n, real.data(), cplx, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r(dimension, n, cplx, real.data(), FFTW_ESTIMATE);
  if (!r2c_ || !c2r_) throw std::runtime_error("FFTW plan creation failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
}

std::shared_ptr<const FftPlan> FftPlan::for_grid(const Grid& grid) {
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(planner_mutex());
  const auto key = std::make_pair(grid.dimension(), grid.points());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const FftPlan> plan(new FftPlan(grid.dimension(), grid.points()));
  cache.emplace(key, plan);
  return plan;
}

void FftPlan::forward(std::span<const double> physical, std::span<Complex> spectral) const {
  if (physical.size() != physical_size_ || spectral.size() != spectral_size_) {
    throw std::invalid_argument("FftPlan::forward: array size mismatch");
  }
  // r2c leaves its input intact but the interface takes a mutable pointer;
  // copy into an aligned scratch buffer to respect const.
  RealArray in(physical.begin(), physical.end());
  SpectralArray out(spectral_size_);
  fftw_execute_dft_r2c(r2c_, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(physical_size_);
  std::transform(out.begin(), out.end(), spectral.begin(), [scale](Complex c) { return c * scale; });
}

void FftPlan::inverse(std::span<const Complex> spectral, std::span<double> physical) const {
  if (physical.size() != physical_size_ || spectral.size() != spectral_size_) {
    throw std::invalid_argument("FftPlan::inverse: array size mismatch");
  }
  // c2r overwrites its input.
  SpectralArray in(spectral.begin(), spectral.end());
  RealArray out(physical_size_);
  fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  std::copy(out.begin(), out.end(), physical.begin());
}

void FftPlan::forward_aligned(RealArray& physical, SpectralArray& spectral) const {
  if (physical.size() != physical_size_ || spectral.size() != spectral_size_) {
    throw std::invalid_argument("FftPlan::forward_aligned: array size mismatch");
  }
  fftw_execute_dft_r2c(r2c_, physical.data(), reinterpret_cast<fftw_complex*>(spectral.data()));
  const double scale = 1.0 / static_cast<double>(physical_size_);
  for (auto& c : spectral) c *= scale;
}

void FftPlan::inverse_destructive(SpectralArray& spectral, RealArray& physical) const {
  if (physical.size() != physical_size_ || spectral.size() != spectral_size_) {
    throw std::invalid_argument("FftPlan::inverse_destructive: array size mismatch");
  }
  fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(spectral.data()), physical.data());
}

}  // namespace heatlab
