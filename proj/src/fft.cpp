#include "modkalm/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace modkalm {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Impl {
  int n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit Impl(int size) : n(size) {
    real = fftw_alloc_real(static_cast<std::size_t>(n));
    spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    if (real == nullptr || spec == nullptr) {
      Release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(PlannerMutex());
    forward = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
  }
  ~Impl() { Release(); }

  void Release() {
    {
      std::lock_guard lock(PlannerMutex());
      if (forward != nullptr) fftw_destroy_plan(forward);
      if (inverse != nullptr) fftw_destroy_plan(inverse);
    }
    fftw_free(real);
    fftw_free(spec);
    forward = inverse = nullptr;
    real = nullptr;
    spec = nullptr;
  }
};

RealFft::RealFft(int size) {
  if (size <= 0) throw std::invalid_argument("RealFft: size must be positive");
  impl_ = std::make_unique<Impl>(size);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

int RealFft::size() const { return impl_->n; }

void RealFft::Forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = impl_->n;
  if (in.size() != static_cast<std::size_t>(n) ||
      out.size() != static_cast<std::size_t>(n / 2 + 1)) {
    throw std::invalid_argument("RealFft::Forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->forward);
  for (int k = 0; k <= n / 2; ++k) out[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFft::Inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = impl_->n;
  if (in.size() != static_cast<std::size_t>(n / 2 + 1) ||
      out.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("RealFft::Inverse: buffer size mismatch");
  }
  for (int k = 0; k <= n / 2; ++k) {
    impl_->spec[k][0] = in[k].real();
    impl_->spec[k][1] = in[k].imag();
  }
  impl_->spec[0][1] = 0.0;
  if (n % 2 == 0) impl_->spec[n / 2][1] = 0.0;
  // c2r destroys its input, which is our private buffer.
  fftw_execute(impl_->inverse);
  const double scale = 1.0 / n;
  for (int t = 0; t < n; ++t) out[t] = impl_->real[t] * scale;
}

}  // namespace modkalm
