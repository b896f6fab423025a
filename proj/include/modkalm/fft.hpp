#ifndef MODKALM_FFT_HPP_
#define MODKALM_FFT_HPP_

#include <complex>
#include <memory>
#include <span>

namespace modkalm {

// Real-input DFT of fixed length backed by FFTW. Each instance owns its
// plans and aligned buffers, so an instance must not be shared between
// threads; create one per worker instead. Construction is thread-safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  int size() const;
  int bins() const { return size() / 2 + 1; }

  // Unnormalized forward transform: out[k] = sum_t in[t] e^{-j 2 pi k t / n}.
  void Forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Inverse of Forward including the 1/n factor; imaginary parts of the DC
  // and Nyquist bins are ignored.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modkalm

#endif  // MODKALM_FFT_HPP_
