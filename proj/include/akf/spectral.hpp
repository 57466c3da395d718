#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace akf {

/**
 * Multi-dimensional real-to-complex FFT over a fixed row-major shape.
 *
 * Plans are created with FFTW_ESTIMATE so that transforms are bit-for-bit
 * reproducible between runs. Plan creation is serialized internally; the
 * transforms themselves are safe to call concurrently on one instance.
 */
class RealFft {
 public:
  explicit RealFft(std::vector<int> shape);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  const std::vector<int>& shape() const { return shape_; }
  std::size_t real_size() const { return real_size_; }
  /// Half-spectrum length: last axis has n/2 + 1 entries.
  std::size_t complex_size() const { return complex_size_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Inverse transform including the 1/N normalization. `in` is clobbered.
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

  /**
   * Squared wavenumber |k|^2 per half-spectrum entry for a box of per-axis
   * half widths; axes with `active[a] == false` contribute zero.
   */
  std::vector<double> wavenumber_sq(std::span<const double> half_widths,
                                    std::span<const bool> active) const;

  /// Parseval weights of the half spectrum (2 for entries whose conjugate
  /// partner is not stored, 1 otherwise).
  std::vector<double> parseval_weights() const;

 private:
  struct Plans;
  std::vector<int> shape_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  std::unique_ptr<Plans> plans_;
};

}  // namespace akf
