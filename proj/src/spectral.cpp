#include "akf/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "akf/errors.hpp"

namespace akf {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

}  // namespace

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::vector<int> shape) : shape_(std::move(shape)), plans_(std::make_unique<Plans>()) {
  if (shape_.empty()) throw ParameterError("RealFft: empty shape");
  real_size_ = 1;
  for (int n : shape_) real_size_ *= static_cast<std::size_t>(n);
  complex_size_ = real_size_ / shape_.back() * (shape_.back() / 2 + 1);

  auto in = fftw_buffer<double>(real_size_);
  auto out = fftw_buffer<fftw_complex>(complex_size_);
  std::lock_guard lock(planner_mutex());
  const int rank = static_cast<int>(shape_.size());
  plans_->forward = fftw_plan_dft_r2c(rank, shape_.data(), in.get(), out.get(),
                                      FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  plans_->inverse = fftw_plan_dft_c2r(rank, shape_.data(), out.get(), in.get(), FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->inverse) throw Error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != real_size_ || out.size() != complex_size_)
    throw ShapeError("RealFft::forward: size mismatch");
  // Aligned scratch copies keep the new-array execute interface legal for
  // arbitrary caller buffers.
  auto rin = fftw_buffer<double>(real_size_);
  auto cout = fftw_buffer<fftw_complex>(complex_size_);
  std::memcpy(rin.get(), in.data(), real_size_ * sizeof(double));
  fftw_execute_dft_r2c(plans_->forward, rin.get(), cout.get());
  std::memcpy(static_cast<void*>(out.data()), cout.get(), complex_size_ * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<std::complex<double>> in, std::span<double> out) const {
  if (in.size() != complex_size_ || out.size() != real_size_)
    throw ShapeError("RealFft::inverse: size mismatch");
  auto cin = fftw_buffer<fftw_complex>(complex_size_);
  auto rout = fftw_buffer<double>(real_size_);
  std::memcpy(cin.get(), static_cast<const void*>(in.data()), complex_size_ * sizeof(fftw_complex));
  fftw_execute_dft_c2r(plans_->inverse, cin.get(), rout.get());
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) out[i] = rout[i] * scale;
}

std::vector<double> RealFft::wavenumber_sq(std::span<const double> half_widths,
                                           std::span<const bool> active) const {
  const std::size_t rank = shape_.size();
  if (half_widths.size() != rank || active.size() != rank)
    throw ShapeError("RealFft::wavenumber_sq: per-axis arrays must match the rank");
  std::vector<int> extent(shape_);
  extent.back() = shape_.back() / 2 + 1;
  std::vector<double> k2(complex_size_, 0.0);
  std::vector<int> idx(rank, 0);
  for (std::size_t flat = 0; flat < complex_size_; ++flat) {
    double sum = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
      if (!active[a]) continue;
      const int n = shape_[a];
      const int m = (idx[a] <= n / 2) ? idx[a] : idx[a] - n;
      const double k = std::numbers::pi * m / half_widths[a];
      sum += k * k;
    }
    k2[flat] = sum;
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < extent[a]) break;
      idx[a] = 0;
    }
  }
  return k2;
}

std::vector<double> RealFft::parseval_weights() const {
  const int last = shape_.back();
  const int half = last / 2 + 1;
  std::vector<double> w(complex_size_);
  for (std::size_t flat = 0; flat < complex_size_; ++flat) {
    const int m = static_cast<int>(flat % half);
    w[flat] = (m == 0 || 2 * m == last) ? 1.0 : 2.0;
  }
  return w;
}

}  // namespace akf
