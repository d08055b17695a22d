#pragma once

// Minimal RAII layer over FFTW's real-to-complex transforms. Plans are created
// under a process-wide mutex (FFTW's planner is not re-entrant); executing an
// existing plan on fresh buffers through the new-array interface is safe from
// any thread.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <type_traits>

namespace lrdseg::fft {

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct PlanDestroy {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

}  // namespace detail

/// FFTW-aligned heap buffer.
template <class T>
class AlignedBuffer {
 public:
  AlignedBuffer() = default;
  explicit AlignedBuffer(std::size_t size)
      : data_(static_cast<T*>(fftw_malloc(sizeof(T) * size))), size_(size) {
    if (size != 0 && !data_) throw std::bad_alloc();
    if (size != 0) std::memset(static_cast<void*>(data_.get()), 0, sizeof(T) * size);
  }

  AlignedBuffer(const AlignedBuffer& other) : AlignedBuffer(other.size_) {
    if (size_ != 0) std::memcpy(static_cast<void*>(data()), other.data(), sizeof(T) * size_);
  }
  AlignedBuffer& operator=(const AlignedBuffer& other) {
    if (this != &other) *this = AlignedBuffer(other);
    return *this;
  }
  AlignedBuffer(AlignedBuffer&&) noexcept = default;
  AlignedBuffer& operator=(AlignedBuffer&&) noexcept = default;

  T* data() noexcept { return data_.get(); }
  const T* data() const noexcept { return data_.get(); }
  std::size_t size() const noexcept { return size_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  std::span<T> span() noexcept { return {data(), size_}; }
  std::span<const T> span() const noexcept { return {data(), size_}; }

 private:
  std::unique_ptr<T[], detail::FftwFree> data_;
  std::size_t size_ = 0;
};

using RealBuffer = AlignedBuffer<double>;
using ComplexBuffer = AlignedBuffer<fftw_complex>;

/// Forward and inverse real transforms of one fixed length. Unnormalized:
/// inverse(forward(x)) == length * x.
class RealTransform {
 public:
  explicit RealTransform(std::size_t length) : length_(length) {
    RealBuffer real(length);
    ComplexBuffer spec(spectrum_size());
    std::lock_guard lock(detail::planner_mutex());
    const int len = static_cast<int>(length);
    forward_.reset(fftw_plan_dft_r2c_1d(len, real.data(), spec.data(),
                                        FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(len, spec.data(), real.data(),
                                        FFTW_ESTIMATE));
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t spectrum_size() const noexcept { return length_ / 2 + 1; }

  void forward(RealBuffer& in, ComplexBuffer& out) const {
    fftw_execute_dft_r2c(forward_.get(), in.data(), out.data());
  }

  /// Destroys the contents of `in` (c2r transforms overwrite their input).
  void inverse(ComplexBuffer& in, RealBuffer& out) const {
    fftw_execute_dft_c2r(inverse_.get(), in.data(), out.data());
  }

 private:
  std::size_t length_;
  detail::PlanHandle forward_;
  detail::PlanHandle inverse_;
};

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace lrdseg::fft
