#pragma once

// Counter-based random streams and Gaussian column blocks.
//
// Generator: Philox2x64-10 (Salmon, Moraes, Dror, Shaw, "Parallel random
// numbers: as easy as 1, 2, 3", SC 2011). Counter-based means replica
// substreams are addressed, not fast-forwarded: stream r is the key/counter
// pair (master_seed, counter_hi = r), so any replica can be sampled in O(1)
// and results cannot depend on scheduling order. Passes BigCrush per the
// paper.
//
// Gaussian conversion: Marsaglia's polar method (rejection). The number of
// uniforms consumed per Gaussian pair is itself random, which is fine here
// because a replica never shares its stream.

#include <cstdint>

#include "haarmax/common.hpp"

namespace haarmax {

namespace detail {

// Philox2x64 round constants from the reference implementation (Random123).
inline constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ull;
inline constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ull;

inline void philox2x64_10(std::uint64_t ctr_lo, std::uint64_t ctr_hi,
                          std::uint64_t key, std::uint64_t out[2]) {
  std::uint64_t x0 = ctr_lo, x1 = ctr_hi;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(kPhiloxM) * x0;
    const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(prod);
    x0 = hi ^ key ^ x1;
    x1 = lo;
    key += kPhiloxW;
  }
  out[0] = x0;
  out[1] = x1;
}

}  // namespace detail

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t replica_index)
      : key_(master_seed), ctr_hi_(replica_index) {}

  std::uint64_t next_u64() {
    if (have_ == 0) {
      detail::philox2x64_10(ctr_lo_++, ctr_hi_, key_, buf_);
      have_ = 2;
    }
    return buf_[--have_];
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via the polar method.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Complex standard normal normalized so E|z|^2 = 1.
  std::complex<double> next_complex_gaussian() {
    const double re = next_gaussian();
    const double im = next_gaussian();
    return {re * 0.7071067811865476, im * 0.7071067811865476};
  }

  std::uint64_t master_seed() const { return key_; }
  std::uint64_t replica_index() const { return ctr_hi_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_hi_;
  std::uint64_t ctr_lo_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream substream(std::uint64_t master_seed, std::uint64_t replica_index) {
  return RandomStream(master_seed, replica_index);
}

namespace detail {

inline void fill_gaussian(double* dst, Index count, RandomStream& stream) {
  for (Index i = 0; i < count; ++i) dst[i] = stream.next_gaussian();
}

inline void fill_gaussian(std::complex<double>* dst, Index count, RandomStream& stream) {
  for (Index i = 0; i < count; ++i) dst[i] = stream.next_complex_gaussian();
}

}  // namespace detail

// n x k block of i.i.d. standard Gaussians (unit E|entry|^2 in both fields),
// column-major fill so the draw order is part of the stream contract.
template <class Scalar>
Matrix<Scalar> gaussian_block(Index n, Index k, RandomStream& stream) {
  if (n < 1 || k < 1)
    throw ArgumentError("gaussian_block: dimensions must be positive, got n=" +
                        std::to_string(n) + " k=" + std::to_string(k));
  Matrix<Scalar> block(n, k);
  detail::fill_gaussian(block.data(), n * k, stream);
  return block;
}

// Runtime-field variant: real part only or full complex, selected by tag.
inline Matrix<std::complex<double>> gaussian_block(Index n, Index k, FieldKind field,
                                                   RandomStream& stream) {
  if (field == FieldKind::Real) {
    Matrix<double> real = gaussian_block<double>(n, k, stream);
    return real.cast<std::complex<double>>();
  }
  return gaussian_block<std::complex<double>>(n, k, stream);
}

}  // namespace haarmax
