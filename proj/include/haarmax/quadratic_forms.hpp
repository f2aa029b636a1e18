#pragma once

// Extremal statistics of diagonal quadratic forms over the coordinates of a
// block of columns, in two conventions:
//   Haar:     extremum over j of sum_i a_i (sqrt(n) gamma_ij)^2   (x n)
//   Gaussian: extremum over j of sum_i a_i y_ij^2                 (no factor)
// plus the bulk QUE statistic Q_N = N(<g, A g> - TrA/N)/sqrt(2 Tr Aring^2)
// for a single unit vector against the diagonal observable.

#include <cmath>
#include <limits>
#include <vector>

#include "haarmax/common.hpp"

namespace haarmax {

struct Spectrum {
  std::vector<double> values;

  explicit Spectrum(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw ArgumentError("Spectrum: needs at least one value");
    for (double a : values)
      if (a == 0.0) throw ArgumentError("Spectrum: values must be nonzero");
  }

  Index k() const { return static_cast<Index>(values.size()); }
};

enum class ExtremalMode { MaxSigned, MaxAbs, Min };
enum class SourceKind { Haar, Gaussian };

struct RawStatistic {
  double value = 0.0;
  Index n = 0;
  ExtremalMode mode = ExtremalMode::MaxSigned;
  SourceKind source = SourceKind::Haar;
};

namespace detail {

// Single streaming pass over the n coordinates; `factor` is n for the Haar
// convention and 1 for the Gaussian one.
template <class Scalar>
double quad_form_extremum(const Matrix<Scalar>& columns, const Spectrum& spectrum,
                          ExtremalMode mode, double factor) {
  const Index n = columns.rows();
  const Index k = columns.cols();
  if (k != spectrum.k())
    throw ArgumentError("extremal statistic: spectrum rank " +
                        std::to_string(spectrum.k()) + " != column count " +
                        std::to_string(k));
  double best = 0.0;
  double best_key = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Index i = 0; i < k; ++i) s += spectrum.values[i] * std::norm(columns(j, i));
    s *= factor;
    double key = s;
    if (mode == ExtremalMode::MaxAbs) key = std::abs(s);
    if (mode == ExtremalMode::Min) key = -s;
    if (key > best_key) {
      best_key = key;
      best = s;
    }
  }
  return (mode == ExtremalMode::MaxAbs) ? std::abs(best) : best;
}

}  // namespace detail

// Haar-convention statistic over n x k orthonormal-ish columns (Gram-Schmidt
// output or the first k rows of a Haar matrix, transposed). Pass
// already_normalized = true when the entries carry the sqrt(n) factor
// themselves, in which case the x n scaling is skipped.
template <class Scalar>
RawStatistic extremal_statistic(const Matrix<Scalar>& columns, const Spectrum& spectrum,
                                ExtremalMode mode, bool already_normalized = false) {
  const double factor = already_normalized ? 1.0 : static_cast<double>(columns.rows());
  return RawStatistic{detail::quad_form_extremum(columns, spectrum, mode, factor),
                      columns.rows(), mode, SourceKind::Haar};
}

// Gaussian-convention statistic: no dimension factor.
template <class Scalar>
RawStatistic gaussian_extremal_statistic(const Matrix<Scalar>& Y, const Spectrum& spectrum,
                                         ExtremalMode mode) {
  return RawStatistic{detail::quad_form_extremum(Y, spectrum, mode, 1.0), Y.rows(), mode,
                      SourceKind::Gaussian};
}

// QUE statistic for one unit vector: the observable is A = diag(spectrum, 0...)
// acting on the first k coordinates; trace_A and trace_A_sq are passed in so
// callers can account for whatever full matrix they have in mind.
template <class Scalar>
double que_statistic(const Vector<Scalar>& gamma, const Spectrum& spectrum, double trace_A,
                     double trace_A_sq) {
  const Index n = gamma.size();
  const Index k = spectrum.k();
  if (k > n) throw ArgumentError("que_statistic: spectrum rank exceeds dimension");
  const double tr_ring_sq = trace_A_sq - trace_A * trace_A / static_cast<double>(n);
  if (!(tr_ring_sq > 0.0))
    throw ArgumentError("que_statistic: Tr(A - TrA/N)^2 must be positive (A proportional "
                        "to the identity has no QUE fluctuation)");
  double form = 0.0;
  for (Index i = 0; i < k; ++i) form += spectrum.values[i] * std::norm(gamma(i));
  const double N = static_cast<double>(n);
  return N * (form - trace_A / N) / std::sqrt(2.0 * tr_ring_sq);
}

}  // namespace haarmax
