#pragma once

// The coupled pair (Gaussian block, its Gram-Schmidt orthonormalization),
// the coupling error diagnostics, and a QR-based full Haar matrix for
// cross-validation.
//
// Orthogonalization is modified Gram-Schmidt with one reorthogonalization
// sweep per column once k > 32 (plain MGS loses orthogonality around
// k ~ sqrt(n)). The diagnostics are always evaluated from their defining
// formulas in terms of Y and Gamma, never from MGS intermediates.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "haarmax/rng.hpp"

namespace haarmax {

template <class Scalar>
struct CoupledSample {
  Matrix<Scalar> Y;      // raw Gaussian columns y_i
  Matrix<Scalar> W;      // orthogonalized, un-normalized w_i (w_1 = y_1 exactly)
  Matrix<Scalar> Gamma;  // orthonormal gamma_i = w_i/||w_i||
};

struct CouplingDiagnostics {
  double eps_N_k = 0.0;        // max_{i<=k, j<=N} |sqrt(N) gamma_ij - y_ij|
  double max_delta = 0.0;      // max_ij |Delta_ij|, Delta_i = sum_{l<i} <y_i,g_l> g_l
  double max_delta_gap = 0.0;  // max_ij |Delta_ij - tilde Delta_ij|
  double max_L = 0.0;          // max_i |sqrt(N/||w_i||^2) - 1|
  double max_inner = 0.0;      // max_{a != b} |<y_a, y_b>| / sqrt(N)
};

// Gram-Schmidt on the columns of Y, keeping all three layers of the
// construction. Throws DegeneracyError if a pivot falls below 1e-12 sqrt(n)
// (numerically dependent columns; probability zero for Gaussian input).
template <class Scalar>
CoupledSample<Scalar> gram_schmidt_partial(const Matrix<Scalar>& Y) {
  const Index n = Y.rows();
  const Index k = Y.cols();
  if (k > n) throw ArgumentError("gram_schmidt_partial: k <= n required");
  if (k < 1) throw ArgumentError("gram_schmidt_partial: empty block");

  CoupledSample<Scalar> out;
  out.Y = Y;
  out.W.resize(n, k);
  out.Gamma.resize(n, k);
  const double threshold = 1e-12 * std::sqrt(static_cast<double>(n));
  const int sweeps = (k > 32) ? 2 : 1;

  for (Index i = 0; i < k; ++i) {
    Vector<Scalar> w = Y.col(i);
    for (int sweep = 0; sweep < sweeps; ++sweep)
      for (Index l = 0; l < i; ++l)
        w -= out.Gamma.col(l) * (out.Gamma.col(l).dot(w));
    const double norm = w.norm();
    if (norm < threshold)
      throw DegeneracyError("gram_schmidt_partial: column " + std::to_string(i) +
                            " is numerically dependent (|w| = " + std::to_string(norm) +
                            ")");
    out.W.col(i) = w;
    out.Gamma.col(i) = w / norm;
  }
  return out;
}

// Error variables of the coupling, from the defining formulas (cost O(k^2 n)).
template <class Scalar>
CouplingDiagnostics coupling_diagnostics(const CoupledSample<Scalar>& sample) {
  const Index n = sample.Y.rows();
  const Index k = sample.Y.cols();
  const double sqrtN = std::sqrt(static_cast<double>(n));
  CouplingDiagnostics d;

  for (Index i = 0; i < k; ++i) {
    // Delta_i and tilde Delta_i accumulate over l < i; both are zero for i=0.
    Vector<Scalar> delta = Vector<Scalar>::Zero(n);
    Vector<Scalar> delta_tilde = Vector<Scalar>::Zero(n);
    for (Index l = 0; l < i; ++l) {
      delta += sample.Gamma.col(l) * (sample.Gamma.col(l).dot(sample.Y.col(i)));
      delta_tilde += sample.Y.col(l) * (sample.Y.col(l).dot(sample.Y.col(i)) /
                                        static_cast<double>(n));
    }
    d.max_delta = std::max(d.max_delta, delta.template lpNorm<Eigen::Infinity>());
    d.max_delta_gap =
        std::max(d.max_delta_gap, (delta - delta_tilde).template lpNorm<Eigen::Infinity>());

    const double wnorm = sample.W.col(i).norm();
    d.max_L = std::max(d.max_L, std::abs(sqrtN / wnorm - 1.0));
    d.eps_N_k = std::max(
        d.eps_N_k,
        (sqrtN * sample.Gamma.col(i) - sample.Y.col(i)).template lpNorm<Eigen::Infinity>());
    for (Index l = 0; l < i; ++l)
      d.max_inner =
          std::max(d.max_inner, std::abs(sample.Y.col(l).dot(sample.Y.col(i))) / sqrtN);
  }
  return d;
}

// Haar-distributed n x n orthogonal/unitary matrix: QR of a square Gaussian
// matrix with the phase of each R diagonal entry folded into the corresponding
// Q column, so R has positive real diagonal. Without that correction the QR
// output is not Haar (the diagonal signs of R are not uniform).
template <class Scalar>
Matrix<Scalar> haar_matrix_qr(Index n, RandomStream& stream) {
  if (n < 1) throw ArgumentError("haar_matrix_qr: n >= 1 required");
  Matrix<Scalar> G = gaussian_block<Scalar>(n, n, stream);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(G);
  Matrix<Scalar> Q = qr.householderQ();
  const Matrix<Scalar> R =
      qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    const Scalar r = R(i, i);
    const double mag = std::abs(r);
    if (mag < 1e-12 * std::sqrt(static_cast<double>(n)))
      throw DegeneracyError("haar_matrix_qr: degenerate R diagonal");
    Q.col(i) *= r / static_cast<Scalar>(mag);
  }
  return Q;
}

inline Matrix<std::complex<double>> haar_matrix_qr(Index n, FieldKind field,
                                                   RandomStream& stream) {
  if (field == FieldKind::Real) {
    Matrix<double> q = haar_matrix_qr<double>(n, stream);
    return q.cast<std::complex<double>>();
  }
  return haar_matrix_qr<std::complex<double>>(n, stream);
}

}  // namespace haarmax
