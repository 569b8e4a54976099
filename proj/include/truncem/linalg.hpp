#ifndef TRUNCEM_LINALG_HPP
#define TRUNCEM_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "truncem/errors.hpp"

namespace truncem {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

/// Relative asymmetry ||A - A^T||_max / max(1, ||A||_max).
inline double relative_asymmetry(const Mat& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Throws NotPositiveDefinite unless `a` is square, symmetric to `sym_tol`
/// relative asymmetry and has a strictly positive smallest eigenvalue.
inline void require_spd(const Mat& a, const std::string& what, double sym_tol = 1e-12) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw NotPositiveDefinite(what + ": matrix must be square and non-empty");
  if (!a.allFinite()) throw NotPositiveDefinite(what + ": matrix has non-finite entries");
  if (relative_asymmetry(a) > sym_tol) throw NotPositiveDefinite(what + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0))
    throw NotPositiveDefinite(what + ": smallest eigenvalue is not positive");
}

/// Symmetric square root and inverse square root of an SPD matrix, both from
/// one eigendecomposition.
struct SymmetricRoots {
  Mat root;
  Mat inv_root;
};

inline SymmetricRoots symmetric_roots(const Mat& spd) {
  require_spd(spd, "symmetric_roots");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (spd + spd.transpose()));
  const Vec ev = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  SymmetricRoots out;
  out.root = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
  out.inv_root = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  out.root = 0.5 * (out.root + out.root.transpose()).eval();
  out.inv_root = 0.5 * (out.inv_root + out.inv_root.transpose()).eval();
  return out;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of R's diagonal folded into Q).
template <class Rng>
Mat random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

/// Random SPD matrix Q diag(e) Q^T with eigenvalues log-uniform in [lo, hi].
template <class Rng>
Mat random_spd(int d, Rng& rng, double lo = 0.25, double hi = 4.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vec e(d);
  for (int i = 0; i < d; ++i) e(i) = std::exp(u(rng));
  const Mat q = random_orthogonal(d, rng);
  Mat s = q * e.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace truncem

#endif  // TRUNCEM_LINALG_HPP
