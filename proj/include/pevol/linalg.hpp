#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>

#include "pevol/common.hpp"

#if defined(PEVOL_USE_LAPACKE)
#include <lapacke.h>
#endif

namespace pevol {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ComplexVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Eigenvalues of a dense real matrix. LAPACK dgeev when available,
/// Eigen's real Schur otherwise.
inline std::vector<Complex> dense_eigenvalues(const MatrixXd& a) {
  const int n = (int)a.rows();
  std::vector<Complex> out(n);
#if defined(PEVOL_USE_LAPACKE)
  MatrixXd work = a;
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(),
                           wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw numerical_error("dgeev failed to converge");
  for (int i = 0; i < n; ++i) out[i] = Complex(wr[i], wi[i]);
#else
  Eigen::EigenSolver<MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw numerical_error("eigen solver failed");
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
#endif
  return out;
}

/// Eigenvalues and right eigenvectors (columns paired LAPACK-style for
/// complex conjugate pairs).
struct EigenPairs {
  std::vector<Complex> values;
  MatrixXd vectors;  // dgeev packing: real column, or (re, im) column pair
};

inline EigenPairs dense_eigenpairs(const MatrixXd& a) {
  const int n = (int)a.rows();
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
#if defined(PEVOL_USE_LAPACKE)
  MatrixXd work = a;
  std::vector<double> wr(n), wi(n);
  int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(),
                           wi.data(), nullptr, 1, out.vectors.data(), n);
  if (info != 0) throw numerical_error("dgeev failed to converge");
  for (int i = 0; i < n; ++i) out.values[i] = Complex(wr[i], wi[i]);
#else
  Eigen::EigenSolver<MatrixXd> es(a, true);
  if (es.info() != Eigen::Success) throw numerical_error("eigen solver failed");
  for (int i = 0; i < n; ++i) {
    out.values[i] = es.eigenvalues()[i];
    // repack into the dgeev convention
    if (es.eigenvalues()[i].imag() == 0) {
      out.vectors.col(i) = es.eigenvectors().col(i).real();
    } else if (i + 1 < n) {
      out.vectors.col(i) = es.eigenvectors().col(i).real();
      out.vectors.col(i + 1) = es.eigenvectors().col(i).imag();
      ++i;
    }
  }
#endif
  return out;
}

/// Eigen-decomposition of a symmetric matrix, ascending eigenvalues.
struct SymmetricEigs {
  VectorXd values;
  MatrixXd vectors;
};

inline SymmetricEigs symmetric_eigs(const MatrixXd& a) {
  const int n = (int)a.rows();
  SymmetricEigs out;
#if defined(PEVOL_USE_LAPACKE)
  out.vectors = a;
  out.values.resize(n);
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                            out.values.data());
  if (info != 0) throw numerical_error("dsyevd failed to converge");
#else
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw numerical_error("symmetric eigen solver failed");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
#endif
  return out;
}

/// Upper Hessenberg form H = Q^T A Q. Orthogonal similarity preserves
/// singular values of zI - A, which is all the resolvent profile needs.
inline MatrixXd hessenberg_form(const MatrixXd& a) {
#if defined(PEVOL_USE_LAPACKE)
  const int n = (int)a.rows();
  MatrixXd h = a;
  std::vector<double> tau(std::max(1, n - 1));
  int info = LAPACKE_dgehrd(LAPACK_COL_MAJOR, n, 1, n, h.data(), n, tau.data());
  if (info != 0) throw numerical_error("dgehrd failed");
  for (int j = 0; j < n; ++j)
    for (int i = j + 2; i < n; ++i) h(i, j) = 0.0;
  return h;
#else
  Eigen::HessenbergDecomposition<MatrixXd> hd(a);
  return hd.matrixH();
#endif
}

/// Smallest singular value of zI - H for upper Hessenberg H: one Givens-QR
/// sweep (O(n^2)) followed by inverse iteration on the triangular factor.
/// `seed` carries the iteration vector between nearby z for warm starts.
inline double smallest_singular_shifted_hessenberg(const MatrixXd& h, Complex z,
                                                   ComplexVec* seed = nullptr) {
  const int n = (int)h.rows();
  Eigen::MatrixXcd r(n, n);
  r.setZero();
  for (int j = 0; j < n; ++j) {
    int top = std::min(j + 2, n);
    for (int i = 0; i < top; ++i) r(i, j) = (i == j ? z : Complex(0)) - h(i, j);
  }
  // Givens rotations kill the subdiagonal; rows stay upper triangular
  for (int j = 0; j < n - 1; ++j) {
    Complex a = r(j, j), b = r(j + 1, j);
    double na = std::abs(a), nb = std::abs(b);
    if (nb == 0) continue;
    double d = std::hypot(na, nb);
    Complex c = a / d;          // cos with phase of a
    Complex s = b / d;          // sin with phase of b
    for (int k = j; k < n; ++k) {
      Complex x = r(j, k), y = r(j + 1, k);
      r(j, k) = std::conj(c) * x + std::conj(s) * y;
      r(j + 1, k) = -s * x + c * y;
    }
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) dmin = std::min(dmin, std::abs(r(j, j)));
  if (!(dmin > 0)) return 0.0;  // exactly singular shift

  auto solve_upper = [&](ComplexVec& x) {  // column-oriented back substitution
    for (int j = n - 1; j >= 0; --j) {
      Complex xj = x[j] / r(j, j);
      x[j] = xj;
      for (int i = 0; i < j; ++i) x[i] -= r(i, j) * xj;
    }
  };
  auto solve_upper_adj = [&](ComplexVec& x) {  // R^H y = x, forward sweep
    for (int i = 0; i < n; ++i) {
      Complex s = x[i];
      for (int k = 0; k < i; ++k) s -= std::conj(r(k, i)) * x[k];
      x[i] = s / std::conj(r(i, i));
    }
  };

  // Deterministic random direction. Warm starts are blended with it: a stale
  // seed can be exactly orthogonal to the new minimizer (coordinate vectors
  // under near-diagonal operators), and triangular solves never rotate it
  // back on their own.
  Rng rng(4242);
  ComplexVec v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(rng.normal(), rng.normal());
  v.normalize();
  if (seed && seed->size() == n) v = (*seed + 0.05 * v).normalized();
  // The estimate climbs toward 1/smin^2 monotonically; clustered trailing
  // singular values make the tail geometric with ratio near 1, so the loop
  // is capped and the remaining tail is recovered by Aitken extrapolation
  // instead of thousands of extra solves. The cap is flop-budgeted: small
  // problems can afford to grind the far-field cluster (every singular value
  // within a few percent of smin), large sweeps cannot and lean on the
  // extrapolation plus warm starts.
  const int cap = (int)std::clamp(1.6e9 / (8.0 * n * n), 48.0, 256.0);
  double rho = 0, prev1 = 0, prev2 = 0;
  bool settled = false;
  for (int it = 0; it < cap; ++it) {
    ComplexVec w = v;
    solve_upper_adj(w);
    solve_upper(w);
    double nw = w.norm();
    if (!std::isfinite(nw) || nw == 0) break;
    v = w / nw;
    prev2 = prev1;
    prev1 = rho;
    if (it > 2 && std::abs(nw - rho) <= 1e-9 * nw) {
      rho = nw;
      settled = true;
      break;
    }
    rho = nw;
  }
  if (seed) *seed = v;
  if (!settled && prev2 > 0) {
    double d1 = rho - prev1, d0 = prev1 - prev2, den = d1 - d0;
    if (den < 0) {
      double lim = rho + d1 * d1 / -den;
      if (std::isfinite(lim) && lim <= 4 * rho) rho = lim;
    }
  }
  return rho > 0 ? 1.0 / std::sqrt(rho) : 0.0;
}

/// Extreme singular values of a complex matrix by a full SVD. O(n^3) per
/// call, so reserved for moderate sizes; the Hessenberg sweep above covers
/// the rest.
struct SingularRange {
  double smallest = 0;
  double largest = 0;
};

inline SingularRange singular_range(const Eigen::MatrixXcd& a) {
  const int n = (int)a.rows();
  if (n == 0) return {};
  std::vector<double> s(n);
#if defined(PEVOL_USE_LAPACKE)
  Eigen::MatrixXcd work = a;
  std::vector<double> superb(std::max(1, n - 1));
  int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', n, n,
                            reinterpret_cast<lapack_complex_double*>(work.data()), n,
                            s.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) throw numerical_error("zgesvd failed to converge");
#else
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  for (int i = 0; i < n; ++i) s[i] = svd.singularValues()[i];
#endif
  return {s[n - 1], s[0]};  // LAPACK and Eigen both sort descending
}

/// Largest singular value. A short power iteration on A^T A settles the
/// well-separated case in a handful of products; if the estimate is still
/// moving after the cap (clustered leading singular values stall it), the
/// Gram matrix goes to the symmetric eigensolver instead, which does not
/// care about gaps.
inline double operator_norm_estimate(const MatrixXd& a, double tol = 1e-12) {
  const int n = (int)a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  Rng rng(271828);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();
  double s = 0;
  bool stalled = true;
  for (int it = 0; it < 120; ++it) {
    VectorXd w = a.transpose() * (a * v);
    double nw = w.norm();
    if (nw == 0) break;
    v = w / nw;
    double snew = std::sqrt(nw);
    if (std::abs(snew - s) <= tol * std::max(1.0, snew)) {
      s = snew;
      stalled = false;
      break;
    }
    s = snew;
  }
  if (!stalled) return s;
  MatrixXd g = a.rows() < a.cols() ? MatrixXd(a * a.transpose())
                                   : MatrixXd(a.transpose() * a);
  const int m = (int)g.rows();
  VectorXd ev(m);
#if defined(PEVOL_USE_LAPACKE)
  int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', m, g.data(), m, ev.data());
  if (info != 0) throw numerical_error("dsyev failed to converge");
#else
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("symmetric eigen solver failed");
  ev = es.eigenvalues();
#endif
  return std::sqrt(std::max(0.0, ev.maxCoeff()));
}

/// Spectral radius by power iteration, five deterministic random starts.
/// The step ratio oscillates when the dominant mode is a complex pair, so
/// |lambda| is taken as the geometric mean of the trailing ratios.
inline double spectral_radius_estimate(const MatrixXd& a, int max_iter = 10000,
                                       double tol = 1e-9) {
  const int n = (int)a.rows();
  if (n == 0) return 0.0;
  Rng rng(314159);
  double best = 0;
  for (int trial = 0; trial < 5; ++trial) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();
    std::vector<double> logs;
    double lam = 0;
    for (int it = 0; it < max_iter; ++it) {
      VectorXd w = a * v;
      double nw = w.norm();
      if (nw < 1e-300) {
        lam = 0;
        break;
      }
      logs.push_back(std::log(nw));
      v = w / nw;
      if (logs.size() >= 32 && logs.size() % 16 == 0) {
        double tail = 0;
        for (size_t k = logs.size() - 16; k < logs.size(); ++k) tail += logs[k];
        double lnew = std::exp(tail / 16);
        if (std::abs(lnew - lam) <= tol * std::max(1.0, lnew)) {
          lam = lnew;
          break;
        }
        lam = lnew;
      }
    }
    best = std::max(best, lam);
  }
  return best;
}

/// Orthogonal involution taking the normalized constant vector to e_0;
/// conjugation by it splits off the mean, leaving the zero-sum subspace in
/// coordinates 1..d-1.
class MeanSplit {
  VectorXd u_;  // Householder direction

 public:
  explicit MeanSplit(int d) {
    VectorXd c = VectorXd::Constant(d, 1.0 / std::sqrt((double)d));
    u_ = -c;
    u_[0] += 1.0;
    double nu = u_.norm();
    if (nu > 0) u_ /= nu;
  }

  int dim() const { return (int)u_.size(); }

  VectorXd apply(const VectorXd& x) const { return x - 2.0 * u_ * u_.dot(x); }

  /// Coordinates of a zero-sum vector in the reduced basis.
  VectorXd to_reduced(const VectorXd& x) const { return apply(x).tail(dim() - 1); }

  VectorXd from_reduced(const VectorXd& g) const {
    VectorXd x = VectorXd::Zero(dim());
    x.tail(dim() - 1) = g;
    return apply(x);
  }

  /// (H A H) restricted to the zero-sum block.
  MatrixXd reduce(const MatrixXd& a) const {
    VectorXd au = a * u_;
    VectorXd ua = a.transpose() * u_;
    double uau = u_.dot(au);
    MatrixXd b = a;
    b.noalias() -= 2.0 * au * u_.transpose();
    b.noalias() -= 2.0 * u_ * ua.transpose();
    b.noalias() += 4.0 * uau * u_ * u_.transpose();
    return b.bottomRightCorner(dim() - 1, dim() - 1);
  }
};

/// Least-squares line fit y = slope*x + intercept with RMS residual.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;   // RMS of fit residuals
  double slope_err = 0;  // standard error of the slope
  int count = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f;
  f.count = (int)xs.size();
  if (f.count < 2) return f;
  double mx = 0, my = 0;
  for (int i = 0; i < f.count; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= f.count;
  my /= f.count;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < f.count; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (int i = 0; i < f.count; ++i) {
    double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / f.count);
  if (f.count > 2) f.slope_err = std::sqrt(ss / (f.count - 2) / sxx);
  return f;
}

}  // namespace pevol
