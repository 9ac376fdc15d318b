#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cabm {

/// Even-order real skew-symmetric matrix. The lower triangle is defined as
/// the negated upper triangle at construction, so A + A^T == 0 holds exactly
/// (no tolerance involved) and stays that way: the wrapper is immutable.
class SkewMatrix {
 public:
  /// Builds from an order x order matrix whose upper triangle (i<j) carries
  /// the data; the diagonal and lower triangle of the argument are ignored.
  static SkewMatrix fromUpper(const Eigen::MatrixXd& upper) {
    const Eigen::Index n = upper.rows();
    if (n != upper.cols()) throw std::invalid_argument("SkewMatrix: square matrix required");
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("SkewMatrix: order must be even and >= 2");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = upper(i, j);
        if (!std::isfinite(v)) throw std::invalid_argument("SkewMatrix: non-finite entry");
        m(i, j) = v;
        m(j, i) = -v;
      }
    return SkewMatrix(std::move(m));
  }

  Eigen::Index order() const { return mat_.rows(); }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

 private:
  explicit SkewMatrix(Eigen::MatrixXd m) : mat_(std::move(m)) {}
  Eigen::MatrixXd mat_;
};

/// Pfaffian by skew-symmetric LTL^T elimination with partial pivoting,
/// destroying the working copy in place. O(n^3); sign convention
/// pfaffian([[0,a],[-a,0]]) == a. If every candidate pivot in some step is
/// below `pivotFloor` in magnitude the matrix is treated as singular and the
/// result is 0.
template <class Derived>
double pfaffianInPlace(Eigen::MatrixBase<Derived>& a, double pivotFloor = 1e-300) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = a.rows();
  Scalar pf = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Largest |A(i,k)|, i > k, moves into the (k+1,k) position.
    Eigen::Index kp = k + 1;
    Scalar best = std::abs(a(k + 1, k));
    for (Eigen::Index i = k + 2; i < n; ++i) {
      const Scalar v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        kp = i;
      }
    }
    if (!(best >= pivotFloor)) return 0.0;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    const Scalar pivot = a(k, k + 1);
    pf *= pivot;
    if (k + 2 < n) {
      const auto tau = (a.row(k).segment(k + 2, n - k - 2) / pivot).eval();
      const auto col = a.col(k + 1).segment(k + 2, n - k - 2).eval();
      auto block = a.block(k + 2, k + 2, n - k - 2, n - k - 2);
      block += tau.transpose() * col.transpose();
      block -= col * tau;
      // Mirror entries of the update round independently, so the block must
      // be put back to exact skew-symmetry: the pivot search reads one
      // triangle and the division the other, and once the block is down at
      // roundoff scale a mismatch turns into a division by zero.
      const Eigen::Index r = n - k - 2;
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j) block(j, i) = -block(i, j);
    }
  }
  return pf;
}

/// Pfaffian of a SkewMatrix (non-destructive).
inline double pfaffian(const SkewMatrix& a) {
  Eigen::MatrixXd work = a.matrix();
  if (!work.allFinite()) throw std::invalid_argument("pfaffian: non-finite entry");
  return pfaffianInPlace(work);
}

/// Reference Pfaffian by recursive first-row expansion, O(n!!). Only for
/// cross-checking the elimination path; refuses orders above 12.
inline double pfaffianBruteforce(const SkewMatrix& a) {
  const Eigen::Index n = a.order();
  if (n > 12) throw std::invalid_argument("pfaffianBruteforce: order capped at 12");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  const auto& m = a.matrix();
  // pf(A) = sum_j (-1)^j A(i0, ij) pf(A with rows/cols i0, ij removed).
  auto rec = [&m](auto&& self, std::vector<Eigen::Index>& live) -> double {
    if (live.empty()) return 1.0;
    const Eigen::Index i0 = live.front();
    double acc = 0.0;
    double sign = 1.0;
    for (std::size_t j = 1; j < live.size(); ++j) {
      std::vector<Eigen::Index> rest;
      rest.reserve(live.size() - 2);
      for (std::size_t l = 1; l < live.size(); ++l)
        if (l != j) rest.push_back(live[l]);
      acc += sign * m(i0, live[j]) * self(self, rest);
      sign = -sign;
    }
    return acc;
  };
  return rec(rec, idx);
}

}  // namespace cabm
