#include "nlpb/banded.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "nlpb/errors.hpp"

namespace nlpb {

BandedSpdMatrix::BandedSpdMatrix(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(std::min(bandwidth, n == 0 ? 0 : n - 1)), band_(n * (bw_ + 1), 0.0) {}

void BandedSpdMatrix::add(std::size_t i, std::size_t j, double v) {
  if (i < j) std::swap(i, j);
  assert(i - j <= bw_);
  at(i, i - j) += v;
}

double BandedSpdMatrix::get(std::size_t i, std::size_t j) const {
  if (i < j) std::swap(i, j);
  return i - j <= bw_ ? at(i, i - j) : 0.0;
}

void BandedSpdMatrix::add_diagonal(double v) {
  for (std::size_t i = 0; i < n_; ++i) at(i, 0) += v;
}

void BandedSpdMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    y[i] += at(i, 0) * x[i];
    const std::size_t kmax = std::min(bw_, i);
    for (std::size_t k = 1; k <= kmax; ++k) {
      const double a = at(i, k);
      y[i] += a * x[i - k];
      y[i - k] += a * x[i];
    }
  }
}

void BandedSpdMatrix::factorize() {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jmin = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = jmin; j <= i; ++j) {
      // L(i,j) = (A(i,j) - Σ_k L(i,k) L(j,k)) / L(j,j), k over the shared band
      double s = at(i, i - j);
      const std::size_t kmin = std::max(jmin, j > bw_ ? j - bw_ : 0);
      for (std::size_t k = kmin; k < j; ++k) s -= at(i, i - k) * at(j, j - k);
      if (j == i) {
        if (!(s > 0.0)) throw ConvergenceError("banded Cholesky: matrix is not positive definite at row " + std::to_string(i));
        at(i, 0) = std::sqrt(s);
      } else {
        at(i, i - j) = s / at(j, 0);
      }
    }
  }
  factorized_ = true;
}

void BandedSpdMatrix::solve(std::span<double> b) const {
  assert(factorized_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i];
    const std::size_t kmin = i > bw_ ? i - bw_ : 0;
    for (std::size_t k = kmin; k < i; ++k) s -= at(i, i - k) * b[k];
    b[i] = s / at(i, 0);
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = b[ii];
    const std::size_t kmax = std::min(n_ - 1, ii + bw_);
    for (std::size_t k = ii + 1; k <= kmax; ++k) s -= at(k, k - ii) * b[k];
    b[ii] = s / at(ii, 0);
  }
}

}  // namespace nlpb
