#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nlpb {

/// Symmetric positive definite matrix with half-bandwidth `bandwidth`,
/// lower band stored row by row. `factorize()` overwrites the band with its
/// Cholesky factor L; `solve()` then applies (L Lᵀ)^{-1}.
class BandedSpdMatrix {
 public:
  BandedSpdMatrix() = default;
  BandedSpdMatrix(std::size_t n, std::size_t bandwidth);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }
  bool factorized() const { return factorized_; }

  /// A(i, j) += v for |i - j| <= bandwidth; the symmetric twin is implied.
  void add(std::size_t i, std::size_t j, double v);
  double get(std::size_t i, std::size_t j) const;
  void add_diagonal(double v);

  /// y = A x (before factorisation).
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Throws ConvergenceError if a pivot is not positive.
  void factorize();
  void solve(std::span<double> rhs) const;

 private:
  double& at(std::size_t i, std::size_t k) { return band_[i * (bw_ + 1) + k]; }
  double at(std::size_t i, std::size_t k) const { return band_[i * (bw_ + 1) + k]; }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> band_;  // row i, column i - k stored at k
  bool factorized_ = false;
};

}  // namespace nlpb
