#pragma once

// Dense reference constructions used as test oracles. They rebuild every
// matrix from grid indices and the kernel formula, not from library stencils.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nlpb/grid.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline double tent(double r) { return r < 1.0 ? 1.0 - r : 0.0; }
inline double quartic(double r) { return r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0; }

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// ½∫J(|z|)|z|² dz over R (dim 1) or R² (dim 2, polar), inverted.
inline double c_j(const std::function<double(double)>& J, int dim) {
  const double m = dim == 1 ? simpson([&](double z) { return J(z) * z * z; }, 0.0, 1.0, 200000)
                            : M_PI * simpson([&](double r) { return J(r) * r * r * r; }, 0.0, 1.0, 200000);
  return 1.0 / m;
}

struct Geometry {
  nlpb::DomainSpec spec;
  std::vector<std::array<double, 2>> pos;  // node positions from indices
};

inline Geometry geometry(const nlpb::DomainSpec& s) {
  Geometry g{s, {}};
  g.pos.resize(s.node_count());
  for (int j = 0; j < s.padded(1); ++j)
    for (int i = 0; i < s.padded(0); ++i)
      g.pos[static_cast<std::size_t>(j * s.padded(0) + i)] = {i * s.dx, j * s.dx};
  return g;
}

// Full Δ_NL matrix on Ω_E with weights J(|x_i - x_j|/ε)·dx^N scaled so that
// ½ Σ_d w_d |d dx|² = 1 over the offsets inside the support.
inline Mat nonlocal_matrix(const nlpb::DomainSpec& s, const std::function<double(double)>& J, double eps) {
  const double vol = s.dim == 2 ? s.dx * s.dx : s.dx;
  const int r = static_cast<int>(std::ceil(eps / s.dx));
  double moment = 0.0;
  for (int b = (s.dim == 2 ? -r : 0); b <= (s.dim == 2 ? r : 0); ++b)
    for (int a = -r; a <= r; ++a) {
      const double d = std::hypot(a * s.dx, b * s.dx);
      if (d < eps) moment += 0.5 * J(d / eps) * vol * d * d;
    }
  const double scale = 1.0 / moment;
  const Geometry g = geometry(s);
  const auto n = static_cast<Eigen::Index>(s.node_count());
  Mat M = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = g.pos[static_cast<std::size_t>(i)];
      const auto& b = g.pos[static_cast<std::size_t>(j)];
      const double d = std::hypot(a[0] - b[0], a[1] - b[1]);
      if (d < eps) {
        const double w = scale * J(d / eps) * vol;
        M(i, j) = w;
        M(i, i) -= w;
      }
    }
  }
  return M;
}

// Embedding P: interior values (rank order) -> all nodes.
inline Mat embedding(const nlpb::DomainSpec& s) {
  Mat P = Mat::Zero(static_cast<Eigen::Index>(s.node_count()), static_cast<Eigen::Index>(s.interior_count()));
  for (std::size_t k = 0; k < s.interior_count(); ++k)
    P(static_cast<Eigen::Index>(s.interior_node(k)), static_cast<Eigen::Index>(k)) = 1.0;
  return P;
}

// 3/5-point Laplacian of the zero extension at every node (rows beyond the
// first ghost ring are identically zero).
inline Mat local_matrix(const nlpb::DomainSpec& s) {
  const auto n = static_cast<Eigen::Index>(s.node_count());
  const double inv = 1.0 / (s.dx * s.dx);
  const Mat P = embedding(s);
  Mat L = Mat::Zero(n, n);
  const int nx = s.padded(0);
  const int ny = s.padded(1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Eigen::Index row = j * nx + i;
      auto couple = [&](int ii, int jj) {
        if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) return;
        L(row, jj * nx + ii) += inv;
        L(row, row) -= inv;
      };
      couple(i - 1, j);
      couple(i + 1, j);
      if (s.dim == 2) {
        couple(i, j - 1);
        couple(i, j + 1);
      }
    }
  // Only interior columns matter for zero-extended inputs.
  return L * P * P.transpose();
}

inline Vec interior(const nlpb::Field& f) {
  const auto v = f.interior_values();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vec all_nodes(const nlpb::Field& f) {
  const auto v = f.values();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// p = 2 implicit Euler for u_t = -AᵀA u restricted to Ω: (I + h PᵀAᵀAP) w = u.
inline std::vector<Vec> implicit_euler(const Mat& A, const nlpb::DomainSpec& s, const Vec& u0, double h, int steps) {
  const Mat P = embedding(s);
  const Mat AP = A * P;
  const Mat S = Mat::Identity(P.cols(), P.cols()) + h * AP.transpose() * AP;
  const Eigen::LDLT<Mat> ldlt(S);
  std::vector<Vec> out{u0};
  for (int k = 0; k < steps; ++k) out.push_back(ldlt.solve(out.back()));
  return out;
}

// Σ_{i∈Ω} Σ_{j≠i} w_ij (ũ_j - u_i)² as a matrix on interior values.
inline Mat poincare_matrix(const Mat& A, const nlpb::DomainSpec& s) {
  const auto n = static_cast<Eigen::Index>(s.interior_count());
  Mat K = Mat::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto i = static_cast<Eigen::Index>(s.interior_node(static_cast<std::size_t>(a)));
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j == i || A(i, j) == 0.0) continue;
      const double w = A(i, j);
      K(a, a) += w;
      if (s.is_interior(static_cast<std::size_t>(j))) {
        const auto b = static_cast<Eigen::Index>(s.interior_rank(static_cast<std::size_t>(j)));
        K(b, b) += w;
        K(a, b) -= w;
        K(b, a) -= w;
      }
    }
  }
  return K;
}

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace oracle
