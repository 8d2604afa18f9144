#pragma once

// Helpers shared by the unit tests and the acceptance binary. The oracles
// here deliberately avoid the library code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcwnnm/image.hpp"
#include "mcwnnm/patch_search.hpp"

namespace testsupport {

using mcwnnm::ImagePlanes;
using mcwnnm::Origin;

inline std::filesystem::path data_dir() { return MCWNNM_TEST_DATA_DIR; }

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, int rows, int cols,
                                       double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline ImagePlanes random_image(std::mt19937_64& rng, int width, int height, double lo = 0.0,
                                double hi = 255.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  ImagePlanes img(width, height);
  for (int c = 0; c < 3; ++c)
    for (double& v : img.plane(c)) v = u(rng);
  return img;
}

// Smooth colour test pattern with some texture, values inside [20, 235].
inline ImagePlanes pattern_image(int width, int height, int phase = 0) {
  ImagePlanes img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int k = 0; k < width; ++k) {
      const double x = k + phase, y = r;
      img.at(0, r, k) = 128 + 90 * std::sin(x / 7.0) * std::cos(y / 11.0);
      img.at(1, r, k) = 128 + 80 * std::cos((x + y) / 9.0);
      img.at(2, r, k) = 128 + 60 * std::sin(x / 5.0 + y / 13.0) + ((r / 8 + k / 8) % 2 ? 25 : -25);
    }
  }
  return img;
}

// Channel order (c0, c1, c2) -> (c[perm[0]], c[perm[1]], c[perm[2]]).
inline ImagePlanes permute_channels(const ImagePlanes& img, const std::array<int, 3>& perm) {
  ImagePlanes out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    auto src = img.plane(perm[c]);
    std::copy(src.begin(), src.end(), out.plane(c).begin());
  }
  return out;
}

inline double max_abs_diff(const ImagePlanes& a, const ImagePlanes& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto pa = a.plane(c), pb = b.plane(c);
    for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  }
  return m;
}

// Low-rank colour group plus per-channel noise, intensity units.
inline Eigen::MatrixXd random_group(std::mt19937_64& rng, int p, int M,
                                    const std::array<double, 3>& sigmas, int rank = 4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = 3 * p * p;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, M);
  for (int k = 0; k < rank; ++k) {
    Eigen::VectorXd a(d), b(M);
    for (int i = 0; i < d; ++i) a(i) = u(rng);
    for (int j = 0; j < M; ++j) b(j) = u(rng);
    L += a * b.transpose();
  }
  L = (L / rank * 0.8).array() + 0.1;
  L *= 255.0;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < d; ++i) L(i, j) += sigmas[i / (p * p)] * n(rng);
  return L;
}

// Squared distance between patches straight from the image.
inline double patch_distance(const ImagePlanes& img, Origin a, Origin b, int p,
                             std::optional<int> channel = std::nullopt) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) {
    if (channel && *channel != c) continue;
    for (int dr = 0; dr < p; ++dr)
      for (int dc = 0; dc < p; ++dc) {
        const double e = img.at(c, a.row + dr, a.col + dc) - img.at(c, b.row + dr, b.col + dc);
        d += e * e;
      }
  }
  return d;
}

struct Candidate {
  Origin o;
  double d;
};

// Exhaustive block matching: every origin in the (already grown) window,
// fully sorted with the documented tie-break, reference first.
inline std::vector<Candidate> brute_force_match(const ImagePlanes& img, Origin ref, int p, int M,
                                                const mcwnnm::SearchWindow& w,
                                                std::mt19937_64* shuffle = nullptr) {
  std::vector<Candidate> cand;
  for (int r = w.row_begin; r < w.row_end; ++r)
    for (int c = w.col_begin; c < w.col_end; ++c) {
      const Origin o{r, c};
      if (o == ref) continue;
      cand.push_back({o, patch_distance(img, ref, o, p)});
    }
  if (shuffle) std::shuffle(cand.begin(), cand.end(), *shuffle);
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.o < b.o;
  });
  std::vector<Candidate> out{{ref, 0.0}};
  out.insert(out.end(), cand.begin(), cand.begin() + (M - 1));
  return out;
}

// Scalar objective (s - x)^2 + (2C/rho) * x / (x + eps): the per-value
// penalized problem with self-referential weights C / (x + eps).
inline double reweighted_scalar_objective(double s, double x, double rho, double C, double eps) {
  return (s - x) * (s - x) + (2.0 * C / rho) * x / (x + eps);
}

// Grid minimizer of the scalar objective on [0, s] with the given step.
inline double grid_minimize(double s, double rho, double C, double eps, double step) {
  double best_x = 0.0;
  double best = reweighted_scalar_objective(s, 0.0, rho, C, eps);
  const long n = static_cast<long>(std::ceil(s / step));
  for (long i = 1; i <= n; ++i) {
    const double x = std::min(s, i * step);
    const double f = reweighted_scalar_objective(s, x, rho, C, eps);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

// Singular values via Eigen's Jacobi SVD, independent of LAPACK.
inline Eigen::VectorXd jacobi_singular_values(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
}

// Plain singular value thresholding at tau using Jacobi SVD.
inline Eigen::MatrixXd jacobi_svt(const Eigen::MatrixXd& A, double tau) {
  Eigen::JacobiSVD<Eigen::MatrixXd> s(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd v = (s.singularValues().array() - tau).max(0.0).matrix();
  return s.matrixU() * v.asDiagonal() * s.matrixV().transpose();
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace testsupport
