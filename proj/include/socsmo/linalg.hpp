// Small fixed-size linear algebra for the 5-state cell model: just enough to
// build the observer state space, solve the discrete Lyapunov equation and
// take the norms the dead-zone bound needs.
#pragma once

#include <array>
#include <cstddef>

namespace socsmo::linalg {

inline constexpr std::size_t kDim = 5;

using Vec = std::array<double, kDim>;
using Mat = std::array<Vec, kDim>;

Mat identity();
Mat zero();
Vec mat_vec(const Mat& m, const Vec& v);
Mat mat_mul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);
Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);

/// Euclidean norm.
double norm2(const Vec& v);

/// Largest |entry|, used for residual checks.
double max_abs(const Mat& m);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations (unordered).
std::array<double, kDim> eigenvalues_sym(Mat m);

double min_eigenvalue_sym(const Mat& m);

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double spectral_norm_sym(const Mat& m);

/// Solves A^T P A - P = -Q for symmetric P by direct elimination on the
/// 25x25 vectorized system. Throws ConfigError when A is not Schur stable.
Mat solve_discrete_lyapunov(const Mat& a, const Mat& q);

}  // namespace socsmo::linalg
