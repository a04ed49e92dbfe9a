// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The lsmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lsmimo::detail {

// Plain complex products; std::complex operator* carries NaN recovery code
// that dominates these small kernels.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline std::complex<double> mul_conj(std::complex<double> a, std::complex<double> b) {
  return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

/// Overwrites the lower triangle of the Hermitian matrix `a` with its
/// Cholesky factor and `b` with a^{-1} b. Returns false if `a` is not
/// positive definite.
inline bool cholesky_solve_in_place(Eigen::MatrixXcd& a, Eigen::MatrixXcd& b) {
  using C = std::complex<double>;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  C* A = a.data();
  C* B = b.data();
  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = A[j + j * n].real();
    for (Eigen::Index p = 0; p < j; ++p) d -= std::norm(A[j + p * n]);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    inv_diag[j] = 1.0 / ljj;
    A[j + j * n] = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      C s = A[i + j * n];
      for (Eigen::Index p = 0; p < j; ++p) s -= mul_conj(A[i + p * n], A[j + p * n]);
      A[i + j * n] = s * inv_diag[j];
    }
  }
  for (Eigen::Index c = 0; c < m; ++c) {
    C* x = B + c * n;
    for (Eigen::Index i = 0; i < n; ++i) {
      C s = x[i];
      for (Eigen::Index p = 0; p < i; ++p) s -= mul(A[i + p * n], x[p]);
      x[i] = s * inv_diag[i];
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      C s = x[i];
      for (Eigen::Index p = i + 1; p < n; ++p) s -= mul_conj(x[p], A[p + i * n]);
      x[i] = s * inv_diag[i];
    }
  }
  return true;
}

}  // namespace lsmimo::detail
