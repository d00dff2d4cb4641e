// Copyright 2026 The Stokes Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOKES_FOCK_CORE_HPP
#define STOKES_FOCK_CORE_HPP

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace stokes {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Largest manifold accepted by constructors. Defaults to 32 and can be
/// overridden through the STOKES_LAB_NMAX environment variable.
int manifold_cap();

/// Throws std::invalid_argument unless 0 <= N <= manifold_cap().
void check_manifold(int N);

/// Basis of the N-photon manifold. Index k labels |N-k, k>, i.e. the
/// horizontal count decreases along the basis.
struct ManifoldBasis {
  int N = 0;

  int dimension() const { return N + 1; }
  /// (n_H, n_V) for basis index k.
  std::pair<int, int> occupation(int k) const { return {N - k, k}; }
  int index_of(int n_h, int n_v) const;
};

/// Dense operator restricted to one excitation manifold.
class ManifoldOperator {
 public:
  ManifoldOperator(int N, CMatrix matrix);

  int photons() const { return n_; }
  int dimension() const { return n_ + 1; }
  const CMatrix& matrix() const { return m_; }

  ManifoldOperator operator*(const ManifoldOperator& rhs) const;
  ManifoldOperator operator+(const ManifoldOperator& rhs) const;
  ManifoldOperator operator-(const ManifoldOperator& rhs) const;
  ManifoldOperator adjoint() const;
  ManifoldOperator power(int r) const;

  bool is_hermitian(double tol = 1e-12) const;

 private:
  int n_;
  CMatrix m_;
};

/// Unit vector on the Poincare sphere.
class Direction {
 public:
  /// Throws std::invalid_argument when |v| differs from 1 by more than 1e-12.
  explicit Direction(const Eigen::Vector3d& v);
  Direction(double x, double y, double z) : Direction(Eigen::Vector3d(x, y, z)) {}

  /// (sin t cos p, sin t sin p, cos t).
  static Direction from_angles(double theta, double phi);
  /// Rescales any non-zero vector onto the sphere.
  static Direction normalized(const Eigen::Vector3d& v);
  static Direction axis(int j);

  const Eigen::Vector3d& vector() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  double polar() const;
  double azimuth() const;
  Direction operator-() const { return Direction(Eigen::Vector3d(-v_)); }

 private:
  Eigen::Vector3d v_;
};

struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double xi = 0.0;
};

/// Matrix of S_j (j = 0..3) on the N-photon manifold, built from two-mode
/// ladder-operator actions.
ManifoldOperator stokes_operator(int j, int N);

/// n . S on the N-photon manifold.
ManifoldOperator stokes_in_direction(const Direction& n, int N);

/// exp(-i t H) for Hermitian H, by spectral decomposition.
CMatrix hermitian_exp(const CMatrix& h, double t);

/// exp(-i phi S3/2) exp(-i theta S2/2) exp(-i xi S3/2).
ManifoldOperator su2_unitary(const EulerAngles& angles, int N);

/// Proper rotation by phi about e_axis (axis in 1..3).
Eigen::Matrix3d rotation_matrix(int axis, double phi);

/// R3(phi) R2(theta) R3(xi), the rotation induced by su2_unitary(angles).
Eigen::Matrix3d rotation_from_euler(const EulerAngles& angles);

/// U S_n U^dagger.
ManifoldOperator conjugate_stokes(const EulerAngles& angles, const Direction& n, int N);

}  // namespace stokes

#endif  // STOKES_FOCK_CORE_HPP
