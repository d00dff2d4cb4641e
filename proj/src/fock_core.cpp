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

#include "stokes/fock_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace stokes {

namespace {

constexpr int kDefaultManifoldCap = 32;

// A two-mode Fock ket with an amplitude; ladder operators act on it in place.
struct FockKet {
  int n_h;
  int n_v;
  double amp;
};

enum class Mode { H, V };

void annihilate(FockKet& ket, Mode m) {
  int& n = (m == Mode::H) ? ket.n_h : ket.n_v;
  ket.amp *= std::sqrt(static_cast<double>(n));
  n = (n > 0) ? n - 1 : 0;
}

void create(FockKet& ket, Mode m) {
  int& n = (m == Mode::H) ? ket.n_h : ket.n_v;
  ket.amp *= std::sqrt(static_cast<double>(n + 1));
  ++n;
}

// Matrix of creation(to) * annihilation(from) on the N manifold.
CMatrix hop(int N, Mode to, Mode from) {
  const ManifoldBasis basis{N};
  CMatrix m = CMatrix::Zero(N + 1, N + 1);
  for (int k = 0; k <= N; ++k) {
    auto [nh, nv] = basis.occupation(k);
    FockKet ket{nh, nv, 1.0};
    annihilate(ket, from);
    if (ket.amp == 0.0) continue;
    create(ket, to);
    m(basis.index_of(ket.n_h, ket.n_v), k) += ket.amp;
  }
  return m;
}

}  // namespace

int manifold_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("STOKES_LAB_NMAX")) {
      try {
        int v = std::stoi(env);
        if (v >= 0) return v;
      } catch (const std::exception&) {
      }
    }
    return kDefaultManifoldCap;
  }();
  return cap;
}

void check_manifold(int N) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (N > manifold_cap()) {
    throw std::invalid_argument("manifold N=" + std::to_string(N) + " exceeds cap " +
                                std::to_string(manifold_cap()) +
                                " (set STOKES_LAB_NMAX to raise it)");
  }
}

int ManifoldBasis::index_of(int n_h, int n_v) const {
  if (n_h < 0 || n_v < 0 || n_h + n_v != N) {
    throw std::out_of_range("occupation not in manifold " + std::to_string(N));
  }
  return n_v;
}

ManifoldOperator::ManifoldOperator(int N, CMatrix matrix) : n_(N), m_(std::move(matrix)) {
  if (m_.rows() != N + 1 || m_.cols() != N + 1) {
    throw std::invalid_argument("operator dimension does not match manifold");
  }
}

ManifoldOperator ManifoldOperator::operator*(const ManifoldOperator& rhs) const {
  if (rhs.n_ != n_) throw std::invalid_argument("manifold mismatch in product");
  return ManifoldOperator(n_, m_ * rhs.m_);
}

ManifoldOperator ManifoldOperator::operator+(const ManifoldOperator& rhs) const {
  if (rhs.n_ != n_) throw std::invalid_argument("manifold mismatch in sum");
  return ManifoldOperator(n_, m_ + rhs.m_);
}

ManifoldOperator ManifoldOperator::operator-(const ManifoldOperator& rhs) const {
  if (rhs.n_ != n_) throw std::invalid_argument("manifold mismatch in difference");
  return ManifoldOperator(n_, m_ - rhs.m_);
}

ManifoldOperator ManifoldOperator::adjoint() const { return ManifoldOperator(n_, m_.adjoint()); }

ManifoldOperator ManifoldOperator::power(int r) const {
  if (r < 0) throw std::invalid_argument("negative operator power");
  CMatrix out = CMatrix::Identity(n_ + 1, n_ + 1);
  for (int i = 0; i < r; ++i) out = out * m_;
  return ManifoldOperator(n_, std::move(out));
}

bool ManifoldOperator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Direction::Direction(const Eigen::Vector3d& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("direction is not a unit vector");
  }
}

Direction Direction::from_angles(double theta, double phi) {
  return Direction(Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                   std::sin(theta) * std::sin(phi), std::cos(theta)));
}

Direction Direction::normalized(const Eigen::Vector3d& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  return Direction(Eigen::Vector3d(v / norm));
}

Direction Direction::axis(int j) {
  if (j < 1 || j > 3) throw std::invalid_argument("axis index must be 1, 2 or 3");
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  v[j - 1] = 1.0;
  return Direction(v);
}

double Direction::polar() const { return std::acos(std::clamp(v_[2], -1.0, 1.0)); }

double Direction::azimuth() const { return std::atan2(v_[1], v_[0]); }

ManifoldOperator stokes_operator(int j, int N) {
  if (j < 0 || j > 3) throw std::invalid_argument("Stokes index must be in 0..3");
  check_manifold(N);
  const cplx i(0.0, 1.0);
  switch (j) {
    case 0:
      return ManifoldOperator(N, hop(N, Mode::H, Mode::H) + hop(N, Mode::V, Mode::V));
    case 1:
      return ManifoldOperator(N, hop(N, Mode::V, Mode::H) + hop(N, Mode::H, Mode::V));
    case 2:
      return ManifoldOperator(N, i * (hop(N, Mode::V, Mode::H) - hop(N, Mode::H, Mode::V)));
    default:
      return ManifoldOperator(N, hop(N, Mode::H, Mode::H) - hop(N, Mode::V, Mode::V));
  }
}

ManifoldOperator stokes_in_direction(const Direction& n, int N) {
  CMatrix m = CMatrix::Zero(N + 1, N + 1);
  for (int j = 1; j <= 3; ++j) m += n[j - 1] * stokes_operator(j, N).matrix();
  return ManifoldOperator(N, std::move(m));
}

CMatrix hermitian_exp(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const cplx i(0.0, 1.0);
  Eigen::VectorXcd phases = (-i * t * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

ManifoldOperator su2_unitary(const EulerAngles& angles, int N) {
  const CMatrix s2 = stokes_operator(2, N).matrix();
  const CMatrix s3 = stokes_operator(3, N).matrix();
  return ManifoldOperator(N, hermitian_exp(s3, angles.phi / 2) *
                                 hermitian_exp(s2, angles.theta / 2) *
                                 hermitian_exp(s3, angles.xi / 2));
}

Eigen::Matrix3d rotation_matrix(int axis, double phi) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("rotation axis must be 1, 2 or 3");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix3d r;
  switch (axis) {
    case 1:
      r << 1, 0, 0, 0, c, -s, 0, s, c;
      break;
    case 2:
      r << c, 0, s, 0, 1, 0, -s, 0, c;
      break;
    default:
      r << c, -s, 0, s, c, 0, 0, 0, 1;
      break;
  }
  return r;
}

Eigen::Matrix3d rotation_from_euler(const EulerAngles& angles) {
  return rotation_matrix(3, angles.phi) * rotation_matrix(2, angles.theta) *
         rotation_matrix(3, angles.xi);
}

ManifoldOperator conjugate_stokes(const EulerAngles& angles, const Direction& n, int N) {
  const ManifoldOperator u = su2_unitary(angles, N);
  return u * stokes_in_direction(n, N) * u.adjoint();
}

}  // namespace stokes
