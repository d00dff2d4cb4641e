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

#include "stokes/menagerie.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "combinatorics.hpp"
#include "stokes/factorials.hpp"

namespace stokes {

using detail::binomial;
using detail::ipow;

namespace {

constexpr double kStateTol = 1e-10;

void check_density(const CMatrix& rho, const char* what) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
    throw std::invalid_argument(std::string(what) + ": density matrix is not Hermitian");
  }
  const cplx tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > kStateTol || std::abs(tr.imag()) > kStateTol) {
    throw std::invalid_argument(std::string(what) + ": density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kStateTol) {
    throw std::invalid_argument(std::string(what) + ": density matrix is not positive semidefinite");
  }
}

CMatrix hermitize(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

}  // namespace

ManifoldState ManifoldState::pure(int N, CVector amplitudes) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (amplitudes.size() != N + 1) {
    throw std::invalid_argument("amplitude vector length must be N+1");
  }
  if (std::abs(amplitudes.norm() - 1.0) > kStateTol) {
    throw std::invalid_argument("amplitude vector is not normalized");
  }
  CMatrix rho = amplitudes * amplitudes.adjoint();
  return ManifoldState(N, std::move(rho), std::move(amplitudes));
}

ManifoldState ManifoldState::mixed(int N, CMatrix density) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (density.rows() != N + 1 || density.cols() != N + 1) {
    throw std::invalid_argument("density matrix dimension must be N+1");
  }
  check_density(density, "manifold state");
  return ManifoldState(N, hermitize(density), std::nullopt);
}

cplx ManifoldState::expectation(const CMatrix& op) const {
  if (op.rows() != rho_.rows() || op.cols() != rho_.cols()) {
    throw std::invalid_argument("operator dimension does not match state");
  }
  return (rho_ * op).trace();
}

double ManifoldState::purity() const { return (rho_ * rho_).trace().real(); }

BlockDiagonalState::BlockDiagonalState(std::vector<Block> blocks, double truncation_deficit)
    : blocks_(std::move(blocks)), deficit_(truncation_deficit) {
  if (blocks_.empty()) throw std::invalid_argument("block-diagonal state needs at least one block");
  std::set<int> seen;
  double total = 0.0;
  for (const auto& b : blocks_) {
    if (b.N != b.state.photons()) throw std::invalid_argument("block label does not match its state");
    if (!(b.probability > 0.0)) throw std::invalid_argument("block probabilities must be positive");
    if (!seen.insert(b.N).second) {
      throw std::invalid_argument("duplicate manifold " + std::to_string(b.N));
    }
    total += b.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("block probabilities do not sum to 1");
  }
  std::sort(blocks_.begin(), blocks_.end(), [](const Block& a, const Block& b) { return a.N < b.N; });
}

BlockDiagonalState BlockDiagonalState::single(ManifoldState state) {
  const int N = state.photons();
  return BlockDiagonalState({Block{N, 1.0, std::move(state)}});
}

double BlockDiagonalState::probability(int N) const {
  for (const auto& b : blocks_) {
    if (b.N == N) return b.probability;
  }
  return 0.0;
}

const ManifoldState* BlockDiagonalState::find(int N) const {
  for (const auto& b : blocks_) {
    if (b.N == N) return &b.state;
  }
  return nullptr;
}

int BlockDiagonalState::max_photons() const { return blocks_.back().N; }

double BlockDiagonalState::mean_photons() const {
  double m = 0.0;
  for (const auto& b : blocks_) m += b.probability * b.N;
  return m;
}

double BlockDiagonalState::mean_photons_squared() const {
  double m = 0.0;
  for (const auto& b : blocks_) m += b.probability * b.N * b.N;
  return m;
}

int GeneralTwoModeState::lattice_index(int n_h, int n_v) {
  if (n_h < 0 || n_v < 0) throw std::out_of_range("negative occupation");
  const int N = n_h + n_v;
  return N * (N + 1) / 2 + n_v;
}

GeneralTwoModeState GeneralTwoModeState::pure(int n_max, CVector amplitudes,
                                              double truncation_deficit) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (amplitudes.size() != lattice_size(n_max)) {
    throw std::invalid_argument("amplitude vector does not match the Fock lattice");
  }
  if (std::abs(amplitudes.norm() - 1.0) > kStateTol) {
    throw std::invalid_argument("amplitude vector is not normalized");
  }
  if (truncation_deficit > kTruncationBound) {
    throw std::invalid_argument("truncation deficit exceeds bound");
  }
  CMatrix rho = amplitudes * amplitudes.adjoint();
  return GeneralTwoModeState(n_max, std::move(rho), std::move(amplitudes), truncation_deficit);
}

GeneralTwoModeState GeneralTwoModeState::mixed(int n_max, CMatrix density,
                                               double truncation_deficit) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  if (density.rows() != lattice_size(n_max) || density.cols() != lattice_size(n_max)) {
    throw std::invalid_argument("density matrix does not match the Fock lattice");
  }
  check_density(density, "two-mode state");
  if (truncation_deficit > kTruncationBound) {
    throw std::invalid_argument("truncation deficit exceeds bound");
  }
  return GeneralTwoModeState(n_max, hermitize(density), std::nullopt, truncation_deficit);
}

ManifoldState su2_coherent(int N, double theta, double phi) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  const cplx i(0.0, 1.0);
  const double s = std::sin(theta / 2);
  const double c = std::cos(theta / 2);
  CVector v(N + 1);
  for (int n = 0; n <= N; ++n) {
    // |n, N-n> sits at basis index N-n.
    v[N - n] = std::exp(-i * (n * phi)) * std::sqrt(binomial(N, n)) * ipow(s, N - n) * ipow(c, n);
  }
  v.normalize();
  return ManifoldState::pure(N, std::move(v));
}

namespace {

// Poisson weights e^{-l} l^N / N! for N = 0..n_max, and the mass above n_max.
std::pair<std::vector<double>, double> poisson_weights(double mean, int n_max) {
  std::vector<double> w(n_max + 1, 0.0);
  double kept = 0.0;
  for (int N = 0; N <= n_max; ++N) {
    w[N] = (mean == 0.0) ? (N == 0 ? 1.0 : 0.0)
                         : std::exp(-mean + N * std::log(mean) - std::lgamma(N + 1.0));
    kept += w[N];
  }
  double tail = 0.0;
  if (mean > 0.0) {
    for (int N = n_max + 1;; ++N) {
      const double t = std::exp(-mean + N * std::log(mean) - std::lgamma(N + 1.0));
      tail += t;
      if (N > mean && t < 1e-18 * std::max(tail, 1e-300)) break;
      if (N > n_max + 10000) break;
    }
  }
  for (double& x : w) x /= kept;
  return {std::move(w), tail};
}

}  // namespace

BlockDiagonalState two_mode_coherent(double mean_photons, int n_max) {
  if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
    throw std::invalid_argument("mean photon number must be finite and non-negative");
  }
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  auto [w, tail] = poisson_weights(mean_photons, n_max);
  if (tail > kTruncationBound) {
    throw std::invalid_argument("truncation at n_max=" + std::to_string(n_max) +
                                " discards probability " + std::to_string(tail) +
                                "; raise --nmax");
  }
  std::vector<Block> blocks;
  for (int N = 0; N <= n_max; ++N) {
    if (w[N] <= 0.0) continue;
    CVector v = CVector::Zero(N + 1);
    v[0] = 1.0;
    blocks.push_back(Block{N, w[N], ManifoldState::pure(N, std::move(v))});
  }
  double total = 0.0;
  for (const auto& b : blocks) total += b.probability;
  for (auto& b : blocks) b.probability /= total;
  return BlockDiagonalState(std::move(blocks), tail);
}

GeneralTwoModeState two_mode_coherent_lattice(cplx alpha, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
  const double mean = std::norm(alpha);
  auto [w, tail] = poisson_weights(mean, n_max);
  if (tail > kTruncationBound) throw std::invalid_argument("truncation bound violated; raise n_max");
  const double phase = std::arg(alpha);
  const cplx i(0.0, 1.0);
  CVector v = CVector::Zero(GeneralTwoModeState::lattice_size(n_max));
  for (int N = 0; N <= n_max; ++N) {
    v[GeneralTwoModeState::lattice_index(N, 0)] = std::sqrt(w[N]) * std::exp(i * (N * phase));
  }
  v.normalize();
  return GeneralTwoModeState::pure(n_max, std::move(v), tail);
}

ManifoldState twin_fock(int m) {
  if (m < 0) throw std::invalid_argument("twin-Fock photon number must be non-negative");
  CVector v = CVector::Zero(2 * m + 1);
  v[m] = 1.0;
  return ManifoldState::pure(2 * m, std::move(v));
}

ManifoldState transformed_twin_fock(int m, const EulerAngles& angles) {
  if (m < 0) throw std::invalid_argument("twin-Fock photon number must be non-negative");
  const double s = std::sin(angles.theta);
  const double c = std::cos(angles.theta);
  const cplx i(0.0, 1.0);
  CVector v = CVector::Zero(2 * m + 1);
  for (int k = 0; k <= 2 * m; ++k) {
    double sum = 0.0;
    for (int j = 0; j <= k / 2; ++j) {
      const double b = binomial(m, j) * binomial(m - j, j + m - k);
      if (b == 0.0) continue;
      sum += b * ipow(-0.25, j) * ipow(s, m - k + 2 * j) * ipow(c, k - 2 * j);
    }
    const double pref = std::ldexp(1.0, k - m) *
                        std::exp(0.5 * (std::lgamma(2 * m - k + 1.0) + std::lgamma(k + 1.0)) -
                                 std::lgamma(m + 1.0));
    const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
    v[k] = sign * pref * sum * std::exp(-i * (angles.phi * (m - k)));
  }
  return ManifoldState::pure(2 * m, std::move(v));
}

GeneralTwoModeState tmsv(double mean_photons, std::vector<double> phases, int m_max) {
  if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) {
    throw std::invalid_argument("mean photon number must be finite and non-negative");
  }
  if (m_max < 0) throw std::invalid_argument("m_max must be non-negative");
  const double q = mean_photons / (2.0 + mean_photons);
  const double tail = std::pow(q, m_max + 1);
  if (tail > kTruncationBound) {
    throw std::invalid_argument("truncation at m_max=" + std::to_string(m_max) +
                                " discards probability " + std::to_string(tail) +
                                "; raise --mmax");
  }
  phases.resize(m_max + 1, 0.0);
  const int n_max = 2 * m_max;
  const cplx i(0.0, 1.0);
  CVector v = CVector::Zero(GeneralTwoModeState::lattice_size(n_max));
  for (int m = 0; m <= m_max; ++m) {
    const double w = (1.0 - q) * std::pow(q, m);
    v[GeneralTwoModeState::lattice_index(m, m)] = std::sqrt(w) * std::exp(i * phases[m]);
  }
  v.normalize();
  return GeneralTwoModeState::pure(n_max, std::move(v), tail);
}

ManifoldState noon(int N) {
  if (N < 1) throw std::invalid_argument("NOON state needs N >= 1");
  CVector v = CVector::Zero(N + 1);
  v[0] = v[N] = 1.0 / std::sqrt(2.0);
  return ManifoldState::pure(N, std::move(v));
}

ManifoldState unpolarized_two_photon(double a, double theta) {
  const double amax = 1.0 / std::sqrt(2.0);
  if (!(a >= 0.0) || a > amax + 1e-12) {
    throw std::invalid_argument("parameter a must lie in [0, 1/sqrt(2)]");
  }
  a = std::min(a, amax);
  const cplx i(0.0, 1.0);
  CVector v(3);
  v[0] = a * std::exp(-i * theta);
  v[1] = i * std::sqrt(std::max(0.0, 1.0 - 2.0 * a * a));
  v[2] = a * std::exp(i * theta);
  v.normalize();
  return ManifoldState::pure(2, std::move(v));
}

ManifoldState single_photon_density(double pi0, double re, double im) {
  CMatrix rho(2, 2);
  rho << pi0, cplx(re, im), cplx(re, -im), 1.0 - pi0;
  try {
    return ManifoldState::mixed(1, std::move(rho));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("non-physical single-photon parameters (need R^2+I^2 <= pi0(1-pi0))");
  }
}

ManifoldState two_photon_density(const TwoPhotonParams& p) {
  CMatrix rho(3, 3);
  rho << p.pi1, cplx(p.r1, p.i1), cplx(p.r2, p.i2),  //
      cplx(p.r1, -p.i1), p.pi2, cplx(p.r3, p.i3),    //
      cplx(p.r2, -p.i2), cplx(p.r3, -p.i3), 1.0 - p.pi1 - p.pi2;
  try {
    return ManifoldState::mixed(2, std::move(rho));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("non-physical two-photon parameters");
  }
}

BlockDiagonalState polarization_sector(const GeneralTwoModeState& state) {
  const int n_max = state.n_max();
  const CMatrix& rho = state.density();
  std::vector<Block> blocks;
  double total = 0.0;
  for (int N = 0; N <= n_max; ++N) {
    const int offset = N * (N + 1) / 2;
    if (state.amplitudes()) {
      // Amplitudes give exact block weights, so only true zeros are dropped.
      CVector psi = state.amplitudes()->segment(offset, N + 1);
      const double p = psi.squaredNorm();
      if (!(p > 0.0)) continue;
      total += p;
      psi /= std::sqrt(p);
      blocks.push_back(Block{N, p, ManifoldState::pure(N, std::move(psi))});
    } else {
      CMatrix block = rho.block(offset, offset, N + 1, N + 1);
      const double p = block.trace().real();
      if (!(p > 1e-15)) continue;
      total += p;
      blocks.push_back(Block{N, p, ManifoldState::mixed(N, block / p)});
    }
  }
  for (auto& b : blocks) b.probability /= total;
  return BlockDiagonalState(std::move(blocks), state.truncation_deficit());
}

ManifoldState apply_su2(const ManifoldState& state, const EulerAngles& angles) {
  const CMatrix u = su2_unitary(angles, state.photons()).matrix();
  if (state.amplitudes()) {
    CVector psi = u * *state.amplitudes();
    psi.normalize();
    return ManifoldState::pure(state.photons(), std::move(psi));
  }
  return ManifoldState::mixed(state.photons(), u * state.density() * u.adjoint());
}

BlockDiagonalState apply_su2(const BlockDiagonalState& state, const EulerAngles& angles) {
  std::vector<Block> blocks;
  for (const auto& b : state.blocks()) {
    blocks.push_back(Block{b.N, b.probability, apply_su2(b.state, angles)});
  }
  return BlockDiagonalState(std::move(blocks), state.truncation_deficit());
}

namespace {

double pole_profile(int N, int r, double n3) {
  const double c2 = (1.0 + n3) / 2;
  const double s2 = (1.0 - n3) / 2;
  double out = 0.0;
  for (int k = 0; k <= N; ++k) {
    out += ipow(N - 2.0 * k, r) * binomial(N, k) * ipow(s2, k) * ipow(c2, N - k);
  }
  return out;
}

// Skellam moments: s = X1 - X2 with independent Poisson counts whose odd
// cumulants are nbar n3 and even cumulants nbar.
double coherent_profile(double nbar, int r, double n3) {
  switch (r) {
    case 0:
      return 1.0;
    case 1:
      return nbar * n3;
    case 2:
      return nbar * (1.0 + nbar * n3 * n3);
    case 3:
      return nbar * n3 * (1.0 + 3.0 * nbar + nbar * nbar * n3 * n3);
    default:
      break;
  }
  std::vector<double> m(r + 1, 0.0);
  m[0] = 1.0;
  for (int q = 1; q <= r; ++q) {
    for (int j = 0; j < q; ++j) {
      const double kappa = ((j + 1) % 2 == 1) ? nbar * n3 : nbar;
      m[q] += binomial(q - 1, j) * kappa * m[q - 1 - j];
    }
  }
  return m[r];
}

double double_factorial_odd(int two_j_minus_1) {
  double out = 1.0;
  for (int k = two_j_minus_1; k > 1; k -= 2) out *= k;
  return out;
}

// 2^r sum_j [(2j-1)!!]^2 F(r,2j) w_j sin^{2j}, with w_j supplied per family.
template <class W>
double even_hidden_profile(int r, double sin2, W&& weight) {
  if (r % 2 == 1) return 0.0;
  if (r == 0) return 1.0;
  const auto& table = central_factorials();
  double out = 0.0;
  for (int j = 1; j <= r / 2; ++j) {
    const double df = double_factorial_odd(2 * j - 1);
    out += df * df * table.F_value(r, 2 * j) * weight(j) * ipow(sin2, j);
  }
  return std::ldexp(out, r);
}

double noon_profile(int N, int r, const Direction& n) {
  const cplx z = std::pow(cplx(n[0], n[1]), N);  // sin^N(Theta) e^{i N Phi}
  const double c2 = (1.0 + n[2]) / 2;
  const double s2 = (1.0 - n[2]) / 2;
  if (r % 2 == 1) {
    if (N % 2 == 0) return 0.0;
    double sum = 0.0;
    for (int k = 0; k <= (N - 1) / 2; ++k) {
      sum += ipow(N - 2.0 * k, r) * binomial(N, k) * ((k % 2 == 0) ? 1.0 : -1.0);
    }
    return z.real() * sum / std::pow(4.0, (N - 1) / 2.0);
  }
  // cos(N Phi) cos^N(Theta/2) sin^N(Theta/2) = Re(z) / 2^N
  const double cross = std::ldexp(z.real(), -N);
  double out = 0.0;
  for (int k = 0; k <= N; ++k) {
    out += ipow(N - 2.0 * k, r) * binomial(N, k) *
           (ipow(c2, k) * ipow(s2, N - k) + ((k % 2 == 0) ? 1.0 : -1.0) * cross);
  }
  return out;
}

}  // namespace

double closed_form_profile(const FamilySpec& spec, int r, const Direction& n) {
  if (r < 0) throw std::invalid_argument("profile order must be non-negative");
  const double sin2 = std::max(0.0, 1.0 - n[2] * n[2]);
  switch (spec.family) {
    case Family::Su2CoherentPole:
      if (spec.photons < 0) throw std::invalid_argument("N must be non-negative");
      return pole_profile(spec.photons, r, n[2]);
    case Family::TwoModeCoherent:
      return coherent_profile(spec.mean_photons, r, n[2]);
    case Family::TwinFock: {
      const int m = spec.photons;
      if (m < 0) throw std::invalid_argument("m must be non-negative");
      return even_hidden_profile(r, sin2, [m](int j) { return binomial(m + j, 2 * j); });
    }
    case Family::Tmsv: {
      // Thermal pair weights average C(m+j, 2j) to (nbar(nbar+2)/4)^j.
      const double x = spec.mean_photons * (spec.mean_photons + 2.0) / 4.0;
      return even_hidden_profile(r, sin2, [x](int j) { return ipow(x, j); });
    }
    case Family::Noon:
      if (spec.photons < 1) throw std::invalid_argument("NOON state needs N >= 1");
      if (r == 0) return 1.0;
      return noon_profile(spec.photons, r, n);
  }
  throw std::invalid_argument("unsupported family");
}

double single_photon_profile(double pi0, double re, double im, const Direction& n) {
  return 2 * re * n[0] - 2 * im * n[1] + (2 * pi0 - 1) * n[2];
}

double two_photon_profile(const TwoPhotonParams& p, int r, const Direction& n) {
  const double s2 = std::sqrt(2.0);
  const double n1 = n[0], n2 = n[1], n3 = n[2];
  if (r == 1) {
    return 2 * s2 * ((p.r1 + p.r3) * n1 - (p.i1 + p.i3) * n2) + 2 * (2 * p.pi1 + p.pi2 - 1) * n3;
  }
  if (r == 2) {
    return 2 * (1 + p.pi2 + 2 * p.r2) * n1 * n1 + 2 * (1 + p.pi2 - 2 * p.r2) * n2 * n2 +
           4 * (1 - p.pi2) * n3 * n3 - 8 * p.i2 * n1 * n2 +
           4 * s2 * n3 * ((p.r1 - p.r3) * n1 - (p.i1 - p.i3) * n2);
  }
  throw std::invalid_argument("two-photon closed form is available for r = 1, 2 only");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Su2CoherentPole:
      return "su2_coherent";
    case Family::TwoModeCoherent:
      return "coherent";
    case Family::TwinFock:
      return "twin_fock";
    case Family::Tmsv:
      return "tmsv";
    case Family::Noon:
      return "noon";
  }
  return "unknown";
}

}  // namespace stokes
