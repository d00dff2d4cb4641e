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

#ifndef STOKES_MENAGERIE_HPP
#define STOKES_MENAGERIE_HPP

#include <optional>
#include <string>
#include <vector>

#include "stokes/fock_core.hpp"

namespace stokes {

/// Normalized state on one excitation manifold. Pure states keep their
/// amplitude vector alongside the density matrix.
class ManifoldState {
 public:
  /// Amplitudes in ManifoldBasis order; the norm must be 1 within 1e-10.
  static ManifoldState pure(int N, CVector amplitudes);
  /// Must be Hermitian, unit trace and PSD (min eigenvalue >= -1e-10).
  static ManifoldState mixed(int N, CMatrix density);

  int photons() const { return n_; }
  int dimension() const { return n_ + 1; }
  const CMatrix& density() const { return rho_; }
  const std::optional<CVector>& amplitudes() const { return psi_; }
  bool is_pure() const { return psi_.has_value(); }

  cplx expectation(const CMatrix& op) const;
  cplx expectation(const ManifoldOperator& op) const { return expectation(op.matrix()); }
  double purity() const;

 private:
  ManifoldState(int N, CMatrix rho, std::optional<CVector> psi)
      : n_(N), rho_(std::move(rho)), psi_(std::move(psi)) {}

  int n_;
  CMatrix rho_;
  std::optional<CVector> psi_;
};

struct Block {
  int N;
  double probability;
  ManifoldState state;
};

/// The polarization sector: a photon-number distribution with one normalized
/// state per populated manifold. Blocks are kept sorted by N.
class BlockDiagonalState {
 public:
  /// Probabilities must be positive and sum to 1 within 1e-12; N values
  /// must be distinct. truncation_deficit records probability dropped by a
  /// truncating constructor before renormalization.
  explicit BlockDiagonalState(std::vector<Block> blocks, double truncation_deficit = 0.0);
  static BlockDiagonalState single(ManifoldState state);

  const std::vector<Block>& blocks() const { return blocks_; }
  /// p_N, zero for manifolds that are not populated.
  double probability(int N) const;
  const ManifoldState* find(int N) const;
  int max_photons() const;
  double mean_photons() const;
  double mean_photons_squared() const;
  double truncation_deficit() const { return deficit_; }

 private:
  std::vector<Block> blocks_;
  double deficit_;
};

/// Two-mode state on the truncated Fock lattice n_H + n_V <= n_max.
/// Lattice index of |n_H, n_V> is N(N+1)/2 + n_V with N = n_H + n_V.
class GeneralTwoModeState {
 public:
  static GeneralTwoModeState pure(int n_max, CVector amplitudes, double truncation_deficit = 0.0);
  static GeneralTwoModeState mixed(int n_max, CMatrix density, double truncation_deficit = 0.0);

  static int lattice_size(int n_max) { return (n_max + 1) * (n_max + 2) / 2; }
  static int lattice_index(int n_h, int n_v);

  int n_max() const { return n_max_; }
  const CMatrix& density() const { return rho_; }
  const std::optional<CVector>& amplitudes() const { return psi_; }
  double truncation_deficit() const { return deficit_; }

 private:
  GeneralTwoModeState(int n_max, CMatrix rho, std::optional<CVector> psi, double deficit)
      : n_max_(n_max), rho_(std::move(rho)), psi_(std::move(psi)), deficit_(deficit) {}

  int n_max_;
  CMatrix rho_;
  std::optional<CVector> psi_;
  double deficit_;
};

/// Tail mass allowed to be discarded by truncating constructors.
inline constexpr double kTruncationBound = 1e-10;

/// |N; theta, phi>: eigenstate of S_n with eigenvalue N.
ManifoldState su2_coherent(int N, double theta, double phi);

/// Polarization sector of |alpha, 0> with |alpha|^2 = mean_photons: Poissonian
/// weights over |N, 0>, N <= n_max. Throws if the discarded tail exceeds
/// kTruncationBound.
BlockDiagonalState two_mode_coherent(double mean_photons, int n_max);

/// |alpha, 0> on the Fock lattice, for exercising polarization_sector.
GeneralTwoModeState two_mode_coherent_lattice(cplx alpha, int n_max);

/// |m, m> on manifold 2m.
ManifoldState twin_fock(int m);

/// U(angles)|m, m> from the closed-form binomial double sum.
ManifoldState transformed_twin_fock(int m, const EulerAngles& angles);

/// Two-mode squeezed vacuum with thermal pair weights 2 nbar^m/(2+nbar)^(m+1)
/// on |m, m>, m <= m_max. Missing phases default to zero.
GeneralTwoModeState tmsv(double mean_photons, std::vector<double> phases, int m_max);

/// (|N,0> + |0,N>)/sqrt(2), N >= 1.
ManifoldState noon(int N);

/// a e^{-i theta}|2,0> + i sqrt(1-2a^2)|1,1> + a e^{i theta}|0,2>, 0 <= a <= 1/sqrt(2).
ManifoldState unpolarized_two_photon(double a, double theta);

/// [[pi0, R + iI], [R - iI, 1 - pi0]].
ManifoldState single_photon_density(double pi0, double re, double im);

struct TwoPhotonParams {
  double pi1 = 1.0;
  double pi2 = 0.0;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  double i1 = 0.0, i2 = 0.0, i3 = 0.0;
};

ManifoldState two_photon_density(const TwoPhotonParams& p);

/// p_N = Tr(1_N rho), rho_N = 1_N rho 1_N / p_N. Empty manifolds are omitted.
BlockDiagonalState polarization_sector(const GeneralTwoModeState& state);

ManifoldState apply_su2(const ManifoldState& state, const EulerAngles& angles);
BlockDiagonalState apply_su2(const BlockDiagonalState& state, const EulerAngles& angles);

/// Families with analytic Stokes moment profiles.
enum class Family { Su2CoherentPole, TwoModeCoherent, TwinFock, Tmsv, Noon };

struct FamilySpec {
  Family family;
  /// N for Su2CoherentPole and Noon, m for TwinFock.
  int photons = 0;
  /// nbar for TwoModeCoherent and Tmsv.
  double mean_photons = 0.0;
};

/// Analytic <S_n^r> for the family (photon-number averaged for the
/// multi-manifold families).
double closed_form_profile(const FamilySpec& spec, int r, const Direction& n);

/// First-order profile of single_photon_density.
double single_photon_profile(double pi0, double re, double im, const Direction& n);

/// First- (r = 1) or second-order (r = 2) profile of two_photon_density.
double two_photon_profile(const TwoPhotonParams& p, int r, const Direction& n);

std::string family_name(Family f);

}  // namespace stokes

#endif  // STOKES_MENAGERIE_HPP
