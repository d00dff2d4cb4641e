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

#ifndef STOKES_TOMOGRAPHY_HPP
#define STOKES_TOMOGRAPHY_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stokes/fock_core.hpp"
#include "stokes/menagerie.hpp"
#include "stokes/moments.hpp"

namespace stokes {

// ---------------------------------------------------------------------------
// Measurement simulation

struct MeasurementSetting {
  Direction direction;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;

  /// (phi, theta, 0): U S3 U^dagger = S_n.
  EulerAngles angles() const { return {direction.azimuth(), direction.polar(), 0.0}; }
};

/// Counts over joint outcomes (N, s) with s an eigenvalue of S_n.
struct MeasurementRecord {
  MeasurementSetting setting;
  std::map<std::pair<int, int>, std::uint64_t> counts;

  std::uint64_t total() const;
};

struct Outcome {
  int N;
  int s;
  double probability;
};

/// Uniform double in [0, 1) determined by (seed, index) alone.
double counter_uniform(std::uint64_t seed, std::uint64_t index);

/// Probabilities of s = N - 2k, k = 0..N (descending s).
std::vector<double> outcome_distribution(const ManifoldState& state, const Direction& n);

/// Joint law over (N, s), weighted by p_N.
std::vector<Outcome> outcome_distribution(const BlockDiagonalState& state, const Direction& n);

/// i.i.d. shots; shot i depends only on (seed, i).
MeasurementRecord simulate_measurement(const BlockDiagonalState& state,
                                       const MeasurementSetting& setting);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct ManifoldMoments {
  std::uint64_t count = 0;
  double probability = 0.0;
  std::map<int, MomentEstimate> moments;
};

struct EmpiricalMoments {
  std::uint64_t shots = 0;
  std::map<int, ManifoldMoments> manifolds;

  /// Empty when manifold N recorded no counts.
  std::optional<MomentEstimate> moment(int N, int r) const;
  std::optional<double> probability(int N) const;
};

/// Sample moments of s^r per manifold with plug-in standard errors.
EmpiricalMoments estimate_moments(const MeasurementRecord& record, std::span<const int> orders);

/// Exact distribution moments (zero standard error), the infinite-shot limit.
EmpiricalMoments exact_moments(const BlockDiagonalState& state, const Direction& n,
                               std::span<const int> orders);

// ---------------------------------------------------------------------------
// Measurement directions

enum class DirectionSetKind { Axes, Icosahedral, SymmetricSevenLine, ConditionedFallback, Generic };

struct DirectionSet {
  DirectionSetKind kind;
  int order;
  std::vector<Direction> directions;
  int rank = 0;
  double condition_number = 0.0;

  bool rank_deficient() const { return rank < 2 * order + 1; }
  std::string tag() const;
};

struct DirectionChoice {
  DirectionSet primary;
  /// Working replacement when primary is rank deficient (third order).
  std::optional<DirectionSet> fallback;

  const DirectionSet& working() const { return fallback ? *fallback : primary; }
};

/// r = 1: axes; r = 2: five icosahedral lines; r = 3: the symmetric
/// seven-line set (rank deficient) plus a conditioned fallback; r >= 4:
/// generic 2r+1 directions chosen by condition-number search.
DirectionChoice choose_directions(int r);

/// Singular values of the design matrix mapping the 2r+1 degree-r harmonic
/// coefficients (L2-orthonormal on the sphere) to <S_n^r> at each direction.
Eigen::VectorXd design_singular_values(std::span<const Direction> dirs, int r);
double design_condition_number(std::span<const Direction> dirs, int r);

// ---------------------------------------------------------------------------
// Moment-component inversion

/// The five icosahedral measurement directions n_1..n_5.
std::array<Direction, 5> icosahedral_directions();

/// M^(2,N) from <S_{n_i}^2>_N, i = 1..5, via the explicit six formulas.
MomentComponents closed_form_second_order(const std::array<double, 5>& measured, int N);

/// Same formulas with N(N+2) replaced by an arbitrary Casimir value, e.g.
/// <S0(S0+2)> for photon-number averaged data.
MomentComponents closed_form_second_order_casimir(const std::array<double, 5>& measured,
                                                  double casimir);

/// The design has fewer independent rows than 2r+1 unknowns.
class RankDeficientDesign : public std::runtime_error {
 public:
  RankDeficientDesign(int order, int rank, std::vector<std::vector<double>> null_space);

  int order() const { return order_; }
  int rank() const { return rank_; }
  /// Unresolved degree-r harmonics, as monomial coefficient vectors in
  /// MomentComponents order.
  const std::vector<std::vector<double>>& null_space() const { return null_; }

 private:
  int order_;
  int rank_;
  std::vector<std::vector<double>> null_;
};

struct ComponentSolution {
  MomentComponents components;
  double residual = 0.0;
  double condition_number = 0.0;
};

/// Least-squares M^(r,N) from <S_{n_i}^r>_N. The parts of the profile below
/// harmonic degree r are fixed by `lower` (the order r-2 components; order 0
/// is {1}), which leaves 2r+1 unknowns. `lower` is ignored for r = 1.
/// Throws RankDeficientDesign when the directions cannot resolve them.
ComponentSolution solve_moment_components(std::span<const Direction> dirs,
                                          std::span<const double> measured, int N, int r,
                                          const std::optional<MomentComponents>& lower);

/// Order-by-order tensors T^(1..R,N) from components M^(1..R,N).
std::vector<PolarizationTensor> assemble_all_tensors(std::span<const MomentComponents> comps,
                                                     int N);

// ---------------------------------------------------------------------------
// Density reconstruction

struct DensityReconstruction {
  ManifoldState state;
  /// Hermitian unit-trace linear-inversion result before PSD projection.
  CMatrix unprojected;
  double projection_distance = 0.0;
  double condition_number = 0.0;
  double residual = 0.0;
};

double trace_distance(const CMatrix& a, const CMatrix& b);

/// Hermitian, unit-trace, PSD matrix nearest in spectrum: negative
/// eigenvalues clipped to zero and the trace renormalized.
CMatrix project_to_density(const CMatrix& m);

/// Linear inversion of Tr(rho O) = <O> over {1} and the ordered products of
/// orders 1..N, whose expectations are read from `tensors` (orders 1..N).
DensityReconstruction reconstruct_density(std::span<const PolarizationTensor> tensors, int N);

// ---------------------------------------------------------------------------
// Pipeline

struct TomographyOptions {
  /// Shots per setting; empty means exact distribution moments.
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 0;
  /// Use the symmetric seven-line set for third order instead of the fallback.
  bool symmetric_third_order = false;
};

struct ManifoldReconstruction {
  int N = 0;
  double probability = 0.0;
  std::vector<MomentComponents> components;
  std::vector<PolarizationTensor> tensors;
  /// Empty only while the manifold is being assembled.
  std::optional<DensityReconstruction> density;
  double condition_number = 0.0;
  double residual = 0.0;
};

struct ReconstructionResult {
  std::vector<ManifoldReconstruction> manifolds;
  std::vector<DirectionSet> direction_sets;

  BlockDiagonalState state() const;
};

/// Simulates every order's settings on `truth`, estimates per-manifold
/// moments, solves for components, assembles tensors and reconstructs each
/// populated manifold.
ReconstructionResult run_tomography(const BlockDiagonalState& truth, const TomographyOptions& opts);

// ---------------------------------------------------------------------------
// Photon-number averaged data, support in manifolds {0, 1, 2}

struct NonResolvedInput {
  double s0 = 0.0;     ///< <S0>
  double s0_sq = 0.0;  ///< <S0^2>
  double m1 = 0.0;     ///< <S_n>
  double m2 = 0.0;     ///< <S_n^2>
  double m3 = 0.0;     ///< <S_n^3>
};

struct NonResolvedResult {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::optional<double> first_order_1;   ///< <S_n>_1
  std::optional<double> first_order_2;   ///< <S_n>_2
  std::optional<double> second_order_2;  ///< <S_n^2>_2
};

/// Throws std::domain_error if an inferred probability is below -tol.
NonResolvedResult non_resolved_pipeline(const NonResolvedInput& in, double tol = 1e-9);

/// <S0(S0+2)>, the right-hand side of M20 + M02 + M00 for averaged data.
inline double averaged_casimir(double s0, double s0_sq) { return s0_sq + 2.0 * s0; }

}  // namespace stokes

#endif  // STOKES_TOMOGRAPHY_HPP
