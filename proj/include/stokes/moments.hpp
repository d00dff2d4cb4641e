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

#ifndef STOKES_MOMENTS_HPP
#define STOKES_MOMENTS_HPP

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "stokes/fock_core.hpp"
#include "stokes/menagerie.hpp"

namespace stokes {

inline constexpr int kMaxTensorOrder = 6;

/// A word of Stokes indices, each in 1..3, leftmost first.
using StokesWord = std::vector<int>;

/// Rank-r Cartesian tensor T_{j1..jr} = <S_j1 ... S_jr>_N, stored densely
/// with the leftmost index varying slowest. photons() is empty for
/// photon-number averaged tensors.
class PolarizationTensor {
 public:
  PolarizationTensor(int order, std::optional<int> N, std::vector<cplx> elements);
  static PolarizationTensor zeros(int order, std::optional<int> N);

  int order() const { return r_; }
  std::optional<int> photons() const { return n_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<cplx>& elements() const { return data_; }

  cplx operator()(std::initializer_list<int> word) const;
  cplx at(std::span<const int> word) const { return data_[flat_index(word)]; }
  cplx& at(std::span<const int> word) { return data_[flat_index(word)]; }
  cplx at_flat(std::size_t i) const { return data_[i]; }
  cplx& at_flat(std::size_t i) { return data_[i]; }

  static std::size_t flat_index(std::span<const int> word);
  static StokesWord word_of(int order, std::size_t flat);

  /// max |T_w - conj(T_reverse(w))|.
  double hermiticity_defect() const;

  PolarizationTensor& operator+=(const PolarizationTensor& rhs);
  PolarizationTensor operator*(double s) const;
  PolarizationTensor operator-(const PolarizationTensor& rhs) const;
  double max_abs_difference(const PolarizationTensor& rhs) const;

 private:
  int r_;
  std::optional<int> n_;
  std::vector<cplx> data_;
};

/// The m_r = (r+1)(r+2)/2 real coefficients M_{k,l} of
/// <S_n^r> = sum n1^k n2^l n3^(r-k-l) M_{k,l}.
class MomentComponents {
 public:
  MomentComponents(int order, std::optional<int> N);
  MomentComponents(int order, std::optional<int> N, std::vector<double> values);

  static int count(int order) { return (order + 1) * (order + 2) / 2; }
  static int index(int order, int k, int l);

  int order() const { return r_; }
  std::optional<int> photons() const { return n_; }
  double operator()(int k, int l) const { return values_[index(r_, k, l)]; }
  double& operator()(int k, int l) { return values_[index(r_, k, l)]; }
  const std::vector<double>& values() const { return values_; }

  MomentComponents& operator+=(const MomentComponents& rhs);
  MomentComponents operator*(double s) const;
  double max_abs_difference(const MomentComponents& rhs) const;

 private:
  int r_;
  std::optional<int> n_;
  std::vector<double> values_;
};

/// Number of words with k ones, l twos and r-k-l threes.
std::uint64_t trinomial(int r, int k, int l);

PolarizationTensor tensor(const ManifoldState& state, int r);

/// M_{k,l} as the sum over each permutation class. Throws std::domain_error
/// if the imaginary residue exceeds 1e-10 relative to the tensor scale.
MomentComponents moment_components(const PolarizationTensor& t);

double profile_eval(const MomentComponents& m, const Direction& n);

/// Tr(rho_N S_n^r) by matrix powers.
double direct_profile(const ManifoldState& state, int r, const Direction& n);

/// sum n(1)_j1 ... n(r)_jr T_{j1..jr}; one direction per tensor slot.
cplx multi_direction_expectation(const PolarizationTensor& t, std::span<const Direction> dirs);

/// Order r-1 tensor recovered from commutator differences of adjacent slots.
/// Every admissible slot is used and they must agree within 1e-9.
PolarizationTensor tensor_descend(const PolarizationTensor& t);

/// S1^k S2^l S3^(r-k-l).
ManifoldOperator ordered_product(int k, int l, int r, int N);

/// Hermitian operator sum over the (k,l) permutation class; its expectation
/// is M_{k,l}.
ManifoldOperator symmetrized_product(int k, int l, int r, int N);

/// |<S>| / <S0> with photon-number averaged first moments. Throws for vacuum.
double degree_of_polarization(const BlockDiagonalState& state);
double degree_of_polarization(const ManifoldState& state);
/// Per-manifold value; empty when p_N = 0.
std::optional<double> manifold_degree_of_polarization(const BlockDiagonalState& state, int N);

/// Gamma_{jk,N} = Re T_jk - T_j T_k.
Eigen::Matrix3d covariance_matrix(const ManifoldState& state);
/// sum_N p_N Gamma_N.
Eigen::Matrix3d covariance_matrix(const BlockDiagonalState& state);
std::optional<Eigen::Matrix3d> covariance_matrix(const BlockDiagonalState& state, int N);

/// Parameter counts for block-diagonal states and moment orders.
struct ParameterCounts {
  /// -1 + sum (N_k + 1)^2 over the listed manifolds.
  static std::int64_t block_diagonal(std::span<const int> manifolds);
  /// Same count for manifolds 0..cutoff, closed form.
  static std::int64_t block_diagonal_cutoff(int cutoff);
  /// Real parameters of a general state with at most `cutoff` photons.
  static std::int64_t full_state(int cutoff);
  static std::int64_t components(int r) { return MomentComponents::count(r); }
  static std::int64_t independent_components(int r) { return 2 * r + 1; }
  /// sum_{r=1}^{N} (2r+1).
  static std::int64_t manifold_total(int N) { return static_cast<std::int64_t>(N) * (N + 2); }
  /// sum_{r=1}^{R} m_r for photon-number averaged data.
  static std::int64_t averaged_components(int R);
};

/// Second-order tensor from M^(2,N) and the Stokes vector (closed form).
PolarizationTensor assemble_tensor_order2(const MomentComponents& m2, const PolarizationTensor& t1);

/// Third-order tensor from M^(3,N) and T^(2,N) (closed form).
PolarizationTensor assemble_tensor_order3(const MomentComponents& m3, const PolarizationTensor& t2);

/// Any order: each permutation class is spread over its words using the
/// commutator differences supplied by the order r-1 tensor. For r = 1 pass
/// the order-0 tensor {1}.
PolarizationTensor assemble_tensor(const MomentComponents& m, const PolarizationTensor& lower);

/// sum_N p_N f(block state) for tensors, components or scalars.
template <class F>
auto averaged(const BlockDiagonalState& state, F&& per_manifold) {
  const auto& blocks = state.blocks();
  auto acc = per_manifold(blocks.front().state) * blocks.front().probability;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    acc += per_manifold(blocks[i].state) * blocks[i].probability;
  }
  return acc;
}

PolarizationTensor averaged_tensor(const BlockDiagonalState& state, int r);
MomentComponents averaged_components(const BlockDiagonalState& state, int r);
double averaged_profile(const BlockDiagonalState& state, int r, const Direction& n);

}  // namespace stokes

#endif  // STOKES_MOMENTS_HPP
