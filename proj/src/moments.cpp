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

#include "stokes/moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "combinatorics.hpp"

namespace stokes {

namespace {

std::size_t pow3(int r) {
  std::size_t p = 1;
  for (int i = 0; i < r; ++i) p *= 3;
  return p;
}

void check_order(int r) {
  if (r < 0 || r > kMaxTensorOrder) {
    throw std::invalid_argument("tensor order must lie in 0.." + std::to_string(kMaxTensorOrder));
  }
}

std::optional<int> merge_photons(std::optional<int> a, std::optional<int> b) {
  return (a == b) ? a : std::nullopt;
}

// Levi-Civita symbol on 1-based indices.
int epsilon(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  const bool cyclic = (a == 1 && b == 2) || (a == 2 && b == 3) || (a == 3 && b == 1);
  return cyclic ? 1 : -1;
}

std::pair<int, int> class_of(const StokesWord& w) {
  int k = 0, l = 0;
  for (int j : w) {
    if (j == 1) ++k;
    if (j == 2) ++l;
  }
  return {k, l};
}

}  // namespace

PolarizationTensor::PolarizationTensor(int order, std::optional<int> N, std::vector<cplx> elements)
    : r_(order), n_(N), data_(std::move(elements)) {
  check_order(order);
  if (data_.size() != pow3(order)) throw std::invalid_argument("tensor must have 3^r elements");
}

PolarizationTensor PolarizationTensor::zeros(int order, std::optional<int> N) {
  check_order(order);
  return PolarizationTensor(order, N, std::vector<cplx>(pow3(order), cplx(0.0)));
}

cplx PolarizationTensor::operator()(std::initializer_list<int> word) const {
  if (static_cast<int>(word.size()) != r_) throw std::invalid_argument("word length must equal order");
  return data_[flat_index(std::span<const int>(word.begin(), word.size()))];
}

std::size_t PolarizationTensor::flat_index(std::span<const int> word) {
  std::size_t idx = 0;
  for (int j : word) {
    if (j < 1 || j > 3) throw std::invalid_argument("Stokes index must be 1, 2 or 3");
    idx = idx * 3 + static_cast<std::size_t>(j - 1);
  }
  return idx;
}

StokesWord PolarizationTensor::word_of(int order, std::size_t flat) {
  StokesWord w(order);
  for (int p = order - 1; p >= 0; --p) {
    w[p] = static_cast<int>(flat % 3) + 1;
    flat /= 3;
  }
  return w;
}

double PolarizationTensor::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    StokesWord w = word_of(r_, i);
    std::reverse(w.begin(), w.end());
    worst = std::max(worst, std::abs(data_[i] - std::conj(data_[flat_index(w)])));
  }
  return worst;
}

PolarizationTensor& PolarizationTensor::operator+=(const PolarizationTensor& rhs) {
  if (rhs.r_ != r_) throw std::invalid_argument("tensor order mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  n_ = merge_photons(n_, rhs.n_);
  return *this;
}

PolarizationTensor PolarizationTensor::operator*(double s) const {
  PolarizationTensor out = *this;
  for (auto& x : out.data_) x *= s;
  return out;
}

PolarizationTensor PolarizationTensor::operator-(const PolarizationTensor& rhs) const {
  if (rhs.r_ != r_) throw std::invalid_argument("tensor order mismatch");
  PolarizationTensor out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  out.n_ = merge_photons(n_, rhs.n_);
  return out;
}

double PolarizationTensor::max_abs_difference(const PolarizationTensor& rhs) const {
  if (rhs.r_ != r_) throw std::invalid_argument("tensor order mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) worst = std::max(worst, std::abs(data_[i] - rhs.data_[i]));
  return worst;
}

MomentComponents::MomentComponents(int order, std::optional<int> N)
    : MomentComponents(order, N, std::vector<double>(count(order), 0.0)) {}

MomentComponents::MomentComponents(int order, std::optional<int> N, std::vector<double> values)
    : r_(order), n_(N), values_(std::move(values)) {
  if (order < 0) throw std::invalid_argument("moment order must be non-negative");
  if (static_cast<int>(values_.size()) != count(order)) {
    throw std::invalid_argument("moment components need (r+1)(r+2)/2 values");
  }
}

int MomentComponents::index(int order, int k, int l) {
  if (k < 0 || l < 0 || k + l > order) throw std::out_of_range("moment component index out of range");
  return k * (order + 1) - k * (k - 1) / 2 + l;
}

MomentComponents& MomentComponents::operator+=(const MomentComponents& rhs) {
  if (rhs.r_ != r_) throw std::invalid_argument("moment order mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  n_ = merge_photons(n_, rhs.n_);
  return *this;
}

MomentComponents MomentComponents::operator*(double s) const {
  MomentComponents out = *this;
  for (auto& x : out.values_) x *= s;
  return out;
}

double MomentComponents::max_abs_difference(const MomentComponents& rhs) const {
  if (rhs.r_ != r_) throw std::invalid_argument("moment order mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    worst = std::max(worst, std::abs(values_[i] - rhs.values_[i]));
  }
  return worst;
}

std::uint64_t trinomial(int r, int k, int l) {
  if (k < 0 || l < 0 || k + l > r) return 0;
  return static_cast<std::uint64_t>(detail::binomial(r, k) * detail::binomial(r - k, l));
}

PolarizationTensor tensor(const ManifoldState& state, int r) {
  check_order(r);
  const int N = state.photons();
  const std::array<CMatrix, 3> s{stokes_operator(1, N).matrix(), stokes_operator(2, N).matrix(),
                                 stokes_operator(3, N).matrix()};
  std::vector<cplx> data(pow3(r));
  // Depth-first over words; prefix[p] = rho S_{j1} ... S_{jp}.
  std::vector<CMatrix> prefix(r + 1);
  prefix[0] = state.density();
  StokesWord w(r, 1);
  std::size_t flat = 0;
  auto visit = [&](auto&& self, int depth) -> void {
    if (depth == r) {
      data[flat++] = prefix[r].trace();
      return;
    }
    for (int j = 1; j <= 3; ++j) {
      prefix[depth + 1] = prefix[depth] * s[j - 1];
      self(self, depth + 1);
    }
  };
  visit(visit, 0);
  return PolarizationTensor(r, N, std::move(data));
}

MomentComponents moment_components(const PolarizationTensor& t) {
  const int r = t.order();
  std::vector<cplx> acc(MomentComponents::count(r), cplx(0.0));
  double scale = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto [k, l] = class_of(PolarizationTensor::word_of(r, i));
    acc[MomentComponents::index(r, k, l)] += t.at_flat(i);
    scale = std::max(scale, std::abs(t.at_flat(i)));
  }
  std::vector<double> values(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (std::abs(acc[i].imag()) > 1e-10 * scale) {
      throw std::domain_error("moment component has imaginary residue " +
                              std::to_string(acc[i].imag()) + "; tensor is inconsistent");
    }
    values[i] = acc[i].real();
  }
  return MomentComponents(r, t.photons(), std::move(values));
}

double profile_eval(const MomentComponents& m, const Direction& n) {
  const int r = m.order();
  double out = 0.0;
  for (int k = 0; k <= r; ++k) {
    for (int l = 0; l <= r - k; ++l) {
      out += detail::ipow(n[0], k) * detail::ipow(n[1], l) * detail::ipow(n[2], r - k - l) * m(k, l);
    }
  }
  return out;
}

double direct_profile(const ManifoldState& state, int r, const Direction& n) {
  return state.expectation(stokes_in_direction(n, state.photons()).power(r)).real();
}

cplx multi_direction_expectation(const PolarizationTensor& t, std::span<const Direction> dirs) {
  const int r = t.order();
  if (static_cast<int>(dirs.size()) != r) throw std::invalid_argument("need one direction per slot");
  cplx out = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const StokesWord w = PolarizationTensor::word_of(r, i);
    double weight = 1.0;
    for (int p = 0; p < r; ++p) weight *= dirs[p][w[p] - 1];
    out += weight * t.at_flat(i);
  }
  return out;
}

PolarizationTensor tensor_descend(const PolarizationTensor& t) {
  const int r = t.order();
  if (r < 2) throw std::invalid_argument("tensor descent needs order >= 2");
  const cplx two_i(0.0, 2.0);
  double scale = 1.0;
  for (const auto& x : t.elements()) scale = std::max(scale, std::abs(x));
  PolarizationTensor out = PolarizationTensor::zeros(r - 1, t.photons());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const StokesWord w = PolarizationTensor::word_of(r - 1, i);
    std::optional<cplx> first;
    for (int p = 0; p < r - 1; ++p) {
      const int mu = w[p] % 3 + 1;
      const int nu = mu % 3 + 1;
      StokesWord a(w.begin(), w.begin() + p);
      a.push_back(mu);
      a.push_back(nu);
      a.insert(a.end(), w.begin() + p + 1, w.end());
      StokesWord b = a;
      std::swap(b[p], b[p + 1]);
      const cplx v = (t.at(a) - t.at(b)) / two_i;
      if (!first) {
        first = v;
      } else if (std::abs(v - *first) > 1e-9 * scale) {
        throw std::domain_error("tensor descent is slot dependent; tensor violates the commutator relation");
      }
    }
    out.at_flat(i) = *first;
  }
  return out;
}

ManifoldOperator ordered_product(int k, int l, int r, int N) {
  if (k < 0 || l < 0 || k + l > r) throw std::invalid_argument("need k + l <= r");
  return stokes_operator(1, N).power(k) * stokes_operator(2, N).power(l) *
         stokes_operator(3, N).power(r - k - l);
}

ManifoldOperator symmetrized_product(int k, int l, int r, int N) {
  if (k < 0 || l < 0 || k + l > r) throw std::invalid_argument("need k + l <= r");
  const std::array<CMatrix, 3> s{stokes_operator(1, N).matrix(), stokes_operator(2, N).matrix(),
                                 stokes_operator(3, N).matrix()};
  StokesWord w;
  w.insert(w.end(), k, 1);
  w.insert(w.end(), l, 2);
  w.insert(w.end(), r - k - l, 3);
  CMatrix sum = CMatrix::Zero(N + 1, N + 1);
  do {
    CMatrix p = CMatrix::Identity(N + 1, N + 1);
    for (int j : w) p = p * s[j - 1];
    sum += p;
  } while (std::next_permutation(w.begin(), w.end()));
  return ManifoldOperator(N, std::move(sum));
}

namespace {

Eigen::Vector3d stokes_vector(const ManifoldState& state) {
  Eigen::Vector3d v;
  for (int j = 1; j <= 3; ++j) v[j - 1] = state.expectation(stokes_operator(j, state.photons())).real();
  return v;
}

}  // namespace

double degree_of_polarization(const BlockDiagonalState& state) {
  const double s0 = state.mean_photons();
  if (!(s0 > 0.0)) throw std::domain_error("degree of polarization is undefined for the vacuum");
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  for (const auto& b : state.blocks()) v += b.probability * stokes_vector(b.state);
  return v.norm() / s0;
}

double degree_of_polarization(const ManifoldState& state) {
  if (state.photons() == 0) throw std::domain_error("degree of polarization is undefined for the vacuum");
  return stokes_vector(state).norm() / state.photons();
}

std::optional<double> manifold_degree_of_polarization(const BlockDiagonalState& state, int N) {
  const ManifoldState* s = state.find(N);
  if (s == nullptr || N == 0) return std::nullopt;
  return degree_of_polarization(*s);
}

Eigen::Matrix3d covariance_matrix(const ManifoldState& state) {
  const PolarizationTensor t2 = tensor(state, 2);
  const Eigen::Vector3d t1 = stokes_vector(state);
  Eigen::Matrix3d g;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) g(j, k) = t2({j + 1, k + 1}).real() - t1[j] * t1[k];
  }
  return g;
}

Eigen::Matrix3d covariance_matrix(const BlockDiagonalState& state) {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (const auto& b : state.blocks()) g += b.probability * covariance_matrix(b.state);
  return g;
}

std::optional<Eigen::Matrix3d> covariance_matrix(const BlockDiagonalState& state, int N) {
  const ManifoldState* s = state.find(N);
  if (s == nullptr) return std::nullopt;
  return covariance_matrix(*s);
}

std::int64_t ParameterCounts::block_diagonal(std::span<const int> manifolds) {
  std::set<int> seen;
  std::int64_t total = -1;
  for (int N : manifolds) {
    if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
    if (!seen.insert(N).second) throw std::invalid_argument("manifolds must be distinct");
    total += static_cast<std::int64_t>(N + 1) * (N + 1);
  }
  return total;
}

std::int64_t ParameterCounts::block_diagonal_cutoff(int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be non-negative");
  const std::int64_t n = cutoff;
  return n * (2 * n * n + 9 * n + 13) / 6;
}

std::int64_t ParameterCounts::full_state(int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be non-negative");
  const std::int64_t n = cutoff;
  return n * (n + 3) * (n * n + 3 * n + 4) / 4;
}

std::int64_t ParameterCounts::averaged_components(int R) {
  if (R < 0) throw std::invalid_argument("order must be non-negative");
  const std::int64_t r = R;
  return r * (r * r + 6 * r + 11) / 6;
}

PolarizationTensor assemble_tensor_order2(const MomentComponents& m2, const PolarizationTensor& t1) {
  if (m2.order() != 2 || t1.order() != 1) throw std::invalid_argument("need M^(2) and T^(1)");
  const cplx i(0.0, 1.0);
  const cplx s1 = t1({1}), s2 = t1({2}), s3 = t1({3});
  std::vector<cplx> d{
      m2(2, 0),                m2(1, 1) / 2 + i * s3, m2(1, 0) / 2 - i * s2,  //
      m2(1, 1) / 2 - i * s3,   m2(0, 2),              m2(0, 1) / 2 + i * s1,  //
      m2(1, 0) / 2 + i * s2,   m2(0, 1) / 2 - i * s1, m2(0, 0)};
  return PolarizationTensor(2, m2.photons(), std::move(d));
}

PolarizationTensor assemble_tensor_order3(const MomentComponents& m3, const PolarizationTensor& t2) {
  if (m3.order() != 3 || t2.order() != 2) throw std::invalid_argument("need M^(3) and T^(2)");
  const cplx i(0.0, 1.0);
  auto t = [&](int a, int b) { return t2({a, b}); };
  auto M = [&](int k, int l) { return cplx(m3(k, l)); };
  const cplx t11 = t(1, 1), t22 = t(2, 2), t33 = t(3, 3);
  std::vector<cplx> d{
      // 1..
      M(3, 0), (M(2, 1) + 4.0 * i * t(1, 3) + 2.0 * i * t(3, 1)) / 3.0,
      (M(2, 0) - 4.0 * i * t(1, 2) - 2.0 * i * t(2, 1)) / 3.0,
      (M(2, 1) - 2.0 * i * t(1, 3) + 2.0 * i * t(3, 1)) / 3.0,
      (M(1, 2) + 2.0 * i * t(2, 3) + 4.0 * i * t(3, 2)) / 3.0,
      M(1, 1) / 6.0 + i * t11 - i * t22 + i * t33,
      (M(2, 0) + 2.0 * i * t(1, 2) - 2.0 * i * t(2, 1)) / 3.0,
      M(1, 1) / 6.0 - i * t11 - i * t22 + i * t33,
      (M(1, 0) - 2.0 * i * t(3, 2) - 4.0 * i * t(2, 3)) / 3.0,
      // 2..
      (M(2, 1) - 2.0 * i * t(1, 3) - 4.0 * i * t(3, 1)) / 3.0,
      (M(1, 2) + 2.0 * i * t(2, 3) - 2.0 * i * t(3, 2)) / 3.0,
      M(1, 1) / 6.0 + i * t11 - i * t22 - i * t33,
      (M(1, 2) - 4.0 * i * t(2, 3) - 2.0 * i * t(3, 2)) / 3.0, M(0, 3),
      (M(0, 2) + 4.0 * i * t(2, 1) + 2.0 * i * t(1, 2)) / 3.0,
      M(1, 1) / 6.0 + i * t11 + i * t22 - i * t33,
      (M(0, 2) - 2.0 * i * t(2, 1) + 2.0 * i * t(1, 2)) / 3.0,
      (M(0, 1) + 2.0 * i * t(3, 1) + 4.0 * i * t(1, 3)) / 3.0,
      // 3..
      (M(2, 0) + 2.0 * i * t(1, 2) + 4.0 * i * t(2, 1)) / 3.0,
      M(1, 1) / 6.0 - i * t11 + i * t22 + i * t33,
      (M(1, 0) - 2.0 * i * t(3, 2) + 2.0 * i * t(2, 3)) / 3.0,
      M(1, 1) / 6.0 - i * t11 + i * t22 - i * t33,
      (M(0, 2) - 2.0 * i * t(2, 1) - 4.0 * i * t(1, 2)) / 3.0,
      (M(0, 1) + 2.0 * i * t(3, 1) - 2.0 * i * t(1, 3)) / 3.0,
      (M(1, 0) + 4.0 * i * t(3, 2) + 2.0 * i * t(2, 3)) / 3.0,
      (M(0, 1) - 4.0 * i * t(3, 1) - 2.0 * i * t(1, 3)) / 3.0, M(0, 0)};
  return PolarizationTensor(3, m3.photons(), std::move(d));
}

PolarizationTensor assemble_tensor(const MomentComponents& m, const PolarizationTensor& lower) {
  const int r = m.order();
  check_order(r);
  if (lower.order() != r - 1) throw std::invalid_argument("lower tensor must have order r-1");
  const cplx two_i(0.0, 2.0);
  PolarizationTensor out = PolarizationTensor::zeros(r, m.photons());
  for (int k = 0; k <= r; ++k) {
    for (int l = 0; l <= r - k; ++l) {
      StokesWord ref;
      ref.insert(ref.end(), k, 1);
      ref.insert(ref.end(), l, 2);
      ref.insert(ref.end(), r - k - l, 3);
      // Offsets T_w - T_ref reached by adjacent swaps from the sorted word,
      // each swap contributing -2i eps_{abc} T^(r-1) with ab replaced by c.
      std::map<StokesWord, cplx> offset{{ref, cplx(0.0)}};
      std::deque<StokesWord> queue{ref};
      while (!queue.empty()) {
        const StokesWord u = queue.front();
        queue.pop_front();
        for (int p = 0; p + 1 < r; ++p) {
          const int a = u[p], b = u[p + 1];
          if (a == b) continue;
          StokesWord v = u;
          std::swap(v[p], v[p + 1]);
          if (offset.contains(v)) continue;
          const int c = 6 - a - b;
          StokesWord reduced(u.begin(), u.begin() + p);
          reduced.push_back(c);
          reduced.insert(reduced.end(), u.begin() + p + 2, u.end());
          offset[v] = offset[u] - two_i * static_cast<double>(epsilon(a, b, c)) * lower.at(reduced);
          queue.push_back(std::move(v));
        }
      }
      cplx total(0.0);
      for (const auto& [w, d] : offset) total += d;
      const cplx t_ref = (m(k, l) - total) / static_cast<double>(offset.size());
      for (const auto& [w, d] : offset) out.at(w) = t_ref + d;
    }
  }
  return out;
}

PolarizationTensor averaged_tensor(const BlockDiagonalState& state, int r) {
  PolarizationTensor t = averaged(state, [r](const ManifoldState& s) { return tensor(s, r); });
  return PolarizationTensor(r, std::nullopt, t.elements());
}

MomentComponents averaged_components(const BlockDiagonalState& state, int r) {
  MomentComponents m =
      averaged(state, [r](const ManifoldState& s) { return moment_components(tensor(s, r)); });
  return MomentComponents(r, std::nullopt, m.values());
}

double averaged_profile(const BlockDiagonalState& state, int r, const Direction& n) {
  return averaged(state, [&](const ManifoldState& s) { return direct_profile(s, r, n); });
}

}  // namespace stokes
