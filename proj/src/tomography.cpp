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

#include "stokes/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "combinatorics.hpp"
#include "stokes/factorials.hpp"

namespace stokes {

using detail::ipow;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double moment_of(const std::vector<double>& probs, int N, int r) {
  double m = 0.0;
  for (int k = 0; k <= N; ++k) m += probs[k] * ipow(N - 2.0 * k, r);
  return m;
}

}  // namespace

std::uint64_t MeasurementRecord::total() const {
  std::uint64_t t = 0;
  for (const auto& [key, c] : counts) t += c;
  return t;
}

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<double> outcome_distribution(const ManifoldState& state, const Direction& n) {
  const int N = state.photons();
  const MeasurementSetting setting{n};
  const CMatrix u = su2_unitary(setting.angles(), N).matrix();
  const CMatrix rotated = u.adjoint() * state.density() * u;
  std::vector<double> p(N + 1);
  double total = 0.0;
  for (int k = 0; k <= N; ++k) {
    p[k] = std::max(0.0, rotated(k, k).real());
    total += p[k];
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<Outcome> outcome_distribution(const BlockDiagonalState& state, const Direction& n) {
  std::vector<Outcome> out;
  for (const auto& b : state.blocks()) {
    const auto p = outcome_distribution(b.state, n);
    for (int k = 0; k <= b.N; ++k) out.push_back(Outcome{b.N, b.N - 2 * k, b.probability * p[k]});
  }
  return out;
}

MeasurementRecord simulate_measurement(const BlockDiagonalState& state,
                                       const MeasurementSetting& setting) {
  if (setting.shots < 1) throw std::invalid_argument("a measurement setting needs at least one shot");
  const auto outcomes = outcome_distribution(state, setting.direction);
  std::vector<double> cdf(outcomes.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    acc += outcomes[i].probability;
    cdf[i] = acc;
  }
  for (double& c : cdf) c /= acc;
  std::vector<std::uint64_t> hits(outcomes.size(), 0);
  for (std::uint64_t shot = 0; shot < setting.shots; ++shot) {
    const double u = counter_uniform(setting.seed, shot);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    // Skip zero-probability outcomes sharing the same cumulative value.
    while (outcomes[idx].probability <= 0.0 && idx + 1 < cdf.size()) ++idx;
    ++hits[idx];
  }
  MeasurementRecord rec{setting, {}};
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (hits[i] > 0) rec.counts[{outcomes[i].N, outcomes[i].s}] = hits[i];
  }
  return rec;
}

std::optional<MomentEstimate> EmpiricalMoments::moment(int N, int r) const {
  auto it = manifolds.find(N);
  if (it == manifolds.end()) return std::nullopt;
  auto jt = it->second.moments.find(r);
  if (jt == it->second.moments.end()) return std::nullopt;
  return jt->second;
}

std::optional<double> EmpiricalMoments::probability(int N) const {
  auto it = manifolds.find(N);
  if (it == manifolds.end()) return std::nullopt;
  return it->second.probability;
}

EmpiricalMoments estimate_moments(const MeasurementRecord& record, std::span<const int> orders) {
  const std::uint64_t shots = record.total();
  if (shots == 0) throw std::invalid_argument("measurement record is empty");
  std::map<int, std::vector<std::pair<int, std::uint64_t>>> by_manifold;
  for (const auto& [key, c] : record.counts) {
    const auto [N, s] = key;
    if (std::abs(s) > N || (N - s) % 2 != 0) throw std::invalid_argument("invalid outcome in record");
    by_manifold[N].push_back({s, c});
  }
  EmpiricalMoments out;
  out.shots = shots;
  for (const auto& [N, entries] : by_manifold) {
    ManifoldMoments mm;
    for (const auto& [s, c] : entries) mm.count += c;
    mm.probability = static_cast<double>(mm.count) / static_cast<double>(shots);
    const double n = static_cast<double>(mm.count);
    for (int r : orders) {
      if (r < 0) throw std::invalid_argument("moment order must be non-negative");
      double m1 = 0.0, m2 = 0.0;
      for (const auto& [s, c] : entries) {
        const double v = ipow(s, r);
        m1 += v * c;
        m2 += v * v * c;
      }
      m1 /= n;
      m2 /= n;
      const double var = std::max(0.0, m2 - m1 * m1);
      mm.moments[r] = MomentEstimate{m1, mm.count > 1 ? std::sqrt(var / (n - 1.0)) : 0.0};
    }
    out.manifolds[N] = std::move(mm);
  }
  return out;
}

EmpiricalMoments exact_moments(const BlockDiagonalState& state, const Direction& n,
                               std::span<const int> orders) {
  EmpiricalMoments out;
  for (const auto& b : state.blocks()) {
    const auto p = outcome_distribution(b.state, n);
    ManifoldMoments mm;
    mm.probability = b.probability;
    for (int r : orders) mm.moments[r] = MomentEstimate{moment_of(p, b.N, r), 0.0};
    out.manifolds[b.N] = std::move(mm);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harmonic machinery. Homogeneous degree-d polynomials are coefficient
// vectors over monomials n1^k n2^l n3^(d-k-l) in MomentComponents order.

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<std::pair<int, int>> monomials(int d) {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k <= d; ++k) {
    for (int l = 0; l <= d - k; ++l) out.push_back({k, l});
  }
  return out;
}

double sphere_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) * std::tgamma((c + 1) / 2.0) /
         std::tgamma((a + b + c + 3) / 2.0);
}

// Multiplication by n1^2 + n2^2 + n3^2, degree d-2 -> d.
MatrixXd radial_embedding(int d) {
  const int rows = MomentComponents::count(d);
  const int cols = MomentComponents::count(d - 2);
  MatrixXd e = MatrixXd::Zero(rows, cols);
  int j = 0;
  for (const auto& [k, l] : monomials(d - 2)) {
    e(MomentComponents::index(d, k + 2, l), j) += 1.0;
    e(MomentComponents::index(d, k, l + 2), j) += 1.0;
    e(MomentComponents::index(d, k, l), j) += 1.0;
    ++j;
  }
  return e;
}

// Degree-d harmonics, orthonormal in L2 over the unit sphere (columns).
MatrixXd compute_harmonic_basis(int d) {
  const int m = MomentComponents::count(d);
  MatrixXd h;
  if (d < 2) {
    h = MatrixXd::Identity(m, m);
  } else {
    MatrixXd lap = MatrixXd::Zero(MomentComponents::count(d - 2), m);
    int j = 0;
    for (const auto& [k, l] : monomials(d)) {
      const int e[3] = {k, l, d - k - l};
      for (int axis = 0; axis < 3; ++axis) {
        if (e[axis] < 2) continue;
        int f[3] = {e[0], e[1], e[2]};
        f[axis] -= 2;
        lap(MomentComponents::index(d - 2, f[0], f[1]), j) += e[axis] * (e[axis] - 1.0);
      }
      ++j;
    }
    Eigen::JacobiSVD<MatrixXd> svd(lap, Eigen::ComputeFullV);
    h = svd.matrixV().rightCols(2 * d + 1);
  }
  const auto mons = monomials(d);
  MatrixXd gram(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const int ka = mons[a].first, la = mons[a].second;
      const int kb = mons[b].first, lb = mons[b].second;
      gram(a, b) = sphere_integral(ka + kb, la + lb, 2 * d - ka - la - kb - lb);
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.transpose() * gram * h);
  const VectorXd inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return h * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

const MatrixXd& harmonic_basis(int d) {
  static std::mutex mu;
  static std::map<int, MatrixXd> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, compute_harmonic_basis(d)).first;
  return it->second;
}

VectorXd monomial_row(const Direction& n, int d) {
  VectorXd row(MomentComponents::count(d));
  int j = 0;
  for (const auto& [k, l] : monomials(d)) row[j++] = ipow(n[0], k) * ipow(n[1], l) * ipow(n[2], d - k - l);
  return row;
}

MatrixXd design_matrix(std::span<const Direction> dirs, int r) {
  const MatrixXd& b = harmonic_basis(r);
  MatrixXd e(dirs.size(), MomentComponents::count(r));
  for (std::size_t i = 0; i < dirs.size(); ++i) e.row(i) = monomial_row(dirs[i], r).transpose();
  return e * b;
}

// p = sum_L |x|^(d-L) h_L with h_L harmonic of degree L; returns {L, h_L}.
std::vector<std::pair<int, VectorXd>> harmonic_pieces(VectorXd p, int d) {
  std::vector<std::pair<int, VectorXd>> out;
  while (d >= 2) {
    const MatrixXd& h = harmonic_basis(d);
    const MatrixXd e = radial_embedding(d);
    MatrixXd a(h.rows(), h.cols() + e.cols());
    a << h, e;
    const VectorXd sol = a.fullPivLu().solve(p);
    out.push_back({d, h * sol.head(h.cols())});
    p = sol.tail(e.cols());
    d -= 2;
  }
  out.push_back({d, p});
  return out;
}

VectorXd lift(const VectorXd& p, int from, int to) {
  VectorXd out = p;
  for (int d = from + 2; d <= to; d += 2) out = radial_embedding(d) * out;
  return out;
}

// Coefficient of s^r along the degree-L discrete orthogonal polynomial over
// the spectrum {N - 2k}; zero when L exceeds N.
Rational gram_coefficient(int N, int r, int L) {
  if (L > N) return 0;
  std::vector<Rational> pts;
  for (int k = 0; k <= N; ++k) pts.emplace_back(N - 2 * k);
  auto dot = [](const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  auto powers = [&](int e) {
    std::vector<Rational> v;
    for (const auto& x : pts) {
      Rational y = 1;
      for (int i = 0; i < e; ++i) y *= x;
      v.push_back(y);
    }
    return v;
  };
  std::vector<std::vector<Rational>> basis;
  for (int d = 0; d <= L; ++d) {
    auto v = powers(d);
    for (const auto& q : basis) {
      const Rational c = dot(v, q) / dot(q, q);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
    basis.push_back(std::move(v));
  }
  const auto& t = basis.back();
  return dot(powers(r), t) / dot(t, t);
}

constexpr double kRankTolerance = 1e-10;

int numerical_rank(const VectorXd& sv) {
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > kRankTolerance * sv[0]) ++rank;
  }
  return rank;
}

double condition_of(const VectorXd& sv, int unknowns) {
  if (sv.size() < unknowns || sv[unknowns - 1] <= 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / sv[unknowns - 1];
}

DirectionSet make_set(DirectionSetKind kind, int r, std::vector<Direction> dirs) {
  DirectionSet set{kind, r, std::move(dirs)};
  const VectorXd sv = design_singular_values(set.directions, r);
  set.rank = numerical_rank(sv);
  set.condition_number = condition_of(sv, 2 * r + 1);
  return set;
}

Eigen::Vector3d random_normal3(std::uint64_t seed, std::uint64_t& counter) {
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    const double u1 = std::max(counter_uniform(seed, counter++), 1e-300);
    const double u2 = counter_uniform(seed, counter++);
    v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return v;
}

// Random-perturbation descent on the design condition number, moving only
// the directions at indices >= first_free.
std::vector<Direction> condition_descent(std::vector<Direction> dirs, int r, std::size_t first_free,
                                         std::uint64_t seed, int iterations) {
  double best = design_condition_number(dirs, r);
  double step = 0.3;
  std::uint64_t counter = 0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<Direction> cand = dirs;
    for (std::size_t i = first_free; i < cand.size(); ++i) {
      cand[i] = Direction::normalized(cand[i].vector() + step * random_normal3(seed, counter));
    }
    const double c = design_condition_number(cand, r);
    if (c < best) {
      best = c;
      dirs = std::move(cand);
    }
    if (it % 500 == 499) step *= 0.5;
  }
  return dirs;
}

std::vector<Direction> symmetric_seven() {
  const double s = 1.0 / std::sqrt(3.0);
  return {Direction::axis(1),     Direction::axis(2),      Direction::axis(3),
          Direction(s, s, s),     Direction(-s, s, s),     Direction(s, -s, s),
          Direction(-s, -s, s)};
}

DirectionSet third_order_fallback() {
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<Direction> dirs{Direction(s, s, s), Direction(-s, s, s), Direction(s, -s, s),
                              Direction(-s, -s, s)};
  const Eigen::Vector3d diag(s, s, s);
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector3d e = Eigen::Vector3d::Unit(j);
    const Eigen::Vector3d p = (diag - diag[j] * e).normalized();
    dirs.push_back(Direction::normalized(std::cos(M_PI / 6) * e + std::sin(M_PI / 6) * p));
  }
  dirs = condition_descent(std::move(dirs), 3, 4, 0x7F4A7C15ULL, 3000);
  return make_set(DirectionSetKind::ConditionedFallback, 3, std::move(dirs));
}

DirectionSet generic_set(int r) {
  const std::uint64_t seed = 0xC0FFEE00ULL + static_cast<std::uint64_t>(r);
  std::uint64_t counter = 0;
  std::vector<Direction> best;
  double best_cond = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Direction> cand;
    for (int i = 0; i < 2 * r + 1; ++i) cand.push_back(Direction::normalized(random_normal3(seed, counter)));
    const double c = design_condition_number(cand, r);
    if (c < best_cond) {
      best_cond = c;
      best = std::move(cand);
    }
  }
  best = condition_descent(std::move(best), r, 0, seed ^ 0x5EEDULL, 2000);
  return make_set(DirectionSetKind::Generic, r, std::move(best));
}

}  // namespace

std::string DirectionSet::tag() const {
  switch (kind) {
    case DirectionSetKind::Axes:
      return "axes";
    case DirectionSetKind::Icosahedral:
      return "icosahedral";
    case DirectionSetKind::SymmetricSevenLine:
      return rank_deficient() ? "symmetric-7 (RANK-DEFICIENT)" : "symmetric-7";
    case DirectionSetKind::ConditionedFallback:
      return "conditioned-fallback";
    case DirectionSetKind::Generic:
      return "generic (extension: conditioning search)";
  }
  return "unknown";
}

Eigen::VectorXd design_singular_values(std::span<const Direction> dirs, int r) {
  if (r < 0) throw std::invalid_argument("order must be non-negative");
  if (dirs.empty()) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(design_matrix(dirs, r)).singularValues();
}

double design_condition_number(std::span<const Direction> dirs, int r) {
  return condition_of(design_singular_values(dirs, r), 2 * r + 1);
}

std::array<Direction, 5> icosahedral_directions() {
  const double s5 = std::sqrt(5.0);
  const double g = 1.0 + s5;
  const double den = std::sqrt(10.0 + 2.0 * s5);
  return {Direction(0.0, 2.0 / den, g / den), Direction(0.0, -2.0 / den, g / den),
          Direction(2.0 / den, g / den, 0.0), Direction(-2.0 / den, g / den, 0.0),
          Direction(g / den, 0.0, 2.0 / den)};
}

DirectionChoice choose_directions(int r) {
  if (r < 1) throw std::invalid_argument("measurement order must be at least 1");
  static std::mutex mu;
  static std::map<int, DirectionChoice> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(r); it != cache.end()) return it->second;
  }
  DirectionChoice choice{make_set(DirectionSetKind::Generic, r, {Direction::axis(3)}), std::nullopt};
  if (r == 1) {
    choice.primary = make_set(DirectionSetKind::Axes, 1,
                              {Direction::axis(1), Direction::axis(2), Direction::axis(3)});
  } else if (r == 2) {
    const auto ico = icosahedral_directions();
    choice.primary = make_set(DirectionSetKind::Icosahedral, 2, {ico.begin(), ico.end()});
  } else if (r == 3) {
    choice.primary = make_set(DirectionSetKind::SymmetricSevenLine, 3, symmetric_seven());
    choice.fallback = third_order_fallback();
  } else {
    choice.primary = generic_set(r);
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(r, std::move(choice)).first->second;
}

MomentComponents closed_form_second_order_casimir(const std::array<double, 5>& m, double casimir) {
  const double s5 = std::sqrt(5.0);
  const double a12 = m[0] + m[1];
  const double a34 = m[2] + m[3];
  const double den = 4.0 * (7.0 + 3.0 * s5);
  MomentComponents out(2, std::nullopt);
  out(0, 1) = s5 / 2 * (m[0] - m[1]);
  out(1, 1) = s5 / 2 * (m[2] - m[3]);
  out(1, 0) = s5 / 2 * (m[0] + m[1] + m[2] + m[3] + 2 * m[4]) - s5 * casimir;
  out(0, 0) = ((15 + 7 * s5) * a12 - (10 + 4 * s5) * a34 + (6 + 2 * s5) * casimir) / den;
  out(0, 2) = ((10 + 4 * s5) * a12 + (25 + 11 * s5) * a34 - (14 + 6 * s5) * casimir) / den;
  out(2, 0) = ((36 + 16 * s5) * casimir - (25 + 11 * s5) * a12 - (15 + 7 * s5) * a34) / den;
  return out;
}

MomentComponents closed_form_second_order(const std::array<double, 5>& measured, int N) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  MomentComponents m = closed_form_second_order_casimir(measured, double(N) * (N + 2));
  return MomentComponents(2, N, m.values());
}

namespace {

std::string describe_rank_failure(int order, int rank) {
  std::ostringstream os;
  os << "order-" << order << " design has rank " << rank << " of " << 2 * order + 1
     << "; the directions leave a " << 2 * order + 1 - rank
     << "-dimensional subspace of degree-" << order << " harmonics unresolved";
  return os.str();
}

}  // namespace

RankDeficientDesign::RankDeficientDesign(int order, int rank, std::vector<std::vector<double>> null_space)
    : std::runtime_error(describe_rank_failure(order, rank)),
      order_(order),
      rank_(rank),
      null_(std::move(null_space)) {}

ComponentSolution solve_moment_components(std::span<const Direction> dirs,
                                          std::span<const double> measured, int N, int r,
                                          const std::optional<MomentComponents>& lower) {
  if (r < 1) throw std::invalid_argument("order must be at least 1");
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (dirs.size() != measured.size()) throw std::invalid_argument("one measured value per direction");
  const int unknowns = 2 * r + 1;
  const int m = MomentComponents::count(r);

  VectorXd known = VectorXd::Zero(m);
  if (r >= 2) {
    MomentComponents base = (r == 2 && !lower) ? MomentComponents(0, N, {1.0})
                                               : lower.value_or(MomentComponents(0, N, {1.0}));
    if (base.order() != r - 2) throw std::invalid_argument("lower components must have order r-2");
    const VectorXd p = Eigen::Map<const VectorXd>(base.values().data(), base.values().size());
    for (const auto& [L, h] : harmonic_pieces(p, r - 2)) {
      const Rational below = gram_coefficient(N, r - 2, L);
      const Rational above = gram_coefficient(N, r, L);
      if (below == 0) {
        if (above != 0) throw std::logic_error("degenerate harmonic ratio");
        continue;
      }
      known += Rational(above / below).convert_to<double>() * lift(h, L, r);
    }
  }

  const MatrixXd& basis = harmonic_basis(r);
  const MatrixXd d = design_matrix(dirs, r);
  VectorXd rhs(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    rhs[i] = measured[i] - monomial_row(dirs[i], r).dot(known);
  }
  Eigen::JacobiSVD<MatrixXd> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  const int rank = numerical_rank(sv);
  if (rank < unknowns) {
    std::vector<std::vector<double>> null;
    const MatrixXd& v = svd.matrixV();
    for (int c = rank; c < unknowns; ++c) {
      const VectorXd mono = basis * v.col(c);
      null.emplace_back(mono.data(), mono.data() + mono.size());
    }
    throw RankDeficientDesign(r, rank, std::move(null));
  }
  const VectorXd coef = svd.solve(rhs);
  const VectorXd comps = known + basis * coef;
  ComponentSolution out{MomentComponents(r, N, std::vector<double>(comps.data(), comps.data() + m))};
  out.residual = (d * coef - rhs).norm();
  out.condition_number = sv[0] / sv[unknowns - 1];
  return out;
}

std::vector<PolarizationTensor> assemble_all_tensors(std::span<const MomentComponents> comps, int N) {
  std::vector<PolarizationTensor> out;
  PolarizationTensor lower(0, N, {cplx(1.0)});
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const MomentComponents& m = comps[i];
    const int r = static_cast<int>(i) + 1;
    if (m.order() != r) throw std::invalid_argument("components must be supplied for orders 1, 2, ...");
    PolarizationTensor t = (r == 2)   ? assemble_tensor_order2(m, lower)
                           : (r == 3) ? assemble_tensor_order3(m, lower)
                                      : assemble_tensor(m, lower);
    double scale = 1.0;
    for (const auto& x : t.elements()) scale = std::max(scale, std::abs(x));
    if (t.hermiticity_defect() > 1e-8 * scale) {
      throw std::domain_error("assembled order-" + std::to_string(r) + " tensor is not Hermitian");
    }
    out.push_back(t);
    lower = std::move(t);
  }
  return out;
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<CMatrix> es((diff + diff.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

CMatrix project_to_density(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 0.0)) throw std::domain_error("matrix has no positive spectrum to project");
  ev /= total;
  CMatrix out = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return (out + out.adjoint()) / 2.0;
}

DensityReconstruction reconstruct_density(std::span<const PolarizationTensor> tensors, int N) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (static_cast<int>(tensors.size()) < N) throw std::invalid_argument("need tensors of orders 1..N");
  const int d = N + 1;
  if (N == 0) {
    CMatrix one = CMatrix::Identity(1, 1);
    return DensityReconstruction{ManifoldState::mixed(0, one), one, 0.0, 1.0, 0.0};
  }
  std::vector<Eigen::RowVectorXcd> rows;
  std::vector<cplx> values;
  auto add = [&](const CMatrix& op, cplx value) {
    // Tr(rho O) = sum_ab rho_ab O_ba with rho flattened column-major.
    Eigen::RowVectorXcd row(d * d);
    for (int b = 0; b < d; ++b) {
      for (int a = 0; a < d; ++a) row[b * d + a] = op(b, a);
    }
    rows.push_back(std::move(row));
    values.push_back(value);
  };
  add(CMatrix::Identity(d, d), 1.0);
  for (int r = 1; r <= N; ++r) {
    const PolarizationTensor& t = tensors[r - 1];
    if (t.order() != r) throw std::invalid_argument("tensors must be ordered by rank");
    for (int k = 0; k <= r; ++k) {
      for (int l = 0; l <= r - k; ++l) {
        StokesWord w;
        w.insert(w.end(), k, 1);
        w.insert(w.end(), l, 2);
        w.insert(w.end(), r - k - l, 3);
        add(ordered_product(k, l, r, N).matrix(), t.at(w));
      }
    }
  }
  Eigen::MatrixXcd a(rows.size(), d * d);
  Eigen::VectorXcd y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.row(i) = rows[i];
    y[i] = values[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  if (numerical_rank(sv) < d * d) throw std::logic_error("ordered products fail to span the manifold");
  const Eigen::VectorXcd x = svd.solve(y);
  CMatrix rho = Eigen::Map<const CMatrix>(x.data(), d, d);
  const double residual = (a * x - y).norm();
  rho = (rho + rho.adjoint()) / 2.0;
  rho /= rho.trace().real();
  const CMatrix projected = project_to_density(rho);
  DensityReconstruction out{ManifoldState::mixed(N, projected), rho, trace_distance(rho, projected),
                            sv[0] / sv[d * d - 1], residual};
  return out;
}

BlockDiagonalState ReconstructionResult::state() const {
  std::vector<Block> blocks;
  double total = 0.0;
  for (const auto& m : manifolds) {
    if (m.probability > 0.0) total += m.probability;
  }
  for (const auto& m : manifolds) {
    if (m.probability > 0.0) blocks.push_back(Block{m.N, m.probability / total, m.density->state});
  }
  return BlockDiagonalState(std::move(blocks));
}

ReconstructionResult run_tomography(const BlockDiagonalState& truth, const TomographyOptions& opts) {
  const int R = truth.max_photons();
  if (R > kMaxTensorOrder) {
    throw std::invalid_argument("tomography supports manifolds up to N=" + std::to_string(kMaxTensorOrder));
  }
  ReconstructionResult result;
  // measured[r][i]: moments for direction i of the order-r set.
  std::vector<std::vector<EmpiricalMoments>> measured(R + 1);
  std::map<int, std::uint64_t> pooled;
  std::uint64_t pooled_total = 0;
  for (int r = 1; r <= R; ++r) {
    const DirectionChoice choice = choose_directions(r);
    const DirectionSet& set =
        (r == 3 && opts.symmetric_third_order) ? choice.primary : choice.working();
    result.direction_sets.push_back(set);
    const std::vector<int> orders{r};
    for (std::size_t i = 0; i < set.directions.size(); ++i) {
      if (opts.shots) {
        const MeasurementSetting setting{set.directions[i], *opts.shots,
                                         splitmix64(opts.seed ^ (std::uint64_t(r) << 32 | i))};
        const MeasurementRecord rec = simulate_measurement(truth, setting);
        for (const auto& [key, c] : rec.counts) pooled[key.first] += c;
        pooled_total += rec.total();
        measured[r].push_back(estimate_moments(rec, orders));
      } else {
        measured[r].push_back(exact_moments(truth, set.directions[i], orders));
      }
    }
  }

  std::set<int> candidates;
  for (const auto& b : truth.blocks()) candidates.insert(b.N);
  for (int N : candidates) {
    ManifoldReconstruction mr;
    mr.N = N;
    if (opts.shots) {
      if (pooled_total == 0 || pooled[N] == 0) continue;
      mr.probability = static_cast<double>(pooled[N]) / static_cast<double>(pooled_total);
    } else {
      mr.probability = truth.probability(N);
    }
    bool observed = true;
    for (int r = 1; r <= N && observed; ++r) {
      const DirectionSet& set = result.direction_sets[r - 1];
      std::vector<double> values;
      for (std::size_t i = 0; i < set.directions.size(); ++i) {
        const auto est = measured[r][i].moment(N, r);
        if (!est) {
          observed = false;
          break;
        }
        values.push_back(est->value);
      }
      if (!observed) break;
      std::optional<MomentComponents> lower;
      if (r >= 3) lower = mr.components[r - 3];
      const ComponentSolution sol = solve_moment_components(set.directions, values, N, r, lower);
      mr.components.push_back(sol.components);
      mr.condition_number = std::max(mr.condition_number, sol.condition_number);
      mr.residual = std::max(mr.residual, sol.residual);
    }
    if (!observed) continue;
    mr.tensors = assemble_all_tensors(mr.components, N);
    mr.density = reconstruct_density(mr.tensors, N);
    mr.residual = std::max(mr.residual, mr.density->residual);
    result.manifolds.push_back(std::move(mr));
  }
  return result;
}

NonResolvedResult non_resolved_pipeline(const NonResolvedInput& in, double tol) {
  NonResolvedResult out;
  out.p1 = 2.0 * in.s0 - in.s0_sq;
  out.p2 = (in.s0_sq - in.s0) / 2.0;
  out.p0 = 1.0 - out.p1 - out.p2;
  if (out.p0 < -tol || out.p1 < -tol || out.p2 < -tol) {
    throw std::domain_error("inferred photon-number probabilities are negative; support is not within N <= 2");
  }
  if (out.p1 > tol) out.first_order_1 = (4.0 * in.m1 - in.m3) / (3.0 * out.p1);
  if (out.p2 > tol) {
    out.first_order_2 = (in.m3 - in.m1) / (3.0 * out.p2);
    out.second_order_2 = 2.0 * (in.m2 + in.s0_sq - 2.0 * in.s0) / (in.s0_sq - in.s0);
  }
  return out;
}

}  // namespace stokes
