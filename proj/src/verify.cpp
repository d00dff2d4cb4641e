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


#include "stokes/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "stokes/factorials.hpp"
#include "stokes/fock_core.hpp"
#include "stokes/menagerie.hpp"
#include "stokes/moments.hpp"
#include "stokes/tomography.hpp"

namespace stokes {

namespace {

using Rng = std::mt19937_64;

CMatrix random_density(int N, Rng& rng) {
  std::normal_distribution<double> g;
  CMatrix a(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

Direction random_direction(Rng& rng) {
  std::normal_distribution<double> g;
  return Direction::normalized(Eigen::Vector3d(g(rng), g(rng), g(rng)));
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

class Recorder {
 public:
  explicit Recorder(std::string suite) { report_.suite = std::move(suite); }

  void check(const std::string& name, double err, double tol) {
    std::ostringstream os;
    os << "max error " << err << " (tolerance " << tol << ")";
    report_.checks.push_back({name, err <= tol, os.str()});
  }
  void check(const std::string& name, bool ok, std::string detail = {}) {
    report_.checks.push_back({name, ok, std::move(detail)});
  }
  SuiteReport take() { return std::move(report_); }

 private:
  SuiteReport report_;
};

SuiteReport algebra_suite() {
  Recorder rec("algebra");
  const cplx i2(0.0, 2.0);
  double comm = 0.0, number = 0.0, casimir = 0.0;
  for (int N = 0; N <= 10; ++N) {
    CMatrix s[4];
    for (int j = 0; j < 4; ++j) s[j] = stokes_operator(j, N).matrix();
    for (int j = 1; j <= 3; ++j) {
      const int k = j % 3 + 1, l = k % 3 + 1;
      comm = std::max(comm, max_abs(s[j] * s[k] - s[k] * s[j] - i2 * s[l]));
      number = std::max(number, max_abs(s[0] * s[j] - s[j] * s[0]));
    }
    casimir = std::max(casimir, max_abs(s[1] * s[1] + s[2] * s[2] + s[3] * s[3] -
                                        s[0] * (s[0] + 2.0 * CMatrix::Identity(N + 1, N + 1))));
  }
  rec.check("[S_j, S_k] = 2i eps_jkl S_l for N <= 10", comm, 1e-10);
  rec.check("[S_0, S_j] = 0 for N <= 10", number, 1e-10);
  rec.check("S1^2 + S2^2 + S3^2 = S0(S0 + 2) for N <= 10", casimir, 1e-10);

  Rng rng(11);
  std::uniform_real_distribution<double> u;
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Block> blocks;
    for (int N = 0; N <= 4; ++N) blocks.push_back(Block{N, u(rng) + 0.05, ManifoldState::mixed(N, random_density(N, rng))});
    double total = 0.0;
    for (const auto& b : blocks) total += b.probability;
    for (auto& b : blocks) b.probability /= total;
    const BlockDiagonalState st(std::move(blocks));
    double var_sum = 0.0;
    for (int j = 1; j <= 3; ++j) {
      double m1 = 0.0, m2 = 0.0;
      for (const auto& b : st.blocks()) {
        const CMatrix s = stokes_operator(j, b.N).matrix();
        m1 += b.probability * b.state.expectation(s).real();
        m2 += b.probability * b.state.expectation(s * s).real();
      }
      var_sum += m2 - m1 * m1;
    }
    const double s0 = st.mean_photons();
    const double upper = st.mean_photons_squared() + 2.0 * s0;
    if (var_sum < 2.0 * s0 - 1e-9 || var_sum > upper + 1e-9) ++violations;
  }
  rec.check("2<S0> <= sum of variances <= <S0(S0+2)> (200 random states)", violations == 0,
            std::to_string(violations) + " violations");
  return rec.take();
}

double brute_profile(const BlockDiagonalState& st, int r, const Direction& n) {
  double out = 0.0;
  for (const auto& b : st.blocks()) out += b.probability * direct_profile(b.state, r, n);
  return out;
}

SuiteReport profiles_suite() {
  Recorder rec("profiles");
  Rng rng(23);
  std::vector<Direction> dirs;
  for (int i = 0; i < 100; ++i) dirs.push_back(random_direction(rng));
  auto relative = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

  struct Case {
    std::string name;
    FamilySpec spec;
    BlockDiagonalState state;
  };
  std::vector<Case> cases;
  for (int N = 1; N <= 8; ++N) {
    cases.push_back({"su2_coherent N=" + std::to_string(N), {Family::Su2CoherentPole, N},
                     BlockDiagonalState::single(su2_coherent(N, 0.0, 0.0))});
    cases.push_back({"noon N=" + std::to_string(N), {Family::Noon, N}, BlockDiagonalState::single(noon(N))});
  }
  for (int m = 1; m <= 4; ++m) {
    cases.push_back({"twin_fock m=" + std::to_string(m), {Family::TwinFock, m},
                     BlockDiagonalState::single(twin_fock(m))});
  }
  cases.push_back({"coherent nbar=1", {Family::TwoModeCoherent, 0, 1.0}, two_mode_coherent(1.0, 32)});
  cases.push_back({"tmsv nbar=0.1", {Family::Tmsv, 0, 0.1}, polarization_sector(tmsv(0.1, {}, 16))});
  for (const auto& c : cases) {
    double err = 0.0;
    for (int r = 1; r <= 6; ++r) {
      for (const auto& n : dirs) err = std::max(err, relative(closed_form_profile(c.spec, r, n), brute_profile(c.state, r, n)));
    }
    rec.check("closed form vs trace, " + c.name + ", r <= 6", err, 1e-9);
  }

  double twin = 0.0, equator = 0.0;
  for (int m = 1; m <= 4; ++m) {
    for (const auto& n : dirs) {
      const double N = 2.0 * m;
      const double s2 = 1.0 - n[2] * n[2];
      twin = std::max(twin, relative(direct_profile(twin_fock(m), 2, n), N * (N + 2) * s2 / 2));
    }
  }
  for (int N = 1; N <= 7; N += 2) {
    for (int k = 0; k < 36; ++k) {
      const double phi = k * M_PI / 18;
      const Direction n = Direction::from_angles(M_PI / 2, phi);
      equator = std::max(equator, relative(direct_profile(noon(N), N, n), std::tgamma(N + 1.0) * std::cos(N * phi)));
    }
  }
  rec.check("twin-Fock <S_n^2> = N(N+2) sin^2(theta)/2", twin, 1e-9);
  rec.check("odd-N NOON equatorial profile N! cos(N phi)", equator, 1e-9);
  return rec.take();
}

SuiteReport recurrence_suite() {
  Recorder rec("recurrence");
  Rng rng(37);
  double err = 0.0;
  for (int N = 0; N <= 6; ++N) {
    for (int trial = 0; trial < 50; ++trial) {
      const ManifoldState st = ManifoldState::mixed(N, random_density(N, rng));
      const Direction n = random_direction(rng);
      const CMatrix s = stokes_in_direction(n, N).matrix();
      std::map<int, double> lower;
      CMatrix p = CMatrix::Identity(N + 1, N + 1);
      std::vector<double> direct;
      for (int r = 0; r <= N + 5; ++r) {
        direct.push_back(st.expectation(p).real());
        p = p * s;
      }
      for (int r = 1; r <= N; ++r) lower[r] = direct[r];
      for (int r = N + 1; r <= N + 5; ++r) {
        const double v = profile_recurrence(N, lower, r);
        err = std::max(err, std::abs(v - direct[r]) / std::max(1.0, std::abs(direct[r])));
      }
    }
  }
  rec.check("profile recurrence vs matrix powers, N <= 6, r <= N+5", err, 1e-9);

  int failures = 0;
  for (int N = 1; N <= 6; ++N) {
    const CMatrix s = stokes_operator(3, N).matrix();
    const bool half = N % 2 == 1;
    const CMatrix a = s / 2.0;
    const int nu = half ? (N + 1) / 2 : N / 2 + 1;
    for (int mu = 0; mu <= 3; ++mu) {
      if (!operator_recurrence_check(a, nu, mu).holds) ++failures;
    }
  }
  rec.check("operator recurrence on S3/2 spectra, N <= 6", failures == 0, std::to_string(failures) + " failures");
  return rec.take();
}

SuiteReport factorials_suite() {
  Recorder rec("factorials");
  const auto& t = central_factorials();
  int mismatches = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= n; ++k) {
      if (central_factorial_first_explicit(n, k) != t.f(n, k)) ++mismatches;
    }
  }
  rec.check("explicit f(n,k) equals x^[n] expansion, n <= 12", mismatches == 0,
            std::to_string(mismatches) + " mismatches");
  rec.check("f(4,2) = -1", t.f(4, 2) == Rational(-1));
  int inverse = 0;
  for (int n = 0; n <= 12; ++n) {
    for (int m = 0; m <= n; ++m) {
      Rational s = 0;
      for (int k = m; k <= n; ++k) s += t.f(n, k) * t.F(k, m);
      if (s != Rational(n == m ? 1 : 0)) ++inverse;
    }
  }
  rec.check("sum_k f(n,k) F(k,m) = delta_nm, n <= 12", inverse == 0, std::to_string(inverse) + " mismatches");
  return rec.take();
}

SuiteReport tomography_suite() {
  Recorder rec("tomography");
  const auto third = choose_directions(3);
  rec.check("symmetric seven-line third-order design has rank 4", third.primary.rank == 4,
            "rank " + std::to_string(third.primary.rank));
  rec.check("fallback third-order design full rank, condition < 100",
            third.fallback && third.fallback->rank == 7 && third.fallback->condition_number < 100.0,
            third.fallback ? "condition " + std::to_string(third.fallback->condition_number) : "missing");

  std::vector<std::pair<std::string, BlockDiagonalState>> states;
  for (int N = 1; N <= 3; ++N) {
    states.push_back({"noon " + std::to_string(N), BlockDiagonalState::single(noon(N))});
    states.push_back({"su2_coherent " + std::to_string(N), BlockDiagonalState::single(su2_coherent(N, 0.7, 1.9))});
  }
  states.push_back({"twin_fock 1", BlockDiagonalState::single(twin_fock(1))});
  states.push_back({"unpolarized two-photon", BlockDiagonalState::single(unpolarized_two_photon(0.4, 0.3))});
  double worst = 0.0;
  for (const auto& [name, st] : states) {
    const auto res = run_tomography(st, {});
    for (const auto& m : res.manifolds) {
      worst = std::max(worst, trace_distance(m.density->state.density(), st.find(m.N)->density()));
    }
  }
  rec.check("exact-moment reconstruction of menagerie states, N <= 3", worst, 1e-7);
  return rec.take();
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"algebra", "profiles", "recurrence", "factorials", "tomography"};
  return names;
}

SuiteReport run_suite(const std::string& name) {
  static const std::map<std::string, std::function<SuiteReport()>> suites{
      {"algebra", algebra_suite},       {"profiles", profiles_suite},     {"recurrence", recurrence_suite},
      {"factorials", factorials_suite}, {"tomography", tomography_suite},
  };
  auto it = suites.find(name);
  if (it == suites.end()) throw std::invalid_argument("unknown suite '" + name + "'");
  return it->second();
}

}  // namespace stokes
