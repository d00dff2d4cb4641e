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

#include "stokes/factorials.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace stokes {

namespace {

BigInt big_binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  BigInt c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

BigInt big_factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Rational rpow(const Rational& x, int e) {
  Rational out = 1;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

// Largest table row whose explicit double sum is re-derived at construction.
constexpr int kExplicitCheckMax = 24;

}  // namespace

std::vector<Rational> central_factorial_polynomial(int n) {
  if (n < 0) throw std::invalid_argument("central factorial degree must be non-negative");
  if (n == 0) return {Rational(1)};
  std::vector<Rational> p{Rational(0), Rational(1)};
  for (int k = 2 - n; k <= n - 2; k += 2) {
    std::vector<Rational> q(p.size() + 1, Rational(0));
    const Rational shift(k, 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i + 1] += p[i];
      q[i] += p[i] * shift;
    }
    p = std::move(q);
  }
  return p;
}

double central_factorial(double x, int n) {
  if (n < 0) throw std::invalid_argument("central factorial degree must be non-negative");
  if (n == 0) return 1.0;
  double out = x;
  for (int k = 2 - n; k <= n - 2; k += 2) out *= x + k / 2.0;
  return out;
}

double central_factorial_product_form(double x, int n) {
  if (n < 0) throw std::invalid_argument("central factorial degree must be non-negative");
  double out = 1.0;
  if (n % 2 == 0) {
    for (int j = 0; j < n / 2; ++j) out *= x * x - double(j) * j;
  } else {
    out = x;
    for (int j = 1; j <= n / 2; ++j) out *= x * x - (j - 0.5) * (j - 0.5);
  }
  return out;
}

Rational central_factorial_first_explicit(int n, int k) {
  if (n < 0 || k < 0) throw std::invalid_argument("negative central factorial argument");
  if (n < k) return 0;
  if (k == 0) return n == 0 ? 1 : 0;
  Rational sum = 0;
  for (int j = 0; j <= n - k; ++j) {
    Rational inner = 0;
    for (int m = 0; m <= j; ++m) {
      const Rational term = Rational(big_binomial(j, m)) * rpow(Rational(j, 2) - m, n - k + j);
      inner += (m % 2 == 0) ? term : Rational(-term);
    }
    Rational outer = Rational(big_binomial(2 * n - 2 * k, n - k - j)) * inner /
                     Rational(big_factorial(j) * (n + j));
    sum += (j % 2 == 0) ? outer : Rational(-outer);
  }
  return Rational(big_binomial(2 * n - k, k)) * k * sum;
}

Rational central_factorial_second_even(int r, int two_j) {
  if (r < 0 || two_j < 0 || two_j % 2 != 0) {
    throw std::invalid_argument("closed form needs a non-negative even second argument");
  }
  const int j = two_j / 2;
  if (j == 0) return r == 0 ? 1 : 0;
  Rational sum = 0;
  for (int k = 1; k <= j; ++k) {
    Rational term(pow(BigInt(k), static_cast<unsigned>(r)), big_factorial(j + k) * big_factorial(j - k));
    sum += ((j + k) % 2 == 0) ? term : Rational(-term);
  }
  return 2 * sum;
}

CentralFactorialTable::CentralFactorialTable(int max_n) : max_n_(max_n) {
  if (max_n < 0) throw std::invalid_argument("table bound must be non-negative");
  const std::size_t size = slot(max_n, max_n) + 1;
  f_.assign(size, Rational(0));
  F_.assign(size, Rational(0));
  for (int n = 0; n <= max_n; ++n) {
    const auto poly = central_factorial_polynomial(n);
    for (int k = 0; k <= n; ++k) f_[slot(n, k)] = poly[k];
  }
  // F is the inverse of the unit lower-triangular f.
  for (int n = 0; n <= max_n; ++n) {
    F_[slot(n, n)] = 1;
    for (int k = n - 1; k >= 0; --k) {
      Rational acc = 0;
      for (int j = k + 1; j <= n; ++j) acc += F_[slot(n, j)] * f_[slot(j, k)];
      F_[slot(n, k)] = -acc / f_[slot(k, k)];
    }
  }
  for (int n = 0; n <= std::min(max_n, kExplicitCheckMax); ++n) {
    for (int k = 0; k <= n; ++k) {
      if (central_factorial_first_explicit(n, k) != f_[slot(n, k)]) {
        throw std::logic_error("explicit f(" + std::to_string(n) + "," + std::to_string(k) +
                               ") disagrees with the polynomial expansion");
      }
    }
  }
  for (int r = 0; r <= max_n; r += 2) {
    for (int j2 = 0; j2 <= r; j2 += 2) {
      if (central_factorial_second_even(r, j2) != F_[slot(r, j2)]) {
        throw std::logic_error("closed-form F(" + std::to_string(r) + "," + std::to_string(j2) +
                               ") disagrees with the inverse table");
      }
    }
  }
}

std::size_t CentralFactorialTable::slot(int n, int k) const {
  return static_cast<std::size_t>(n) * (n + 1) / 2 + k;
}

const Rational& CentralFactorialTable::f(int n, int k) const {
  if (n < 0 || k < 0 || k > n || n > max_n_) {
    throw std::out_of_range("f(" + std::to_string(n) + "," + std::to_string(k) + ") outside table");
  }
  return f_[slot(n, k)];
}

const Rational& CentralFactorialTable::F(int n, int k) const {
  if (n < 0 || k < 0 || k > n || n > max_n_) {
    throw std::out_of_range("F(" + std::to_string(n) + "," + std::to_string(k) + ") outside table");
  }
  return F_[slot(n, k)];
}

const CentralFactorialTable& central_factorials() {
  static const CentralFactorialTable table(40);
  return table;
}

Rational q_polynomial_exact(int j, int n) {
  if (j < 0 || n < 0) throw std::invalid_argument("Q polynomial arguments must be non-negative");
  BigInt sum = 0;
  for (int k = 0; k <= 2 * n; ++k) {
    sum += big_binomial(2 * n, k) * pow(BigInt(n - k), static_cast<unsigned>(2 * j));
  }
  const int e = j - 2 * n;
  if (e >= 0) return Rational(sum * pow(BigInt(2), static_cast<unsigned>(e)));
  return Rational(sum, pow(BigInt(2), static_cast<unsigned>(-e)));
}

Rational q_polynomial_recurrence(int j, int n) {
  if (j < 0 || n < 0) throw std::invalid_argument("Q polynomial arguments must be non-negative");
  std::vector<Rational> q(n + 1, Rational(1));
  for (int step = 0; step < j; ++step) {
    std::vector<Rational> next(n + 1);
    for (int x = 0; x <= n; ++x) {
      next[x] = 2 * x * x * q[x];
      if (x > 0) next[x] -= x * (2 * x - 1) * q[x - 1];
    }
    q = std::move(next);
  }
  return q[n];
}

double q_polynomial(int j, int n) {
  const Rational a = q_polynomial_exact(j, n);
  if (a != q_polynomial_recurrence(j, n)) {
    throw std::logic_error("Q polynomial definitions disagree");
  }
  return a.convert_to<double>();
}

std::map<int, Rational> profile_recurrence_coefficients(int N, int target_r) {
  if (N < 0) throw std::invalid_argument("manifold index must be non-negative");
  if (target_r < 0) throw std::invalid_argument("profile order must be non-negative");
  const auto& table = central_factorials();
  if (N + 2 > table.max_n()) throw std::invalid_argument("manifold beyond central factorial table");
  std::map<int, Rational> form{{target_r, Rational(1)}};
  while (!form.empty() && form.rbegin()->first > N) {
    const int t = form.rbegin()->first;
    const Rational c = form.rbegin()->second;
    form.erase(t);
    const int mu = t - N - 1;
    if (N % 2 == 0) {
      for (int j = 1; j <= N / 2; ++j) {
        const Rational w = Rational(BigInt(pow(BigInt(4), static_cast<unsigned>(N / 2 + 1 - j)))) * table.f(N + 2, 2 * j);
        form[2 * j - 1 + mu] -= c * w;
      }
    } else {
      for (int j = 0; j <= (N - 1) / 2; ++j) {
        const Rational w =
            Rational(BigInt(pow(BigInt(4), static_cast<unsigned>((N + 1) / 2 - j)))) * table.f(N + 2, 2 * j + 1);
        form[2 * j + mu] -= c * w;
      }
    }
    std::erase_if(form, [](const auto& kv) { return kv.second == 0; });
  }
  return form;
}

double profile_recurrence(int N, const std::map<int, double>& lower, int target_r) {
  double out = 0.0;
  for (const auto& [r, c] : profile_recurrence_coefficients(N, target_r)) {
    if (r == 0) {
      out += c.convert_to<double>();
      continue;
    }
    auto it = lower.find(r);
    if (it == lower.end()) {
      throw std::invalid_argument("profile of order " + std::to_string(r) + " required for manifold " +
                                  std::to_string(N));
    }
    out += c.convert_to<double>() * it->second;
  }
  return out;
}

RecurrenceReport operator_recurrence_check(const CMatrix& a, int nu, int mu, double tol) {
  if (mu < 0) throw std::invalid_argument("only non-negative mu is supported");
  if (nu < 1) throw std::invalid_argument("nu must be at least 1");
  if (a.rows() != a.cols()) throw std::invalid_argument("operator must be square");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("operator must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  auto near_integer = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
  bool integer = true, half = true;
  for (double x : ev) {
    integer = integer && near_integer(x);
    half = half && near_integer(x - 0.5);
  }
  RecurrenceReport rep;
  rep.nu = nu;
  rep.mu = mu;
  const auto& table = central_factorials();
  const int d = static_cast<int>(a.rows());
  auto power = [&](int e) {
    CMatrix p = CMatrix::Identity(d, d);
    for (int i = 0; i < e; ++i) p = p * a;
    return p;
  };
  CMatrix lhs, rhs = CMatrix::Zero(d, d);
  if (integer) {
    rep.kind = SpectrumKind::Integer;
    if (ev.cwiseAbs().maxCoeff() > nu - 1 + 1e-9) {
      throw std::invalid_argument("integer spectrum must satisfy |lambda| < nu");
    }
    if (2 * nu > table.max_n()) throw std::invalid_argument("nu beyond central factorial table");
    lhs = power(2 * nu - 1 + mu);
    for (int j = 1; j <= nu - 1; ++j) {
      rhs -= table.f_value(2 * nu, 2 * j) * power(2 * j - 1 + mu);
    }
  } else if (half) {
    rep.kind = SpectrumKind::HalfInteger;
    if (ev.cwiseAbs().maxCoeff() > nu - 0.5 + 1e-9) {
      throw std::invalid_argument("half-integer spectrum must satisfy |lambda| <= nu - 1/2");
    }
    if (2 * nu + 1 > table.max_n()) throw std::invalid_argument("nu beyond central factorial table");
    lhs = power(2 * nu + mu);
    for (int j = 0; j <= nu - 1; ++j) {
      rhs -= table.f_value(2 * nu + 1, 2 * j + 1) * power(2 * j + mu);
    }
  } else {
    throw std::invalid_argument("spectrum is neither integer nor half-integer");
  }
  rep.max_deviation = (lhs - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, lhs.cwiseAbs().maxCoeff());
  rep.holds = rep.max_deviation <= tol * scale;
  return rep;
}

std::string central_factorial_csv(const CentralFactorialTable& table, bool second_kind) {
  std::ostringstream os;
  os << "n,k,value\n";
  for (int n = 0; n <= table.max_n(); ++n) {
    for (int k = 0; k <= n; ++k) {
      os << n << ',' << k << ',' << (second_kind ? table.F(n, k) : table.f(n, k)).str() << '\n';
    }
  }
  return os.str();
}

}  // namespace stokes
