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

#ifndef STOKES_FACTORIALS_HPP
#define STOKES_FACTORIALS_HPP

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "stokes/fock_core.hpp"

namespace stokes {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Coefficients of x^[n] in ascending powers of x.
std::vector<Rational> central_factorial_polynomial(int n);

/// x^[n] = x prod_{k=2-n, step 2}^{n-2} (x + k/2), x^[0] = 1.
double central_factorial(double x, int n);

/// Same value from prod (x^2 - j^2) (even n) or x prod (x^2 - (j-1/2)^2) (odd n).
double central_factorial_product_form(double x, int n);

/// f(n, k) from the explicit alternating double sum, in exact arithmetic.
Rational central_factorial_first_explicit(int n, int k);

/// F(r, 2j) for even arguments from its single-sum closed form.
Rational central_factorial_second_even(int r, int two_j);

/// Exact central factorial numbers f(n,k) (first kind) and F(n,k) (second
/// kind) for 0 <= k <= n <= max_n. f comes from expanding x^[n]; F is the
/// inverse triangle. Construction cross-checks f against the explicit
/// double sum for n <= 24 and F against the even-argument closed form,
/// throwing std::logic_error on any disagreement.
class CentralFactorialTable {
 public:
  explicit CentralFactorialTable(int max_n = 40);

  int max_n() const { return max_n_; }
  const Rational& f(int n, int k) const;
  const Rational& F(int n, int k) const;
  double f_value(int n, int k) const { return f(n, k).convert_to<double>(); }
  double F_value(int n, int k) const { return F(n, k).convert_to<double>(); }

 private:
  std::size_t slot(int n, int k) const;

  int max_n_;
  std::vector<Rational> f_;
  std::vector<Rational> F_;
};

/// Shared table with max_n = 40, built on first use.
const CentralFactorialTable& central_factorials();

/// Q_j(n) = 2^(j-2n) sum_k C(2n,k) (n-k)^(2j).
Rational q_polynomial_exact(int j, int n);
/// Q_j(n) via Q_{j+1}(n) = 2n^2 Q_j(n) - n(2n-1) Q_j(n-1), Q_0 = 1.
Rational q_polynomial_recurrence(int j, int n);
/// Both routes, required to agree exactly.
double q_polynomial(int j, int n);

/// <S_n^target>_N as a linear form in the lower-order profile values:
/// key r -> coefficient of <S_n^r>_N, key 0 standing for the constant 1.
std::map<int, Rational> profile_recurrence_coefficients(int N, int target_r);

/// Applies the recurrence from the supplied lower-order values (orders <= N).
/// Throws std::invalid_argument if a required order is missing.
double profile_recurrence(int N, const std::map<int, double>& lower, int target_r);

enum class SpectrumKind { Integer, HalfInteger };

struct RecurrenceReport {
  SpectrumKind kind;
  int nu = 0;
  int mu = 0;
  double max_deviation = 0.0;
  bool holds = false;
};

/// Checks A^(2nu-1+mu) = -sum_{j=1}^{nu-1} f(2nu,2j) A^(2j-1+mu) for an integer
/// spectrum with |lambda| < nu, or A^(2nu+mu) = -sum_{j=0}^{nu-1}
/// f(2nu+1,2j+1) A^(2j+mu) for a half-integer spectrum with |lambda| <= nu-1/2.
/// A must be Hermitian. Throws std::invalid_argument if the spectrum is of
/// neither kind or violates the bound, or if mu < 0.
RecurrenceReport operator_recurrence_check(const CMatrix& a, int nu, int mu, double tol = 1e-9);

/// "n,k,value" rows of f (first kind) or F (second kind) with exact values.
std::string central_factorial_csv(const CentralFactorialTable& table, bool second_kind);

}  // namespace stokes

#endif  // STOKES_FACTORIALS_HPP
