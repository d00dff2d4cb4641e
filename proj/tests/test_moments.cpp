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


#include <gtest/gtest.h>

#include <cmath>

#include "stokes/moments.hpp"
#include "test_support.hpp"

namespace stokes {
namespace {

using testing::LadderOracle;

cplx brute_word(const ManifoldState& st, const StokesWord& w) {
  LadderOracle oracle(st.photons());
  CMatrix p = CMatrix::Identity(st.dimension(), st.dimension());
  for (int j : w) p = p * oracle.stokes(j);
  return (st.density() * p).trace();
}

TEST(PolarizationTensor, ElementsAreOrderedExpectations) {
  testing::Rng rng(20);
  for (int N = 1; N <= 4; ++N) {
    const auto st = testing::random_state(N, rng);
    for (int r = 1; r <= 3; ++r) {
      const auto t = tensor(st, r);
      ASSERT_EQ(t.size(), static_cast<std::size_t>(std::pow(3, r)));
      for (std::size_t i = 0; i < t.size(); ++i) {
        const StokesWord w = PolarizationTensor::word_of(r, i);
        EXPECT_LT(std::abs(t.at_flat(i) - brute_word(st, w)), 1e-10);
      }
      EXPECT_LT(t.hermiticity_defect(), 1e-10);
    }
  }
}

TEST(PolarizationTensor, LeftmostIndexSlowest) {
  EXPECT_EQ(PolarizationTensor::flat_index(StokesWord{1, 1, 2}), 1u);
  EXPECT_EQ(PolarizationTensor::flat_index(StokesWord{2, 1, 1}), 9u);
  EXPECT_EQ(PolarizationTensor::word_of(2, 5), (StokesWord{2, 3}));
}

TEST(PolarizationTensor, FirstOrderIsStokesVector) {
  const auto t = tensor(su2_coherent(1, 0.0, 0.0), 1);
  EXPECT_NEAR(t({3}).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(t({1})), 0.0, 1e-15);
}

TEST(MomentComponents, ClassSumsReproduceProfile) {
  testing::Rng rng(21);
  for (int N = 1; N <= 5; ++N) {
    const auto st = testing::random_state(N, rng);
    for (int r = 1; r <= 5; ++r) {
      const auto m = moment_components(tensor(st, r));
      ASSERT_EQ(static_cast<int>(m.values().size()), MomentComponents::count(r));
      for (int i = 0; i < 5; ++i) {
        const Direction n = testing::random_direction(rng);
        EXPECT_NEAR(profile_eval(m, n), testing::brute_profile(st, r, n), 1e-9 * std::pow(N, r));
      }
    }
  }
}

TEST(MomentComponents, SymmetrizedProductExpectation) {
  testing::Rng rng(22);
  const auto st = testing::random_state(3, rng);
  const auto m = moment_components(tensor(st, 3));
  for (int k = 0; k <= 3; ++k) {
    for (int l = 0; l <= 3 - k; ++l) {
      const double sym = st.expectation(symmetrized_product(k, l, 3, 3)).real();
      EXPECT_NEAR(m(k, l), sym, 1e-10);
    }
  }
  EXPECT_EQ(trinomial(3, 1, 1), 6u);
  EXPECT_EQ(trinomial(4, 2, 0), 6u);
}

TEST(MomentComponents, TwoPhotonFockState) {
  CVector v = CVector::Zero(3);
  v[0] = 1.0;
  const auto m = moment_components(tensor(ManifoldState::pure(2, v), 2));
  EXPECT_NEAR(m(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(m(2, 0), 2.0, 1e-14);
  EXPECT_NEAR(m(0, 2), 2.0, 1e-14);
  EXPECT_NEAR(m(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(m(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(m(1, 1), 0.0, 1e-14);
}

TEST(MomentComponents, RejectsComplexClassSums) {
  std::vector<cplx> el(9, 0.0);
  el[PolarizationTensor::flat_index(StokesWord{1, 2})] = cplx(0.0, 1.0);
  EXPECT_THROW(moment_components(PolarizationTensor(2, 1, el)), std::domain_error);
}

TEST(MultiDirection, MatchesOperatorProducts) {
  testing::Rng rng(23);
  const auto st = testing::random_state(3, rng);
  const auto t = tensor(st, 3);
  std::vector<Direction> dirs;
  CMatrix p = CMatrix::Identity(4, 4);
  LadderOracle oracle(3);
  for (int i = 0; i < 3; ++i) {
    dirs.push_back(testing::random_direction(rng));
    p = p * oracle.along(dirs.back());
  }
  EXPECT_LT(std::abs(multi_direction_expectation(t, dirs) - (st.density() * p).trace()), 1e-10);
}

TEST(TensorDescend, RecoversLowerOrder) {
  testing::Rng rng(24);
  for (int N = 1; N <= 4; ++N) {
    const auto st = testing::random_state(N, rng);
    for (int r = 2; r <= 4; ++r) {
      const auto lower = tensor_descend(tensor(st, r));
      EXPECT_LT(lower.max_abs_difference(tensor(st, r - 1)), 1e-9);
    }
  }
}

TEST(Assembly, SecondAndThirdOrderClosedForms) {
  testing::Rng rng(25);
  for (int N = 1; N <= 5; ++N) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto st = testing::random_state(N, rng);
      const auto t1 = tensor(st, 1), t2 = tensor(st, 2), t3 = tensor(st, 3);
      EXPECT_LT(assemble_tensor_order2(moment_components(t2), t1).max_abs_difference(t2), 1e-10);
      EXPECT_LT(assemble_tensor_order3(moment_components(t3), t2).max_abs_difference(t3), 1e-9);
    }
  }
}

TEST(Assembly, GeneralOrderMatchesDirectTensor) {
  testing::Rng rng(26);
  for (int N = 2; N <= 5; ++N) {
    const auto st = testing::random_state(N, rng);
    for (int r = 2; r <= 5; ++r) {
      const auto direct = tensor(st, r);
      const auto assembled = assemble_tensor(moment_components(direct), tensor(st, r - 1));
      EXPECT_LT(assembled.max_abs_difference(direct), 1e-8 * std::pow(N, r)) << "N=" << N << " r=" << r;
    }
  }
}

TEST(DegreeOfPolarization, SinglePhotonPurityLaw) {
  testing::Rng rng(27);
  for (int i = 0; i < 20; ++i) {
    const auto st = testing::random_state(1, rng);
    EXPECT_NEAR(degree_of_polarization(st), std::sqrt(2 * st.purity() - 1), 1e-12);
  }
}

TEST(DegreeOfPolarization, CoherentAndHidden) {
  EXPECT_NEAR(degree_of_polarization(su2_coherent(5, 1.0, 2.0)), 1.0, 1e-12);
  EXPECT_NEAR(degree_of_polarization(two_mode_coherent(1.5, 30)), 1.0, 1e-12);
  EXPECT_NEAR(degree_of_polarization(twin_fock(3)), 0.0, 1e-12);
  EXPECT_THROW(degree_of_polarization(twin_fock(0)), std::domain_error);
  const auto st = BlockDiagonalState::single(noon(2));
  EXPECT_FALSE(manifold_degree_of_polarization(st, 3).has_value());
}

TEST(Covariance, MatchesVariancesAndIsSymmetric) {
  testing::Rng rng(28);
  const auto st = testing::random_state(3, rng);
  const Eigen::Matrix3d g = covariance_matrix(st);
  EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  for (int j = 1; j <= 3; ++j) {
    const CMatrix s = LadderOracle(3).stokes(j);
    const double mean = (st.density() * s).trace().real();
    const double var = (st.density() * s * s).trace().real() - mean * mean;
    EXPECT_NEAR(g(j - 1, j - 1), var, 1e-10);
  }
  // SU(2) coherent states saturate the lower bound: variance sum 2N.
  EXPECT_NEAR(covariance_matrix(su2_coherent(4, 0.3, 0.2)).trace(), 8.0, 1e-10);
}

TEST(ParameterCounts, BlockDiagonalAndAveraged) {
  const std::vector<int> m{0, 1, 2};
  EXPECT_EQ(ParameterCounts::block_diagonal(m), 13);
  for (int c = 0; c <= 8; ++c) {
    std::vector<int> all;
    for (int N = 0; N <= c; ++N) all.push_back(N);
    EXPECT_EQ(ParameterCounts::block_diagonal_cutoff(c), ParameterCounts::block_diagonal(all));
    const std::int64_t d = (c + 1) * (c + 2) / 2;
    EXPECT_EQ(ParameterCounts::full_state(c), d * d - 1);
  }
  EXPECT_EQ(ParameterCounts::averaged_components(2), 9);
  EXPECT_EQ(ParameterCounts::manifold_total(3), 15);
}

TEST(Averaged, WeightsManifoldQuantities) {
  testing::Rng rng(29);
  const auto st = testing::random_block_state(3, rng);
  const Direction n = testing::random_direction(rng);
  EXPECT_NEAR(averaged_profile(st, 2, n), testing::brute_profile(st, 2, n), 1e-10);
  const auto t = averaged_tensor(st, 2);
  EXPECT_FALSE(t.photons().has_value());
  EXPECT_NEAR(profile_eval(averaged_components(st, 3), n), testing::brute_profile(st, 3, n), 1e-9);
}

}  // namespace
}  // namespace stokes
