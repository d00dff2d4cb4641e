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

#include "stokes/menagerie.hpp"
#include "test_support.hpp"

namespace stokes {
namespace {

using testing::brute_profile;
using testing::max_abs;

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(ManifoldState, ValidatesDensity) {
  CMatrix bad(2, 2);
  bad << 0.5, 0.6, 0.6, 0.5;
  EXPECT_THROW(ManifoldState::mixed(1, bad), std::invalid_argument);
  CMatrix trace2 = CMatrix::Identity(2, 2);
  EXPECT_THROW(ManifoldState::mixed(1, trace2), std::invalid_argument);
  EXPECT_THROW(ManifoldState::pure(1, CVector::Ones(2)), std::invalid_argument);
  EXPECT_THROW(ManifoldState::pure(2, CVector::Ones(2).normalized()), std::invalid_argument);
}

TEST(BlockDiagonalState, ValidatesAndSortsBlocks) {
  std::vector<Block> blocks{{2, 0.5, twin_fock(1)}, {1, 0.5, noon(1)}};
  const BlockDiagonalState st(blocks);
  EXPECT_EQ(st.blocks().front().N, 1);
  EXPECT_DOUBLE_EQ(st.probability(2), 0.5);
  EXPECT_DOUBLE_EQ(st.probability(3), 0.0);
  EXPECT_DOUBLE_EQ(st.mean_photons(), 1.5);
  blocks[0].probability = 0.7;
  EXPECT_THROW(BlockDiagonalState{blocks}, std::invalid_argument);
}

TEST(Su2Coherent, PoleAndEquator) {
  const auto pole = su2_coherent(1, 0.0, 0.0);
  EXPECT_NEAR(std::abs((*pole.amplitudes())[0]), 1.0, 1e-15);
  const auto eq = su2_coherent(2, M_PI / 2, 0.0);
  const CVector& a = *eq.amplitudes();
  EXPECT_NEAR(std::abs(a[0]), 0.5, 1e-14);
  EXPECT_NEAR(std::abs(a[1]), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::abs(a[2]), 0.5, 1e-14);
}

TEST(Su2Coherent, IsMaximalEigenvector) {
  testing::Rng rng(1);
  for (int N = 1; N <= 7; ++N) {
    const Direction n = testing::random_direction(rng);
    const auto st = su2_coherent(N, n.polar(), n.azimuth());
    const CVector& psi = *st.amplitudes();
    EXPECT_LT((testing::LadderOracle(N).along(n) * psi - double(N) * psi).norm(), 1e-10);
  }
}

TEST(TwoModeCoherent, PoissonWeights) {
  const auto vac = two_mode_coherent(0.0, 5);
  ASSERT_EQ(vac.blocks().size(), 1u);
  EXPECT_EQ(vac.blocks()[0].N, 0);
  const auto st = two_mode_coherent(2.0, 25);
  for (int N = 0; N <= 6; ++N) {
    EXPECT_NEAR(st.probability(N), std::exp(-2.0) * std::pow(2.0, N) / std::tgamma(N + 1.0), 1e-12);
  }
  EXPECT_THROW(two_mode_coherent(2.0, 8), std::invalid_argument);
}

TEST(TwoModeCoherent, SectorOfLatticeStateAgrees) {
  const double nbar = 1.5;
  const auto lattice = polarization_sector(two_mode_coherent_lattice(std::sqrt(nbar), 30));
  const auto blocks = two_mode_coherent(nbar, 30);
  for (int N = 0; N <= 8; ++N) EXPECT_NEAR(lattice.probability(N), blocks.probability(N), 1e-12);
}

TEST(TwinFock, VacuumAndHiddenPolarization) {
  EXPECT_EQ(twin_fock(0).photons(), 0);
  testing::Rng rng(2);
  for (int m = 1; m <= 4; ++m) {
    const auto st = twin_fock(m);
    const double N = 2.0 * m;
    for (int i = 0; i < 10; ++i) {
      const Direction n = testing::random_direction(rng);
      const double s2 = 1.0 - n[2] * n[2];
      EXPECT_NEAR(brute_profile(st, 2, n), N * (N + 2) * s2 / 2, 1e-10);
      EXPECT_NEAR(brute_profile(st, 3, n), 0.0, 1e-10);
    }
  }
}

TEST(TransformedTwinFock, AgreesWithUnitaryApplication) {
  testing::Rng rng(4);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int m = 0; m <= 3; ++m) {
    for (int trial = 0; trial < 5; ++trial) {
      const EulerAngles e{ang(rng), std::abs(ang(rng)), ang(rng)};
      const CVector direct = su2_unitary(e, 2 * m).matrix() * *twin_fock(m).amplitudes();
      const CVector formula = *transformed_twin_fock(m, e).amplitudes();
      EXPECT_LT((direct - formula).cwiseAbs().maxCoeff(), 1e-9) << "m=" << m;
    }
  }
  EXPECT_LT(max_abs(transformed_twin_fock(2, {}).density() - twin_fock(2).density()), 1e-14);
}

TEST(Tmsv, ThermalPairWeights) {
  const double nbar = 0.8;
  const auto st = polarization_sector(tmsv(nbar, {0.3, -1.2}, 30));
  const double q = nbar / (2.0 + nbar);
  for (int m = 0; m <= 6; ++m) {
    EXPECT_NEAR(st.probability(2 * m), (1 - q) * std::pow(q, m), 1e-12);
    EXPECT_DOUBLE_EQ(st.probability(2 * m + 1), 0.0);
  }
  EXPECT_NEAR(st.mean_photons(), nbar, 1e-9);
  EXPECT_EQ(polarization_sector(tmsv(0.0, {}, 3)).blocks().size(), 1u);
  EXPECT_THROW(tmsv(1.0, {}, 5), std::invalid_argument);
}

TEST(Noon, SingleExcitationIsCoherent) {
  const auto a = noon(1);
  const auto b = su2_coherent(1, M_PI / 2, 0.0);
  EXPECT_LT(max_abs(a.density() - b.density()), 1e-14);
  EXPECT_THROW(noon(0), std::invalid_argument);
}

TEST(UnpolarizedTwoPhoton, ZeroFirstMoment) {
  for (double a : {0.0, 0.3, 1.0 / std::sqrt(2.0)}) {
    const auto st = unpolarized_two_photon(a, 0.9);
    for (int j = 1; j <= 3; ++j) EXPECT_NEAR(st.expectation(stokes_operator(j, 2)).real(), 0.0, 1e-14);
  }
  EXPECT_THROW(unpolarized_two_photon(0.8, 0.0), std::invalid_argument);
}

TEST(LowPhotonDensities, ProfilesMatchTraces) {
  testing::Rng rng(6);
  const auto one = single_photon_density(0.7, 0.2, -0.1);
  const TwoPhotonParams p{0.4, 0.3, 0.05, 0.1, -0.04, 0.02, -0.06, 0.03};
  const auto two = two_photon_density(p);
  for (int i = 0; i < 20; ++i) {
    const Direction n = testing::random_direction(rng);
    EXPECT_NEAR(single_photon_profile(0.7, 0.2, -0.1, n), brute_profile(one, 1, n), 1e-12);
    EXPECT_NEAR(two_photon_profile(p, 1, n), brute_profile(two, 1, n), 1e-12);
    EXPECT_NEAR(two_photon_profile(p, 2, n), brute_profile(two, 2, n), 1e-12);
  }
  EXPECT_THROW(single_photon_density(0.5, 0.6, 0.0), std::invalid_argument);
  EXPECT_THROW(two_photon_profile(p, 3, Direction::axis(3)), std::invalid_argument);
}

TEST(ClosedForms, SingleManifoldFamilies) {
  testing::Rng rng(7);
  std::vector<Direction> dirs;
  for (int i = 0; i < 25; ++i) dirs.push_back(testing::random_direction(rng));
  for (int N = 1; N <= 8; ++N) {
    for (int r = 0; r <= 6; ++r) {
      for (const auto& n : dirs) {
        EXPECT_LT(relative(closed_form_profile({Family::Su2CoherentPole, N}, r, n),
                           brute_profile(su2_coherent(N, 0.0, 0.0), r, n)), 1e-9);
        EXPECT_LT(relative(closed_form_profile({Family::Noon, N}, r, n), brute_profile(noon(N), r, n)), 1e-9);
        if (N % 2 == 0) {
          EXPECT_LT(relative(closed_form_profile({Family::TwinFock, N / 2}, r, n),
                             brute_profile(twin_fock(N / 2), r, n)), 1e-9);
        }
      }
    }
  }
}

TEST(ClosedForms, TwinFockFourthOrder) {
  testing::Rng rng(9);
  const double N = 4.0;
  for (int i = 0; i < 10; ++i) {
    const Direction n = testing::random_direction(rng);
    const double s2 = 1.0 - n[2] * n[2];
    const double expected = N * (N + 2) * s2 * (16 + 3 * (N - 2) * (N + 4) * s2) / 8;
    EXPECT_NEAR(closed_form_profile({Family::TwinFock, 2}, 4, n), expected, 1e-10);
  }
}

TEST(ClosedForms, CoherentLowOrders) {
  testing::Rng rng(10);
  const double nbar = 1.3;
  const auto st = two_mode_coherent(nbar, 32);
  for (int i = 0; i < 10; ++i) {
    const Direction n = testing::random_direction(rng);
    const double n3 = n[2];
    EXPECT_NEAR(closed_form_profile({Family::TwoModeCoherent, 0, nbar}, 1, n), nbar * n3, 1e-12);
    EXPECT_NEAR(closed_form_profile({Family::TwoModeCoherent, 0, nbar}, 3, n),
                nbar * n3 * (1 + 3 * nbar + nbar * nbar * n3 * n3), 1e-12);
    for (int r = 1; r <= 6; ++r) {
      EXPECT_LT(relative(closed_form_profile({Family::TwoModeCoherent, 0, nbar}, r, n), brute_profile(st, r, n)), 1e-9);
    }
  }
}

TEST(ClosedForms, TmsvAgainstManifoldSum) {
  const double nbar = 0.1;
  const auto st = polarization_sector(tmsv(nbar, {}, 16));
  testing::Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    const Direction n = testing::random_direction(rng);
    const double s2 = 1.0 - n[2] * n[2];
    const double x = nbar * (nbar + 2) * s2;
    EXPECT_NEAR(closed_form_profile({Family::Tmsv, 0, nbar}, 2, n), x, 1e-12);
    EXPECT_NEAR(closed_form_profile({Family::Tmsv, 0, nbar}, 4, n), x * (4 + 9 * x), 1e-12);
    for (int r = 1; r <= 6; ++r) {
      EXPECT_LT(relative(closed_form_profile({Family::Tmsv, 0, nbar}, r, n), brute_profile(st, r, n)), 1e-9);
    }
  }
  // Fourth order on the equator at nbar = 1: thermal-pair sum of the
  // twin-Fock fourth moments N(N+2)(16 + 3(N-2)(N+4))/8.
  const double q = 1.0 / 3.0;
  double summed = 0.0;
  for (int m = 0; m <= 200; ++m) {
    const double N = 2.0 * m;
    summed += (1 - q) * std::pow(q, m) * N * (N + 2) * (16 + 3 * (N - 2) * (N + 4)) / 8;
  }
  EXPECT_NEAR(closed_form_profile({Family::Tmsv, 0, 1.0}, 4, Direction::axis(1)), summed, 1e-9);
  EXPECT_NEAR(summed, 93.0, 1e-9);
}

TEST(ClosedForms, NoonEquatorialLaws) {
  for (int N = 1; N <= 7; N += 2) {
    for (double phi : {0.0, 0.4, 1.3, 2.9}) {
      const Direction n = Direction::from_angles(M_PI / 2, phi);
      EXPECT_NEAR(closed_form_profile({Family::Noon, N}, N, n), std::tgamma(N + 1.0) * std::cos(N * phi), 1e-9);
    }
  }
  for (double phi : {0.0, 0.7, 2.2}) {
    const Direction n = Direction::from_angles(M_PI / 2, phi);
    EXPECT_NEAR(brute_profile(noon(2), 2, n), 2 * std::cos(2 * phi) + 2, 1e-12);
  }
}

TEST(ApplySu2, RotatesProfiles) {
  testing::Rng rng(13);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int N = 1; N <= 4; ++N) {
    const auto st = testing::random_state(N, rng);
    const EulerAngles e{ang(rng), std::abs(ang(rng)), ang(rng)};
    const auto moved = apply_su2(st, e);
    const Direction n = testing::random_direction(rng);
    const Direction back(rotation_from_euler(e).transpose() * n.vector());
    for (int r = 1; r <= 3; ++r) EXPECT_NEAR(brute_profile(moved, r, n), brute_profile(st, r, back), 1e-9);
  }
}

TEST(FamilyNames, AreStable) {
  EXPECT_EQ(family_name(Family::Su2CoherentPole), "su2_coherent");
  EXPECT_EQ(family_name(Family::Tmsv), "tmsv");
  EXPECT_EQ(family_name(Family::Noon), "noon");
}

}  // namespace
}  // namespace stokes
