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

#include <algorithm>
#include <cmath>

#include "stokes/tomography.hpp"
#include "test_support.hpp"

namespace stokes {
namespace {

BlockDiagonalState single(ManifoldState s) { return BlockDiagonalState::single(std::move(s)); }

ManifoldState fock(int nh, int nv) {
  CVector v = CVector::Zero(nh + nv + 1);
  v[nv] = 1.0;
  return ManifoldState::pure(nh + nv, v);
}

std::vector<double> exact_values(const ManifoldState& st, std::span<const Direction> dirs, int r) {
  std::vector<double> out;
  for (const auto& n : dirs) out.push_back(testing::brute_profile(st, r, n));
  return out;
}

TEST(OutcomeDistribution, SpecExamples) {
  const auto up = outcome_distribution(fock(1, 0), Direction::axis(3));
  EXPECT_NEAR(up[0], 1.0, 1e-15);
  const auto noon2 = outcome_distribution(noon(2), Direction::axis(1));
  EXPECT_NEAR(noon2[0], 0.5, 1e-14);
  EXPECT_NEAR(noon2[1], 0.0, 1e-14);
  EXPECT_NEAR(noon2[2], 0.5, 1e-14);
  const auto twin = outcome_distribution(twin_fock(1), Direction::axis(3));
  EXPECT_NEAR(twin[1], 1.0, 1e-15);
}

TEST(OutcomeDistribution, MomentsMatchTraces) {
  testing::Rng rng(40);
  for (int N = 1; N <= 5; ++N) {
    const auto st = testing::random_state(N, rng);
    const Direction n = testing::random_direction(rng);
    const auto p = outcome_distribution(st, n);
    for (int r = 1; r <= 4; ++r) {
      double m = 0.0;
      for (int k = 0; k <= N; ++k) m += p[k] * std::pow(N - 2 * k, r);
      EXPECT_NEAR(m, testing::brute_profile(st, r, n), 1e-10);
    }
  }
}

TEST(Sampling, CounterRngIsPartitionIndependent) {
  EXPECT_EQ(counter_uniform(7, 123), counter_uniform(7, 123));
  EXPECT_NE(counter_uniform(7, 123), counter_uniform(8, 123));
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = counter_uniform(3, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}

TEST(Sampling, DeterministicRecords) {
  const auto st = single(noon(2));
  const MeasurementSetting s{Direction::axis(1), 5000, 99};
  const auto a = simulate_measurement(st, s);
  const auto b = simulate_measurement(st, s);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.total(), 5000u);
  EXPECT_EQ(a.counts.count({2, 0}), 0u);
  const auto one = simulate_measurement(single(fock(1, 0)), {Direction::axis(3), 1, 0});
  ASSERT_EQ(one.counts.size(), 1u);
  EXPECT_EQ(one.counts.begin()->first, (std::pair<int, int>{1, 1}));
  EXPECT_THROW(simulate_measurement(st, {Direction::axis(1), 0, 0}), std::invalid_argument);
}

TEST(EstimateMoments, NoonSecondMomentAndOrderZero) {
  const auto rec = simulate_measurement(single(noon(2)), {Direction::axis(1), 100000, 5});
  const std::vector<int> orders{0, 1, 2};
  const auto est = estimate_moments(rec, orders);
  EXPECT_DOUBLE_EQ(est.moment(2, 0)->value, 1.0);
  const auto m2 = *est.moment(2, 2);
  EXPECT_LE(std::abs(m2.value - 4.0), 3 * m2.std_error + 1e-12);
  EXPECT_LE(std::abs(est.moment(2, 1)->value), 5 * est.moment(2, 1)->std_error);
  EXPECT_DOUBLE_EQ(*est.probability(2), 1.0);
  EXPECT_FALSE(est.moment(1, 1).has_value());
  EXPECT_THROW(estimate_moments(MeasurementRecord{{Direction::axis(3)}, {}}, orders), std::invalid_argument);
}

TEST(EstimateMoments, ConvergesWithinStandardErrors) {
  testing::Rng rng(41);
  const auto st = testing::random_block_state(3, rng);
  const Direction n = testing::random_direction(rng);
  const std::vector<int> orders{1, 2, 3};
  const auto est = estimate_moments(simulate_measurement(st, {n, 1000000, 17}), orders);
  for (const auto& b : st.blocks()) {
    if (b.N == 0) continue;
    for (int r : orders) {
      const auto m = *est.moment(b.N, r);
      EXPECT_LE(std::abs(m.value - testing::brute_profile(b.state, r, n)), 5 * m.std_error + 1e-12);
    }
    EXPECT_NEAR(*est.probability(b.N), b.probability, 5 * std::sqrt(b.probability / 1e6));
  }
}

TEST(EstimateMoments, StatisticalConsistencyOverSeeds) {
  testing::Rng rng(42);
  const auto truth = testing::random_state(3, rng);
  const auto st = single(truth);
  const Direction n = testing::random_direction(rng);
  const std::vector<int> orders{1, 2, 3};
  int inside = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto est = estimate_moments(simulate_measurement(st, {n, 100000, seed}), orders);
    for (int r : orders) {
      const auto m = *est.moment(3, r);
      inside += std::abs(m.value - testing::brute_profile(truth, r, n)) <= 5 * m.std_error;
      ++total;
    }
  }
  EXPECT_GE(inside, 0.99 * total);
}

TEST(EstimateMoments, TwinFockOddOrdersVanish) {
  const std::vector<int> orders{1, 3};
  const auto est = estimate_moments(simulate_measurement(single(twin_fock(2)), {Direction::axis(1), 200000, 3}), orders);
  for (int r : orders) EXPECT_LE(std::abs(est.moment(4, r)->value), 5 * est.moment(4, r)->std_error + 1e-12);
}

TEST(Directions, NamedSets) {
  const auto first = choose_directions(1);
  EXPECT_EQ(first.primary.kind, DirectionSetKind::Axes);
  EXPECT_NEAR(first.primary.condition_number, 1.0, 1e-12);
  const auto ico = icosahedral_directions();
  const double den = std::sqrt(10 + 2 * std::sqrt(5.0));
  EXPECT_NEAR(ico[4][0], (1 + std::sqrt(5.0)) / den, 1e-15);
  EXPECT_NEAR(ico[4].vector().norm(), 1.0, 1e-15);
  const auto second = choose_directions(2);
  EXPECT_EQ(second.primary.rank, 5);
  EXPECT_FALSE(second.fallback.has_value());
  double min_angle = M_PI;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      min_angle = std::min(min_angle, std::acos(std::abs(ico[i].vector().dot(ico[j].vector()))));
    }
  }
  EXPECT_NEAR(min_angle, std::acos(1 / std::sqrt(5.0)), 1e-12);
}

TEST(Directions, ThirdOrderSymmetricSetIsRankFour) {
  const auto third = choose_directions(3);
  EXPECT_EQ(third.primary.kind, DirectionSetKind::SymmetricSevenLine);
  EXPECT_TRUE(third.primary.rank_deficient());
  const auto sv = design_singular_values(third.primary.directions, 3);
  EXPECT_EQ(third.primary.rank, 4);
  EXPECT_LT(sv[4] / sv[0], 1e-12);
  ASSERT_TRUE(third.fallback.has_value());
  EXPECT_EQ(third.fallback->rank, 7);
  EXPECT_LT(third.fallback->condition_number, 100.0);
  EXPECT_EQ(&third.working(), &*third.fallback);
  EXPECT_NE(third.primary.tag().find("RANK-DEFICIENT"), std::string::npos);
}

TEST(Directions, GenericHigherOrders) {
  for (int r = 4; r <= 5; ++r) {
    const auto c = choose_directions(r);
    EXPECT_EQ(c.primary.kind, DirectionSetKind::Generic);
    EXPECT_EQ(static_cast<int>(c.primary.directions.size()), 2 * r + 1);
    EXPECT_EQ(c.primary.rank, 2 * r + 1);
    EXPECT_LT(c.primary.condition_number, 100.0);
  }
  EXPECT_THROW(choose_directions(0), std::invalid_argument);
}

TEST(SecondOrder, ClosedFormOnFockState) {
  const auto ico = icosahedral_directions();
  std::array<double, 5> m;
  for (int i = 0; i < 5; ++i) m[i] = testing::brute_profile(fock(2, 0), 2, ico[i]);
  const auto c = closed_form_second_order(m, 2);
  EXPECT_NEAR(c(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(c(2, 0), 2.0, 1e-12);
  EXPECT_NEAR(c(0, 2), 2.0, 1e-12);
  EXPECT_NEAR(c(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(c(1, 1), 0.0, 1e-12);
  const auto vac = closed_form_second_order({0, 0, 0, 0, 0}, 0);
  for (double v : vac.values()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(SecondOrder, ClosedFormAndSolverAgreeWithTensorPath) {
  testing::Rng rng(43);
  const auto ico = icosahedral_directions();
  for (int N = 1; N <= 4; ++N) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto st = testing::random_state(N, rng);
      const auto exact = moment_components(tensor(st, 2));
      const auto values = exact_values(st, ico, 2);
      std::array<double, 5> m;
      std::copy(values.begin(), values.end(), m.begin());
      EXPECT_LT(closed_form_second_order(m, N).max_abs_difference(exact), 1e-10);
      const auto sol = solve_moment_components(ico, values, N, 2, std::nullopt);
      EXPECT_LT(sol.components.max_abs_difference(exact), 1e-10);
      EXPECT_NEAR(sol.condition_number, std::sqrt(6.0), 1e-9);
    }
  }
}

TEST(Solver, FirstOrderAxesReturnMeasuredValues) {
  const std::vector<Direction> axes{Direction::axis(1), Direction::axis(2), Direction::axis(3)};
  const std::vector<double> measured{0.3, -0.2, 0.5};
  const auto sol = solve_moment_components(axes, measured, 1, 1, std::nullopt);
  EXPECT_NEAR(sol.components(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(sol.components(0, 1), -0.2, 1e-15);
  EXPECT_NEAR(sol.components(0, 0), 0.5, 1e-15);
}

TEST(Solver, HigherOrdersFromLowerComponents) {
  testing::Rng rng(44);
  for (int N = 2; N <= 5; ++N) {
    const auto st = testing::random_state(N, rng);
    for (int r = 3; r <= 5; ++r) {
      const auto dirs = choose_directions(r).working().directions;
      const auto sol = solve_moment_components(dirs, exact_values(st, dirs, r), N, r,
                                               moment_components(tensor(st, r - 2)));
      EXPECT_LT(sol.components.max_abs_difference(moment_components(tensor(st, r))), 1e-8 * std::pow(N, r))
          << "N=" << N << " r=" << r;
      EXPECT_LT(sol.residual, 1e-8 * std::pow(N, r));
    }
  }
}

TEST(Solver, SymmetricThirdOrderSetFailsWithRankReport) {
  testing::Rng rng(45);
  const auto st = testing::random_state(3, rng);
  const auto dirs = choose_directions(3).primary.directions;
  try {
    solve_moment_components(dirs, exact_values(st, dirs, 3), 3, 3, moment_components(tensor(st, 1)));
    FAIL() << "expected RankDeficientDesign";
  } catch (const RankDeficientDesign& e) {
    EXPECT_EQ(e.rank(), 4);
    EXPECT_EQ(e.order(), 3);
    EXPECT_NE(std::string(e.what()).find("rank 4"), std::string::npos);
    ASSERT_EQ(e.null_space().size(), 3u);
    for (const auto& v : e.null_space()) {
      const MomentComponents null(3, std::nullopt, v);
      for (const auto& n : dirs) EXPECT_NEAR(profile_eval(null, n), 0.0, 1e-9);
    }
  }
}

TEST(Solver, EquivalentLines) {
  testing::Rng rng(46);
  const auto st = testing::random_state(3, rng);
  for (int r = 1; r <= 3; ++r) {
    auto dirs = choose_directions(r).working().directions;
    std::optional<MomentComponents> lower;
    if (r == 3) lower = moment_components(tensor(st, 1));
    const auto a = solve_moment_components(dirs, exact_values(st, dirs, r), 3, r, lower);
    for (auto& d : dirs) d = -d;
    const auto b = solve_moment_components(dirs, exact_values(st, dirs, r), 3, r, lower);
    EXPECT_LT(a.components.max_abs_difference(b.components), 1e-10);
  }
}

TEST(Assembly, AllOrdersFromComponents) {
  testing::Rng rng(47);
  for (int N = 1; N <= 4; ++N) {
    const auto st = testing::random_state(N, rng);
    std::vector<MomentComponents> comps;
    for (int r = 1; r <= N; ++r) comps.push_back(moment_components(tensor(st, r)));
    const auto tensors = assemble_all_tensors(comps, N);
    ASSERT_EQ(static_cast<int>(tensors.size()), N);
    for (int r = 1; r <= N; ++r) EXPECT_LT(tensors[r - 1].max_abs_difference(tensor(st, r)), 1e-9);
  }
}

TEST(Reconstruction, SinglePhotonParameters) {
  const double pi0 = 0.8, re = 0.1, im = -0.25;
  const auto truth = single_photon_density(pi0, re, im);
  const auto rec = reconstruct_density(std::vector<PolarizationTensor>{tensor(truth, 1)}, 1);
  const CMatrix& rho = rec.state.density();
  const auto t = tensor(truth, 1);
  EXPECT_NEAR(rho(0, 0).real(), (1 + t({3}).real()) / 2, 1e-12);
  EXPECT_NEAR(rho(0, 1).real(), t({1}).real() / 2, 1e-12);
  EXPECT_NEAR(rho(0, 1).imag(), -t({2}).real() / 2, 1e-12);
  EXPECT_NEAR(rho(0, 1).imag(), im, 1e-12);
}

TEST(Reconstruction, MaximallyMixedAndRandom) {
  for (int N = 1; N <= 4; ++N) {
    const CMatrix mixed = CMatrix::Identity(N + 1, N + 1) / double(N + 1);
    const auto st = ManifoldState::mixed(N, mixed);
    std::vector<PolarizationTensor> ts;
    for (int r = 1; r <= N; ++r) {
      ts.push_back(tensor(st, r));
      if (r == 1) for (const auto& z : ts.back().elements()) EXPECT_LT(std::abs(z), 1e-12);
    }
    EXPECT_LT(testing::max_abs(reconstruct_density(ts, N).state.density() - mixed), 1e-10);
  }
  testing::Rng rng(48);
  const auto st = testing::random_state(2, rng);
  const std::vector<PolarizationTensor> ts{tensor(st, 1), tensor(st, 2)};
  const auto rec = reconstruct_density(ts, 2);
  EXPECT_LT(trace_distance(rec.state.density(), st.density()), 1e-8);
  EXPECT_LT(rec.projection_distance, 1e-10);
}

TEST(Projection, ClipsNegativeEigenvalues) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.2;
  m(1, 1) = -0.2;
  const CMatrix p = project_to_density(m);
  EXPECT_NEAR(p(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(m, p), 0.2, 1e-12);
}

TEST(Pipeline, ExactMomentsRoundTrip) {
  std::vector<BlockDiagonalState> states{single(noon(1)), single(noon(2)), single(noon(3)),
                                         single(su2_coherent(3, 1.1, -0.4)), single(twin_fock(1)),
                                         single(transformed_twin_fock(1, {0.3, 0.9, 0.0})),
                                         single(unpolarized_two_photon(0.5, 0.2))};
  testing::Rng rng(49);
  states.push_back(testing::random_block_state(3, rng));
  for (const auto& st : states) {
    const auto res = run_tomography(st, {});
    ASSERT_EQ(res.manifolds.size(), st.blocks().size());
    for (const auto& m : res.manifolds) {
      EXPECT_LT(trace_distance(m.density->state.density(), st.find(m.N)->density()), 1e-7);
      EXPECT_NEAR(m.probability, st.probability(m.N), 1e-15);
    }
  }
}

TEST(Pipeline, NoisyDataStaysPhysicalAndDeterministic) {
  const auto st = single(noon(3));
  TomographyOptions opts;
  opts.shots = 20000;
  opts.seed = 7;
  const auto a = run_tomography(st, opts);
  const auto b = run_tomography(st, opts);
  ASSERT_EQ(a.manifolds.size(), 1u);
  const CMatrix& rho = a.manifolds[0].density->state.density();
  EXPECT_EQ(rho, b.manifolds[0].density->state.density());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-15);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
  EXPECT_LT(trace_distance(rho, noon(3).density()), 0.2);
}

TEST(Pipeline, SymmetricThirdOrderIsRejected) {
  TomographyOptions opts;
  opts.symmetric_third_order = true;
  EXPECT_THROW(run_tomography(single(noon(3)), opts), RankDeficientDesign);
  EXPECT_NO_THROW(run_tomography(single(noon(2)), opts));
}

TEST(NonResolved, SinglePhotonInput) {
  const auto r = non_resolved_pipeline({1.0, 1.0, 0.4, 1.0, 0.4});
  EXPECT_DOUBLE_EQ(r.p1, 1.0);
  EXPECT_DOUBLE_EQ(r.p2, 0.0);
  EXPECT_NEAR(*r.first_order_1, 0.4, 1e-15);
  EXPECT_FALSE(r.first_order_2.has_value());
  EXPECT_FALSE(r.second_order_2.has_value());
}

TEST(NonResolved, MixtureRoundTrip) {
  testing::Rng rng(50);
  const auto one = testing::random_state(1, rng);
  const auto two = testing::random_state(2, rng);
  const BlockDiagonalState st(std::vector<Block>{{1, 0.5, one}, {2, 0.5, two}});
  for (int i = 0; i < 10; ++i) {
    const Direction n = testing::random_direction(rng);
    NonResolvedInput in{st.mean_photons(), st.mean_photons_squared(), testing::brute_profile(st, 1, n),
                        testing::brute_profile(st, 2, n), testing::brute_profile(st, 3, n)};
    const auto r = non_resolved_pipeline(in);
    EXPECT_NEAR(r.p0, 0.0, 1e-12);
    EXPECT_NEAR(r.p1, 0.5, 1e-12);
    EXPECT_NEAR(r.p2, 0.5, 1e-12);
    EXPECT_NEAR(*r.first_order_1, testing::brute_profile(one, 1, n), 1e-9);
    EXPECT_NEAR(*r.first_order_2, testing::brute_profile(two, 1, n), 1e-9);
    EXPECT_NEAR(*r.second_order_2, testing::brute_profile(two, 2, n), 1e-9);
  }
}

TEST(NonResolved, AveragedSecondOrderRedundancy) {
  testing::Rng rng(51);
  const BlockDiagonalState st(std::vector<Block>{{0, 0.2, twin_fock(0)}, {1, 0.3, testing::random_state(1, rng)},
                                                 {2, 0.5, testing::random_state(2, rng)}});
  const auto exact = averaged_components(st, 2);
  const double casimir = averaged_casimir(st.mean_photons(), st.mean_photons_squared());
  EXPECT_NEAR(exact(2, 0) + exact(0, 2) + exact(0, 0), casimir, 1e-12);
  const auto ico = icosahedral_directions();
  std::array<double, 5> m;
  for (int i = 0; i < 5; ++i) m[i] = testing::brute_profile(st, 2, ico[i]);
  EXPECT_LT(closed_form_second_order_casimir(m, casimir).max_abs_difference(exact), 1e-10);
}

TEST(NonResolved, RejectsUnsupportedPhotonNumbers) {
  // |3,0>: <S0> = 3, <S0^2> = 9 gives p1 = -3.
  EXPECT_THROW(non_resolved_pipeline({3.0, 9.0, 3.0, 9.0, 27.0}), std::domain_error);
}

}  // namespace
}  // namespace stokes
