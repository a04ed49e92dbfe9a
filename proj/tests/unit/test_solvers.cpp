// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The lsmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lsmimo/solvers.hpp"
#include "test_util.hpp"

namespace lsmimo {
namespace {

using test::cd;

SystemModel desk_system(Scenario s, std::uint64_t seed) {
  const NetworkConfig cfg = NetworkConfig::desk();
  const auto inst = generate_instance(cfg, s, seed);
  return make_system(inst, sample_channels(inst, cfg.n_sim, seed + 1000));
}

SystemModel scalar_system(std::initializer_list<double> channel, double budget = 100.0) {
  const auto inst = test::make_instance(Eigen::MatrixXd::Ones(1, 1), 1, {{0}}, Scenario::kCentralized, budget);
  std::vector<Eigen::MatrixXcd> r;
  for (double h : channel) r.push_back(Eigen::MatrixXcd::Constant(1, 1, h));
  return make_system(inst, test::make_batch(std::move(r), 1));
}

Eigen::VectorXd uniform_gamma(Index k, double rate) {
  return Eigen::VectorXd::Constant(k, sinr_target(rate));
}

TEST(SinrTarget, RateConversion) {
  EXPECT_DOUBLE_EQ(sinr_target(1.0), 1.0);
  EXPECT_NEAR(sinr_target(2.5), 4.656854249492381, 1e-12);
}

// Perfect CSI, one user: SINR(p) = p |h|^2, so p* solves p |h|^2 = gamma.
TEST(SumPower, ScalarMatchesBisection) {
  const SystemModel sys = scalar_system({1.0});
  const auto res = solve_sum_power(sys, Eigen::VectorXd::Ones(1));
  ASSERT_TRUE(res.trace.converged());
  double lo = 0.0;
  double hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * 1.0 < 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(res.p_star[0], 0.5 * (lo + hi), 1e-7);
}

TEST(SumPower, CertificateTightnessAndInitialization) {
  const SystemModel sys = desk_system(Scenario::kCentralized, 1);
  const Eigen::VectorXd gammas = uniform_gamma(sys.users(), 2.0);
  const auto res = solve_sum_power(sys, gammas);
  ASSERT_TRUE(res.trace.converged());
  const Eigen::VectorXd image = joint_mapping(sys, gammas)(res.p_star);
  EXPECT_LE((image - res.p_star).norm(), 1e-8 * res.p_star.norm());
  for (Index k = 0; k < sys.users(); ++k) EXPECT_NEAR(res.sinr[k] / gammas[k], 1.0, 1e-6);

  SolverOptions low;
  low.p0 = Eigen::VectorXd::Constant(sys.users(), 0.01 * sys.budget());
  const auto other = solve_sum_power(sys, gammas, low);
  ASSERT_TRUE(other.trace.converged());
  EXPECT_LE((other.p_star - res.p_star).norm(), 1e-6 * res.p_star.norm());
}

TEST(SumPower, LowerTargetsNeedLessPower) {
  const SystemModel sys = desk_system(Scenario::kDistributed, 2);
  const Eigen::VectorXd gammas = uniform_gamma(sys.users(), 1.5);
  const auto full = solve_sum_power(sys, gammas);
  const auto scaled = solve_sum_power(sys, 0.6 * gammas);
  ASSERT_TRUE(full.trace.converged() && scaled.trace.converged());
  for (Index k = 0; k < sys.users(); ++k) EXPECT_LE(scaled.p_star[k], full.p_star[k] * (1.0 + 1e-7));
}

TEST(SumPower, SmallCellsDivergeAtFullScale) {
  const NetworkConfig cfg = NetworkConfig::paper();
  const auto inst = generate_instance(cfg, Scenario::kSmallCells, 1);
  const SystemModel sys = make_system(inst, sample_channels(inst, cfg.n_sim, 2));
  const auto res = solve_sum_power(sys, uniform_gamma(sys.users(), 2.5));
  EXPECT_EQ(res.trace.status, IterationStatus::kDiverged);
  EXPECT_FALSE(res.feasible());
}

TEST(SumPower, RejectsBadTargets) {
  const SystemModel sys = scalar_system({1.0});
  EXPECT_THROW(solve_sum_power(sys, Eigen::VectorXd::Zero(1)), std::invalid_argument);
  EXPECT_THROW(solve_sum_power(sys, Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST(MaxMin, SingleUserTakesFullPower) {
  const SystemModel sys = scalar_system({0.5, 2.0}, 30.0);
  const auto res = solve_max_min(sys, Eigen::VectorXd::Ones(1), sys.budget());
  ASSERT_TRUE(res.trace.converged());
  EXPECT_NEAR(res.p_star[0], 30.0, 1e-12);
  const auto mmse = centralized_mmse(sys.csi, sys.instance, Eigen::VectorXd::Constant(1, 30.0));
  for (std::size_t n = 0; n < sys.batch.size(); ++n) {
    EXPECT_LE((res.beams.v[n] - mmse.beams.v[n]).norm(), 1e-12);
  }
}

// Every realization appears together with its image under the joint swap of
// APs and users, so the empirical problem is symmetric.
SystemModel mirrored_system(Scenario s) {
  Eigen::MatrixXd gain(2, 2);
  gain << 1.0, 0.2, 0.2, 1.0;
  const std::vector<std::vector<Index>> clusters =
      s == Scenario::kSmallCells ? std::vector<std::vector<Index>>{{0}, {1}}
                                 : std::vector<std::vector<Index>>{{0, 1}, {1, 0}};
  auto inst = test::make_instance(gain, 1, clusters, s, 10.0);
  for (auto& c : inst.clusters) std::sort(c.begin(), c.end());
  std::mt19937_64 rng(77);
  std::vector<Eigen::MatrixXcd> r;
  Eigen::Matrix2cd swap;
  swap << 0, 1, 1, 0;
  for (int n = 0; n < 10; ++n) {
    Eigen::MatrixXcd h = test::random_complex(2, 2, rng);
    h = h.cwiseProduct(gain.cwiseSqrt().cast<cd>());
    r.push_back(h);
    r.push_back(swap * h * swap);
  }
  return make_system(inst, test::make_batch(std::move(r), 1));
}

TEST(MaxMin, SymmetricUsersGetEqualPower) {
  for (Scenario s : {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized}) {
    const SystemModel sys = mirrored_system(s);
    const auto res = solve_max_min(sys, Eigen::VectorXd::Ones(2), sys.budget());
    ASSERT_TRUE(res.trace.converged()) << to_string(s);
    EXPECT_NEAR(res.p_star[0] / res.p_star[1], 1.0, 1e-7) << to_string(s);
  }
}

TEST(MaxMin, BalancedCertificateOnDeskInstance) {
  for (Scenario s : {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized}) {
    const SystemModel sys = desk_system(s, 3);
    const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(sys.users());
    const double budget = sys.budget();
    const auto res = solve_max_min(sys, gammas, budget);
    ASSERT_TRUE(res.trace.converged()) << to_string(s);
    const Eigen::VectorXd t = joint_mapping(sys, gammas)(res.p_star);
    const Eigen::VectorXd normalized = budget * t / t.maxCoeff();
    EXPECT_LE((normalized - res.p_star).cwiseAbs().maxCoeff() / budget, 1e-8) << to_string(s);
    EXPECT_NEAR(res.p_star.maxCoeff(), budget, 1e-9 * budget);
    const double spread = (res.sinr.maxCoeff() - res.sinr.minCoeff()) / res.sinr.minCoeff();
    EXPECT_LE(spread, 1e-5) << to_string(s);
  }
}

TEST(MaxMin, JointMappingSatisfiesSiAxioms) {
  for (Scenario s : {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized}) {
    const auto cfg = test::tiny_config(5, 4, 2, 2, 10);
    const auto inst = generate_instance(cfg, s, 4);
    const SystemModel sys = make_system(inst, sample_channels(inst, cfg.n_sim, 5));
    const SiReport report = check_si_axioms(joint_mapping(sys, uniform_gamma(5, 2.0)), 200, 6);
    EXPECT_TRUE(report.ok()) << to_string(s) << ": " << report.violations.size();
  }
}

TEST(PowerOnly, FrozenOptimalDesignReproducesJoint) {
  const SystemModel sys = desk_system(Scenario::kDistributed, 5);
  const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(sys.users());
  const auto joint = solve_max_min(sys, gammas, sys.budget());
  const DesignOutcome frozen = optimal_beamformers(sys.csi, sys.instance, joint.p_star);
  const auto only = solve_power_only_maxmin(sys, frozen, gammas, sys.budget());
  ASSERT_TRUE(only.trace.converged());
  EXPECT_LE((only.p_star - joint.p_star).norm(), 1e-6 * joint.p_star.norm());
  EXPECT_EQ(only.method, Method::kPowerOnly);
}

TEST(PowerOnly, NeverBeatsJoint) {
  for (Scenario s : {Scenario::kDistributed, Scenario::kCentralized}) {
    for (std::uint64_t seed = 10; seed < 13; ++seed) {
      const SystemModel sys = desk_system(s, seed);
      const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(sys.users());
      const auto joint = solve_max_min(sys, gammas, sys.budget());
      const DesignOutcome fixed =
          optimal_beamformers(sys.csi, sys.instance, Eigen::VectorXd::Constant(sys.users(), sys.budget()));
      const auto only = solve_power_only_maxmin(sys, fixed, gammas, sys.budget());
      EXPECT_LE(only.min_rate(), joint.min_rate() + 1e-9) << to_string(s) << " seed " << seed;
    }
  }
}

TEST(PowerOnly, SingleUserTakesFullPower) {
  const SystemModel sys = scalar_system({1.0, 0.3}, 20.0);
  const DesignOutcome fixed = mrc(sys.csi, sys.instance);
  const auto res = solve_power_only_maxmin(sys, fixed, Eigen::VectorXd::Ones(1), sys.budget());
  EXPECT_NEAR(res.p_star[0], 20.0, 1e-12);
}

TEST(ShortTerm, SingleRealizationMatchesLongTerm) {
  const auto cfg = test::tiny_config(4, 4, 2, 2, 1);
  const auto inst = generate_instance(cfg, Scenario::kCentralized, 6);
  const SystemModel sys = make_system(inst, sample_channels(inst, 1, 7));
  const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(4);
  const auto st = solve_short_term_maxmin(sys, gammas, sys.budget());
  const auto lt = solve_max_min(sys, gammas, sys.budget());
  ASSERT_EQ(st.powers.size(), 1u);
  EXPECT_LE((st.powers[0] - lt.p_star).norm(), 1e-12 * lt.p_star.norm());
  const auto coherent = coherent_rates(sys.batch, lt.beams, lt.p_star);
  EXPECT_LE((st.rates - coherent).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ShortTerm, SingleUserUsesFullPowerMmse) {
  const SystemModel sys = scalar_system({1.0, 0.2, 2.0}, 10.0);
  const auto st = solve_short_term_maxmin(sys, Eigen::VectorXd::Ones(1), sys.budget());
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_NEAR(st.powers[n][0], 10.0, 1e-12);
    const double h = sys.batch.realizations[n](0, 0).real();
    EXPECT_NEAR(std::abs(st.beams.v[n](0, 0) - std::sqrt(10.0) * h / (10.0 * h * h + 1.0)), 0.0, 1e-12);
  }
}

// Two orthogonal users; user 1 fades in the first realization and user 2 in
// the second. Balancing each realization separately drags both users down to
// the faded level, while long-term powers keep the good realization.
TEST(ShortTerm, DeepFadesFavourLongTermDesign) {
  const double eps = 0.1;
  const auto inst = test::make_instance(Eigen::MatrixXd::Ones(1, 2), 2, {{0}, {0}}, Scenario::kCentralized, 100.0);
  Eigen::MatrixXcd first = Eigen::MatrixXcd::Zero(2, 2);
  first(0, 0) = eps;
  first(1, 1) = 1.0;
  Eigen::MatrixXcd second = Eigen::MatrixXcd::Zero(2, 2);
  second(0, 0) = 1.0;
  second(1, 1) = eps;
  const SystemModel sys = make_system(inst, test::make_batch({first, second}, 2));
  const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(2);
  const auto st = solve_short_term_maxmin(sys, gammas, sys.budget());
  const auto lt = solve_max_min(sys, gammas, sys.budget());
  const double long_term = coherent_rates(sys.batch, lt.beams, lt.p_star).minCoeff();
  EXPECT_NEAR(st.min_rate(), std::log2(1.0 + 100.0 * eps * eps), 1e-6);
  EXPECT_NEAR(long_term, 0.5 * (std::log2(1.0 + 100.0 * eps * eps) + std::log2(101.0)), 1e-6);
  EXPECT_LT(st.min_rate(), long_term);
}

TEST(ShortTerm, RequiresCentralizedCsi) {
  const SystemModel sys = desk_system(Scenario::kDistributed, 8);
  EXPECT_THROW(solve_short_term_maxmin(sys, Eigen::VectorXd::Ones(sys.users()), sys.budget()),
               std::invalid_argument);
}

TEST(Lsfd, SingleApEqualsPowerOnlyMrc) {
  std::mt19937_64 rng(9);
  const auto inst = test::make_instance(Eigen::MatrixXd::Ones(1, 3), 3, {{0}, {0}, {0}}, Scenario::kDistributed);
  std::vector<Eigen::MatrixXcd> r;
  for (int n = 0; n < 15; ++n) r.push_back(test::random_complex(3, 3, rng));
  const SystemModel sys = make_system(inst, test::make_batch(std::move(r), 3));
  const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(3);
  const auto lsfd = solve_lsfd_maxmin(sys, gammas, sys.budget());
  const auto plain = solve_power_only_maxmin(sys, mrc(sys.csi, inst), gammas, sys.budget());
  EXPECT_LE((lsfd.result.p_star - plain.p_star).norm(), 1e-6 * plain.p_star.norm());
  EXPECT_NEAR(lsfd.result.min_rate(), plain.min_rate(), 1e-9);
}

TEST(Lsfd, BetweenMrcAndTeamMmse) {
  for (std::uint64_t seed = 20; seed < 23; ++seed) {
    const SystemModel sys = desk_system(Scenario::kDistributed, seed);
    const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(sys.users());
    const auto lsfd = solve_lsfd_maxmin(sys, gammas, sys.budget());
    const auto plain = solve_power_only_maxmin(sys, mrc(sys.csi, sys.instance), gammas, sys.budget());
    const auto team = solve_max_min(sys, gammas, sys.budget());
    EXPECT_GE(lsfd.result.min_rate(), plain.min_rate() - 1e-9) << "seed " << seed;
    EXPECT_LE(lsfd.result.min_rate(), team.min_rate() + 1e-9) << "seed " << seed;
    for (std::size_t i = 1; i < lsfd.min_rate_history.size(); ++i) {
      EXPECT_GE(lsfd.min_rate_history[i], lsfd.min_rate_history[i - 1] - 1e-9);
    }
    EXPECT_EQ(lsfd.result.method, Method::kMrcLsfd);
  }
}

TEST(Lsfd, SingleLoopVariant) {
  const SystemModel sys = desk_system(Scenario::kDistributed, 24);
  const Eigen::VectorXd gammas = Eigen::VectorXd::Ones(sys.users());
  LsfdOptions opts;
  opts.single_loop = true;
  const auto single = solve_lsfd_maxmin(sys, gammas, sys.budget(), opts);
  const auto plain = solve_power_only_maxmin(sys, mrc(sys.csi, sys.instance), gammas, sys.budget());
  EXPECT_TRUE(single.result.trace.converged());
  EXPECT_GE(single.result.min_rate(), plain.min_rate() - 1e-9);
}

TEST(Lsfd, RequiresDistributedCsi) {
  const SystemModel sys = desk_system(Scenario::kCentralized, 8);
  EXPECT_THROW(solve_lsfd_maxmin(sys, Eigen::VectorXd::Ones(sys.users()), sys.budget()),
               std::invalid_argument);
}

}  // namespace
}  // namespace lsmimo
