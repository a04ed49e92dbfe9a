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
#include <stdexcept>

#include <gtest/gtest.h>

#include "lsmimo/network.hpp"
#include "test_util.hpp"

namespace lsmimo {
namespace {

TEST(NetworkConfig, NoisePowerAndBudget) {
  const NetworkConfig cfg;
  // -174 dBm/Hz + 10 log10(20 MHz) + 7 dB.
  EXPECT_NEAR(cfg.noise_power_dbm(), -174.0 + 10.0 * std::log10(20e6) + 7.0, 1e-12);
  EXPECT_NEAR(cfg.noise_power_dbm(), -93.99, 5e-3);
  EXPECT_DOUBLE_EQ(cfg.power_budget(), 100.0);
}

TEST(NetworkConfig, DeskProfile) {
  const NetworkConfig cfg = NetworkConfig::desk();
  EXPECT_EQ(cfg.users, 16);
  EXPECT_EQ(cfg.aps, 9);
  EXPECT_EQ(cfg.antennas, 4);
  EXPECT_EQ(cfg.cluster_size, 3);
  EXPECT_EQ(cfg.n_sim, 50);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(NetworkConfig, ValidationRejectsBadFields) {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.cluster_size = cfg.aps + 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig::desk();
  cfg.users = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig::desk();
  cfg.shadow_corr_dist = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Pathloss, HundredMetres) {
  const NetworkConfig cfg;
  const double db = large_scale_gain_db(cfg, 100.0);
  EXPECT_NEAR(db, -36.7 * 2.0 - 30.5 + 93.99, 5e-3);
  EXPECT_NEAR(db, -9.91, 5e-3);
  EXPECT_NEAR(std::pow(10.0, db / 10.0), 0.102, 1e-3);
}

TEST(Scenario, NamesRoundTrip) {
  for (Scenario s : {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized}) {
    EXPECT_EQ(parse_scenario(to_string(s)), s);
  }
  EXPECT_THROW(parse_scenario("macro"), std::invalid_argument);
}

TEST(Clusters, ArgmaxPerColumn) {
  Eigen::MatrixXd gain(2, 2);
  gain << 2, 1, 1, 2;
  const auto clusters = assign_clusters(gain, 1);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0], std::vector<Index>{0});
  EXPECT_EQ(clusters[1], std::vector<Index>{1});
}

TEST(Clusters, TiesGoToLowestIndexAndNest) {
  Eigen::MatrixXd gain(3, 1);
  gain << 1.0, 5.0, 1.0;
  EXPECT_EQ(assign_clusters(gain, 2)[0], (std::vector<Index>{1, 0}));
  EXPECT_THROW(assign_clusters(gain, 4), std::invalid_argument);

  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kDistributed, 3);
  const auto q2 = assign_clusters(inst.gain, 2);
  const auto q3 = assign_clusters(inst.gain, 3);
  for (std::size_t k = 0; k < q2.size(); ++k) {
    EXPECT_EQ(q2[k][0], q3[k][0]);
    EXPECT_EQ(q2[k][1], q3[k][1]);
    for (std::size_t i = 1; i < q3[k].size(); ++i) {
      EXPECT_GE(inst.gain(q3[k][i - 1], static_cast<Index>(k)),
                inst.gain(q3[k][i], static_cast<Index>(k)));
    }
  }
}

TEST(Instance, NonSquareApCountRejected) {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.aps = 8;
  EXPECT_THROW(generate_instance(cfg, Scenario::kCentralized, 1), std::invalid_argument);
}

TEST(Instance, DeterministicWithoutShadowing) {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.shadow_std_db = 0.0;
  const auto a = generate_instance(cfg, Scenario::kCentralized, 5);
  const auto b = generate_instance(cfg, Scenario::kCentralized, 5);
  EXPECT_EQ(a.gain, b.gain);
  const auto c = generate_instance(cfg, Scenario::kCentralized, 6);
  EXPECT_NE(a.gain, c.gain);
}

TEST(Instance, GeometryDoesNotDependOnScenario) {
  const auto cfg = NetworkConfig::desk();
  const auto a = generate_instance(cfg, Scenario::kSmallCells, 9);
  const auto b = generate_instance(cfg, Scenario::kCentralized, 9);
  EXPECT_EQ(a.gain, b.gain);
  for (const auto& c : a.clusters) EXPECT_EQ(c.size(), 1u);
  for (const auto& c : b.clusters) EXPECT_EQ(c.size(), 3u);
}

TEST(Instance, GridIsCentredInCells) {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.aps = 4;
  cfg.area_side = 100.0;
  cfg.cluster_size = 2;
  const auto inst = generate_instance(cfg, Scenario::kDistributed, 1);
  ASSERT_EQ(inst.ap_positions.size(), 4u);
  EXPECT_DOUBLE_EQ(inst.ap_positions[0].x, 25.0);
  EXPECT_DOUBLE_EQ(inst.ap_positions[0].y, 25.0);
  EXPECT_DOUBLE_EQ(inst.ap_positions[3].x, 75.0);
  EXPECT_DOUBLE_EQ(inst.ap_positions[3].y, 75.0);
  for (const auto& u : inst.user_positions) {
    EXPECT_GE(u.x, 0.0);
    EXPECT_LE(u.x, 100.0);
  }
}

TEST(Instance, GainsMatchPathlossWithoutShadowing) {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.shadow_std_db = 0.0;
  const auto inst = generate_instance(cfg, Scenario::kCentralized, 2);
  for (Index l = 0; l < inst.aps(); ++l) {
    for (Index k = 0; k < inst.users(); ++k) {
      const auto& a = inst.ap_positions[static_cast<std::size_t>(l)];
      const auto& u = inst.user_positions[static_cast<std::size_t>(k)];
      const double d = std::sqrt(std::pow(a.x - u.x, 2) + std::pow(a.y - u.y, 2) + 100.0);
      const double db = -36.7 * std::log10(d) - 30.5 - cfg.noise_power_dbm();
      EXPECT_NEAR(inst.gain(l, k), std::pow(10.0, db / 10.0), 1e-12 * inst.gain(l, k));
    }
  }
}

// Two users 9 m apart: covariance 16 * 2^{-1} = 8, variance 16.
TEST(Shadowing, CovarianceWithinTenPercent) {
  const std::vector<Point> users{{0.0, 0.0}, {9.0, 0.0}};
  std::mt19937_64 rng(17);
  const Index draws = 10000;
  const Eigen::MatrixXd z = correlated_shadowing(users, draws, 4.0, 9.0, rng);
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd centred = z.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(draws - 1);
  EXPECT_NEAR(cov(0, 0), 16.0, 1.6);
  EXPECT_NEAR(cov(1, 1), 16.0, 1.6);
  EXPECT_NEAR(cov(0, 1), 8.0, 0.8);
}

TEST(Shadowing, CoincidentUsersAreFullyCorrelated) {
  const std::vector<Point> users{{3.0, 4.0}, {3.0, 4.0}};
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd z = correlated_shadowing(users, 50, 4.0, 9.0, rng);
  for (Index l = 0; l < z.rows(); ++l) EXPECT_NEAR(z(l, 0), z(l, 1), 1e-3);
}

NetworkInstance unit_gain_instance(int aps, int antennas, int users) {
  Eigen::MatrixXd gain = Eigen::MatrixXd::Ones(aps, users);
  std::vector<std::vector<Index>> clusters(static_cast<std::size_t>(users));
  for (auto& c : clusters) {
    for (Index l = 0; l < aps; ++l) c.push_back(l);
  }
  return test::make_instance(gain, antennas, clusters, Scenario::kCentralized);
}

TEST(Channels, LawOfLargeNumbers) {
  const auto inst = unit_gain_instance(2, 4, 1);
  const auto batch = sample_channels(inst, 10000, 21);
  double power = 0.0;
  std::complex<double> cross = 0.0;
  for (const auto& h : batch.realizations) {
    power += h.block(0, 0, 4, 1).squaredNorm();
    cross += (h.block(0, 0, 4, 1).adjoint() * h.block(4, 0, 4, 1))(0, 0);
  }
  power /= 10000.0 * 4.0;
  EXPECT_GE(power, 0.97);
  EXPECT_LE(power, 1.03);
  EXPECT_LT(std::abs(cross) / (10000.0 * 4.0), 0.05);
}

TEST(Channels, PerAntennaVarianceTracksGain) {
  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kCentralized, 4);
  const auto batch = sample_channels(inst, 400, 8);
  const Index n = inst.antennas();
  for (Index l = 0; l < inst.aps(); ++l) {
    for (Index k = 0; k < inst.users(); ++k) {
      double sum = 0.0;
      for (const auto& h : batch.realizations) sum += h.block(l * n, k, n, 1).squaredNorm();
      const double var = sum / (400.0 * static_cast<double>(n));
      EXPECT_NEAR(var / inst.gain(l, k), 1.0, 0.2);
    }
  }
}

TEST(Channels, SameSeedBitIdentical) {
  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kCentralized, 4);
  const auto a = sample_channels(inst, 5, 99);
  const auto b = sample_channels(inst, 5, 99);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_EQ(a.realizations[n], b.realizations[n]);
  EXPECT_THROW(sample_channels(inst, 0, 1), std::invalid_argument);
}

TEST(Csi, FullClustersLeaveBatchUnchanged) {
  const auto inst = unit_gain_instance(4, 2, 3);
  const auto batch = sample_channels(inst, 6, 2);
  const CsiView csi = build_csi(batch, inst);
  for (std::size_t n = 0; n < batch.size(); ++n) EXPECT_EQ(csi.realizations[n], batch.realizations[n]);
  EXPECT_EQ(csi.unknown_gain, Eigen::MatrixXd::Zero(4, 3));
}

TEST(Csi, SingleServingApKeepsOneBlock) {
  NetworkConfig cfg = test::tiny_config(1, 4, 2, 1, 5);
  const auto inst = generate_instance(cfg, Scenario::kSmallCells, 6);
  const auto batch = sample_channels(inst, cfg.n_sim, 7);
  const CsiView csi = build_csi(batch, inst);
  const Index serving = inst.clusters[0][0];
  for (std::size_t n = 0; n < batch.size(); ++n) {
    int nonzero = 0;
    for (Index l = 0; l < 4; ++l) {
      const auto block = csi.realizations[n].block(l * 2, 0, 2, 1);
      if (block.squaredNorm() > 0.0) {
        ++nonzero;
        EXPECT_EQ(l, serving);
        EXPECT_EQ(block, batch.realizations[n].block(l * 2, 0, 2, 1));
      }
    }
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(Csi, MaskAndErrorScale) {
  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kDistributed, 8);
  const auto batch = sample_channels(inst, 3, 1);
  const CsiView csi = build_csi(batch, inst);
  const Index n = inst.antennas();
  for (Index l = 0; l < inst.aps(); ++l) {
    for (Index k = 0; k < inst.users(); ++k) {
      const bool s = inst.serves(l, k);
      EXPECT_EQ(csi.serving(l, k), s);
      EXPECT_EQ(csi.unknown_gain(l, k), s ? 0.0 : inst.gain(l, k));
      const auto block = csi.realizations[1].block(l * n, k, n, 1);
      if (s) {
        EXPECT_EQ(block, batch.realizations[1].block(l * n, k, n, 1));
      } else {
        EXPECT_EQ(block.squaredNorm(), 0.0);
      }
    }
    EXPECT_EQ(csi.served[static_cast<std::size_t>(l)], inst.served_users(l));
  }
  const Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(inst.users(), 1.0, 2.0);
  const Eigen::VectorXd scale = csi.error_scale(p);
  for (Index l = 0; l < inst.aps(); ++l) {
    double expected = 1.0;
    for (Index k = 0; k < inst.users(); ++k) {
      if (!inst.serves(l, k)) expected += inst.gain(l, k) * p[k];
    }
    EXPECT_NEAR(scale[l], expected, 1e-12 * expected);
  }
}

TEST(Csi, MismatchedBatchRejected) {
  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kDistributed, 8);
  auto batch = sample_channels(inst, 2, 1);
  batch.antennas_per_ap = 2;
  EXPECT_THROW(build_csi(batch, inst), std::invalid_argument);
}

}  // namespace
}  // namespace lsmimo
