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

#include "lsmimo/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lsmimo {

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kSmallCells:
      return "small-cells";
    case Scenario::kDistributed:
      return "distributed";
    case Scenario::kCentralized:
      return "centralized";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "small-cells") return Scenario::kSmallCells;
  if (name == "distributed") return Scenario::kDistributed;
  if (name == "centralized") return Scenario::kCentralized;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

NetworkConfig NetworkConfig::desk() {
  NetworkConfig cfg;
  cfg.users = 16;
  cfg.aps = 9;
  cfg.antennas = 4;
  cfg.cluster_size = 3;
  cfg.n_sim = 50;
  return cfg;
}

void NetworkConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("network config: ") + what);
  };
  require(users >= 1, "users must be >= 1");
  require(aps >= 1, "aps must be >= 1");
  require(antennas >= 1, "antennas must be >= 1");
  require(cluster_size >= 1, "cluster_size must be >= 1");
  require(cluster_size <= aps, "cluster_size must not exceed aps");
  require(n_sim >= 1, "n_sim must be >= 1");
  require(area_side > 0.0, "area_side must be positive");
  require(shadow_std_db >= 0.0, "shadow_std_db must be non-negative");
  require(shadow_corr_dist > 0.0, "shadow_corr_dist must be positive");
  require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(height_diff >= 0.0, "height_diff must be non-negative");
}

double NetworkConfig::noise_power_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double NetworkConfig::power_budget() const { return std::pow(10.0, power_dbm / 10.0); }

bool NetworkInstance::serves(Index ap, Index user) const {
  const auto& c = clusters.at(static_cast<std::size_t>(user));
  return std::find(c.begin(), c.end(), ap) != c.end();
}

std::vector<Index> NetworkInstance::served_users(Index ap) const {
  std::vector<Index> out;
  for (Index k = 0; k < users(); ++k) {
    if (serves(ap, k)) out.push_back(k);
  }
  return out;
}

double large_scale_gain_db(const NetworkConfig& cfg, double distance) {
  return -cfg.pathloss_a * std::log10(distance) - cfg.pathloss_b - cfg.noise_power_dbm();
}

Eigen::MatrixXd correlated_shadowing(std::span<const Point> users, Index aps, double std_db,
                                     double corr_dist, std::mt19937_64& rng) {
  const auto k = static_cast<Index>(users.size());
  Eigen::MatrixXd cov(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      const double dx = users[a].x - users[b].x;
      const double dy = users[a].y - users[b].y;
      cov(a, b) = std::pow(2.0, -std::hypot(dx, dy) / corr_dist);
    }
  }
  // Coincident users make the correlation matrix semidefinite.
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double jitter = 1e-10;
  while (llt.info() != Eigen::Success) {
    if (jitter > 1e-2) throw std::runtime_error("shadowing covariance is not factorizable");
    llt.compute(cov + jitter * Eigen::MatrixXd::Identity(k, k));
    jitter *= 10.0;
  }
  const Eigen::MatrixXd factor = llt.matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(aps, k);
  Eigen::VectorXd w(k);
  for (Index l = 0; l < aps; ++l) {
    for (Index i = 0; i < k; ++i) w[i] = normal(rng);
    z.row(l) = (std_db * (factor * w)).transpose();
  }
  return z;
}

std::vector<std::vector<Index>> assign_clusters(const Eigen::MatrixXd& gain, int cluster_size) {
  const Index aps = gain.rows();
  if (cluster_size < 1 || cluster_size > aps) {
    throw std::invalid_argument("cluster size must lie in [1, number of APs]");
  }
  std::vector<std::vector<Index>> clusters(static_cast<std::size_t>(gain.cols()));
  std::vector<Index> order(static_cast<std::size_t>(aps));
  for (Index k = 0; k < gain.cols(); ++k) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return gain(a, k) > gain(b, k); });
    clusters[static_cast<std::size_t>(k)].assign(order.begin(), order.begin() + cluster_size);
  }
  return clusters;
}

NetworkInstance generate_instance(const NetworkConfig& cfg, Scenario scenario,
                                  std::uint64_t seed) {
  cfg.validate();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.aps))));
  if (side * side != cfg.aps) {
    throw std::invalid_argument("number of APs must be a perfect square, got " +
                                std::to_string(cfg.aps));
  }

  NetworkInstance inst;
  inst.config = cfg;
  inst.seed = seed;
  const double pitch = cfg.area_side / side;
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      inst.ap_positions.push_back({(col + 0.5) * pitch, (row + 0.5) * pitch});
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
  for (int k = 0; k < cfg.users; ++k) {
    const double x = coord(rng);
    const double y = coord(rng);
    inst.user_positions.push_back({x, y});
  }

  const Eigen::MatrixXd shadow = correlated_shadowing(inst.user_positions, cfg.aps,
                                                      cfg.shadow_std_db, cfg.shadow_corr_dist, rng);
  inst.gain.resize(cfg.aps, cfg.users);
  for (int l = 0; l < cfg.aps; ++l) {
    for (int k = 0; k < cfg.users; ++k) {
      const auto& a = inst.ap_positions[static_cast<std::size_t>(l)];
      const auto& u = inst.user_positions[static_cast<std::size_t>(k)];
      const double dist = std::sqrt((a.x - u.x) * (a.x - u.x) + (a.y - u.y) * (a.y - u.y) +
                                    cfg.height_diff * cfg.height_diff);
      const double db = large_scale_gain_db(cfg, dist) + shadow(l, k);
      inst.gain(l, k) = std::pow(10.0, db / 10.0);
    }
  }
  return with_scenario(inst, scenario);
}

NetworkInstance with_scenario(const NetworkInstance& inst, Scenario scenario) {
  NetworkInstance out = inst;
  out.scenario = scenario;
  const int q = scenario == Scenario::kSmallCells ? 1 : inst.config.cluster_size;
  out.clusters = assign_clusters(inst.gain, q);
  return out;
}

ChannelBatch sample_channels(const NetworkInstance& inst, int n_sim, std::uint64_t seed) {
  if (n_sim < 1) throw std::invalid_argument("n_sim must be >= 1");
  const Index n = inst.antennas();
  const Index m = inst.total_antennas();
  const Index k = inst.users();

  ChannelBatch batch;
  batch.antennas_per_ap = n;
  batch.seed = seed;
  batch.realizations.reserve(static_cast<std::size_t>(n_sim));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const Eigen::MatrixXd scale = inst.gain.cwiseSqrt();
  for (int s = 0; s < n_sim; ++s) {
    Eigen::MatrixXcd h(m, k);
    for (Index user = 0; user < k; ++user) {
      for (Index l = 0; l < inst.aps(); ++l) {
        for (Index a = 0; a < n; ++a) {
          const double re = normal(rng);
          const double im = normal(rng);
          h(l * n + a, user) = scale(l, user) * std::complex<double>(re, im);
        }
      }
    }
    batch.realizations.push_back(std::move(h));
  }
  return batch;
}

Eigen::VectorXd CsiView::error_scale(const Eigen::VectorXd& p) const {
  if (p.size() != users()) throw std::invalid_argument("error_scale: power length mismatch");
  return Eigen::VectorXd::Ones(aps()) + unknown_gain * p;
}

CsiView build_csi(const ChannelBatch& batch, const NetworkInstance& inst) {
  const Index n = inst.antennas();
  if (batch.antennas_per_ap != n || batch.total_antennas() != inst.total_antennas() ||
      batch.users() != inst.users()) {
    throw std::invalid_argument("channel batch does not match the network instance");
  }
  const Index l_count = inst.aps();
  const Index k_count = inst.users();

  CsiView csi;
  csi.antennas_per_ap = n;
  csi.serving.setConstant(l_count, k_count, false);
  for (Index k = 0; k < k_count; ++k) {
    for (Index l : inst.clusters[static_cast<std::size_t>(k)]) csi.serving(l, k) = true;
  }
  csi.unknown_gain = inst.gain;
  csi.served.resize(static_cast<std::size_t>(l_count));
  csi.clusters.resize(static_cast<std::size_t>(k_count));
  for (Index l = 0; l < l_count; ++l) {
    for (Index k = 0; k < k_count; ++k) {
      if (csi.serving(l, k)) {
        csi.unknown_gain(l, k) = 0.0;
        csi.served[static_cast<std::size_t>(l)].push_back(k);
        csi.clusters[static_cast<std::size_t>(k)].push_back(l);
      }
    }
  }

  csi.realizations = batch.realizations;
  for (auto& h : csi.realizations) {
    for (Index k = 0; k < k_count; ++k) {
      for (Index l = 0; l < l_count; ++l) {
        if (!csi.serving(l, k)) h.block(l * n, k, n, 1).setZero();
      }
    }
  }
  return csi;
}

}  // namespace lsmimo
