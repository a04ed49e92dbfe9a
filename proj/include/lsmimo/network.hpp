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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsmimo/fixed_point.hpp"

namespace lsmimo {

/// Information structure shared among the access points.
enum class Scenario {
  kSmallCells,   ///< one serving AP per user, no CSI sharing
  kDistributed,  ///< user-centric clusters, local CSI only
  kCentralized,  ///< user-centric clusters, CSI shared within the cluster
};

std::string to_string(Scenario scenario);
/// Accepts "small-cells", "distributed", "centralized".
Scenario parse_scenario(const std::string& name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct NetworkConfig {
  int users = 64;
  int aps = 16;  // perfect square
  int antennas = 8;
  double area_side = 500.0;  // m
  int cluster_size = 4;
  double pathloss_a = 36.7;  // dB per decade
  double pathloss_b = 30.5;  // dB
  double shadow_std_db = 4.0;
  double shadow_corr_dist = 9.0;  // m
  double bandwidth_hz = 20e6;
  double noise_figure_db = 7.0;
  double height_diff = 10.0;  // m
  double power_dbm = 20.0;
  int n_sim = 100;

  static NetworkConfig paper() { return {}; }
  /// Small profile used by tests and quick experiment runs.
  static NetworkConfig desk();

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  double noise_power_dbm() const;
  /// Per-user budget in noise-normalized linear units (mW, as gains embed -sigma^2 dBm).
  double power_budget() const;
};

struct NetworkInstance {
  NetworkConfig config;
  std::vector<Point> ap_positions;
  std::vector<Point> user_positions;
  /// L x K noise-normalized linear large-scale gains.
  Eigen::MatrixXd gain;
  /// Per-user serving APs, strongest first.
  std::vector<std::vector<Index>> clusters;
  Scenario scenario = Scenario::kCentralized;
  std::uint64_t seed = 0;

  Index users() const { return gain.cols(); }
  Index aps() const { return gain.rows(); }
  Index antennas() const { return config.antennas; }
  Index total_antennas() const { return aps() * antennas(); }
  bool serves(Index ap, Index user) const;
  /// Users served by `ap`, ascending.
  std::vector<Index> served_users(Index ap) const;
};

/// Pathloss-plus-noise gain in dB at 3D distance `distance` (shadowing excluded).
double large_scale_gain_db(const NetworkConfig& cfg, double distance);

/// Per-AP shadowing draws (rows = APs, cols = users) in dB with covariance
/// std^2 * 2^(-dist(k, i) / corr_dist) across users and independent across APs.
Eigen::MatrixXd correlated_shadowing(std::span<const Point> users, Index aps, double std_db,
                                     double corr_dist, std::mt19937_64& rng);

/// Q strongest APs per user (column of `gain`), strongest first; ties go to
/// the lowest AP index.
std::vector<std::vector<Index>> assign_clusters(const Eigen::MatrixXd& gain, int cluster_size);

/// Draws geometry and large-scale gains. SmallCells forces one serving AP.
NetworkInstance generate_instance(const NetworkConfig& cfg, Scenario scenario,
                                  std::uint64_t seed);

/// Same geometry and gains, clusters rebuilt for another scenario.
NetworkInstance with_scenario(const NetworkInstance& inst, Scenario scenario);

struct ChannelBatch {
  /// n_sim matrices of shape (L*N) x K; rows l*N .. l*N+N-1 belong to AP l.
  std::vector<Eigen::MatrixXcd> realizations;
  Index antennas_per_ap = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return realizations.size(); }
  Index users() const { return realizations.empty() ? 0 : realizations.front().cols(); }
  Index total_antennas() const {
    return realizations.empty() ? 0 : realizations.front().rows();
  }
};

/// i.i.d. Rayleigh blocks h_{l,k} ~ CN(0, gain(l,k) I_N).
ChannelBatch sample_channels(const NetworkInstance& inst, int n_sim, std::uint64_t seed);

/// Channel state as seen by the APs: blocks of users an AP does not serve are
/// replaced by their mean (zero). Blocks nobody knows are kept statistically
/// through `unknown_gain`.
struct CsiView {
  std::vector<Eigen::MatrixXcd> realizations;
  Index antennas_per_ap = 0;
  /// L x K, true where AP l serves user k.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> serving;
  /// L x K, gain(l,k) where AP l does not serve k, else 0.
  Eigen::MatrixXd unknown_gain;
  /// served[l] = users served by AP l, ascending.
  std::vector<std::vector<Index>> served;
  /// clusters[k] = APs serving user k, ascending.
  std::vector<std::vector<Index>> clusters;

  std::size_t size() const { return realizations.size(); }
  Index users() const { return serving.cols(); }
  Index aps() const { return serving.rows(); }
  Index total_antennas() const { return aps() * antennas_per_ap; }

  /// Per-AP scale of the error-plus-noise covariance,
  /// 1 + sum_{i not served by l} gain(l,i) p_i.
  Eigen::VectorXd error_scale(const Eigen::VectorXd& p) const;
};

/// Throws std::invalid_argument when batch and instance dimensions disagree.
CsiView build_csi(const ChannelBatch& batch, const NetworkInstance& inst);

}  // namespace lsmimo
