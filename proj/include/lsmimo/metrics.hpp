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

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "lsmimo/network.hpp"

namespace lsmimo {

/// Beamforming vectors applied to each realization of a batch: v[n] is
/// (L*N) x K with column k holding v_k for realization n.
struct RealizedBeamformers {
  std::vector<Eigen::MatrixXcd> v;

  std::size_t size() const { return v.size(); }
  Index users() const { return v.empty() ? 0 : v.front().cols(); }
};

/// Thrown when a user's beamformer is identically zero, which leaves its
/// SINR undefined.
class UndefinedBeamformer : public std::domain_error {
 public:
  UndefinedBeamformer(Index user);
  Index user() const { return user_; }

 private:
  Index user_;
};

/// How expectations over the training batch are formed.
///
/// Antennas are partitioned into blocks of `block_size`. Only the users in
/// `active[l]` may have nonzero channel or beamformer entries in block l.
/// Channel entries that no block knows enter analytically through
/// `unknown_gain(l, j)`: they add unknown_gain(l, j) * E||v_{l,k}||^2 to
/// E|h_j^H v_k|^2. When `independent_blocks` is set, realizations of distinct
/// blocks are treated as independent draws (product of per-block empirical
/// measures), which is the measure under which locally computed
/// beamformers are exactly MSE-optimal.
struct ExpectationModel {
  Index block_size = 0;
  std::vector<std::vector<Index>> active;
  Eigen::MatrixXd unknown_gain;
  bool independent_blocks = false;

  Index blocks() const { return static_cast<Index>(active.size()); }

  /// Plain sample means over a single block of `antennas` rows.
  static ExpectationModel sample_mean(Index antennas, Index users);
  /// Information-consistent model for designs computed from `csi`.
  static ExpectationModel for_csi(const CsiView& csi, Scenario scenario);
};

/// Empirical moments behind the use-and-then-forget SINR.
struct UatfStats {
  Eigen::VectorXcd gain;  ///< g_k = E[h_k^H v_k]
  Eigen::MatrixXd cross;  ///< cross(j, k) = E|h_j^H v_k|^2
  Eigen::VectorXd norm;   ///< E||v_k||^2

  Index users() const { return gain.size(); }
};

UatfStats estimate_uatf_stats(const std::vector<Eigen::MatrixXcd>& channels,
                              const RealizedBeamformers& beams, const ExpectationModel& model);
/// Plain sample means over the batch.
UatfStats estimate_uatf_stats(const ChannelBatch& batch, const RealizedBeamformers& beams);

/// p_k |g_k|^2 / (p_k Var + sum_{j != k} p_j cross(j, k) + norm_k).
/// Throws UndefinedBeamformer when norm_k == 0.
double uatf_sinr(const UatfStats& stats, const Eigen::VectorXd& p, Index k);
Eigen::VectorXd uatf_sinrs(const UatfStats& stats, const Eigen::VectorXd& p);

/// E||P^{1/2} H^H v_k - e_k||^2 + E||v_k||^2 expressed through the moments.
double empirical_mse(const UatfStats& stats, const Eigen::VectorXd& p, Index k);
double empirical_mse(const ChannelBatch& batch, const RealizedBeamformers& beams,
                     const Eigen::VectorXd& p, Index k);

/// log2(1 + SINR_k) per user, in bit/s/Hz.
Eigen::VectorXd uatf_rates(const UatfStats& stats, const Eigen::VectorXd& p);

/// Ergodic rates with the instantaneous SINR inside the logarithm. Samples
/// with v_k = 0 contribute zero.
Eigen::VectorXd coherent_rates(const ChannelBatch& batch, const RealizedBeamformers& beams,
                               const Eigen::VectorXd& p);
/// Same, with a separate power vector per realization.
Eigen::VectorXd coherent_rates(const std::vector<Eigen::MatrixXcd>& channels,
                               const RealizedBeamformers& beams,
                               const std::vector<Eigen::VectorXd>& powers);

/// Moments needed to choose per-AP combining weights a for user k on top of
/// fixed beamformers: with w_{l,k} = a_l v_{l,k}, the SINR under `model` is
/// p_k |b^H a|^2 / (a^H B a). Indices refer to `aps` (blocks carrying v_k).
struct LsfdMoments {
  std::vector<Index> aps;
  Eigen::VectorXcd b;
  Eigen::MatrixXcd B;
};

LsfdMoments lsfd_moments(const std::vector<Eigen::MatrixXcd>& channels,
                         const RealizedBeamformers& beams, const ExpectationModel& model,
                         const Eigen::VectorXd& p, Index k);

}  // namespace lsmimo
