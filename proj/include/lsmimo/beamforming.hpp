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

#include "lsmimo/metrics.hpp"
#include "lsmimo/network.hpp"

namespace lsmimo {

/// Raised when a linear system that should be well posed is numerically
/// singular.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, Index user);
  /// Offending user, or -1 when not user specific.
  Index user() const { return user_; }

 private:
  Index user_;
};

enum class CombinerKind { kMmse, kMrc };

/// Long-term parameters of a CSI-to-beamformer map.
struct BeamformerDesign {
  Scenario scenario = Scenario::kCentralized;
  CombinerKind kind = CombinerKind::kMmse;
  /// Power vector the design was computed for.
  Eigen::VectorXd power;
  /// Sigma_l = error_scale[l] * I.
  Eigen::VectorXd error_scale;
  /// Pi_l = E[P^{1/2} H_l^H V_l], K x K (local designs only).
  std::vector<Eigen::MatrixXcd> pi;
  /// coefficients[l].col(k) = c_{l,k}; zero when l does not serve k (local designs only).
  std::vector<Eigen::MatrixXcd> coefficients;
  /// L x K large-scale combining weights; empty when unused.
  Eigen::MatrixXcd lsfd;
};

struct DesignOutcome {
  BeamformerDesign design;
  RealizedBeamformers beams;
};

/// (H P H^H + sigma I)^{-1} H P^{1/2} for one realization of one AP.
Eigen::MatrixXcd local_mmse(const Eigen::MatrixXcd& h, const Eigen::VectorXd& p, double sigma);

/// Per-realization N x K local MMSE stage of AP l.
std::vector<Eigen::MatrixXcd> local_mmse_stage(const CsiView& csi, const Eigen::VectorXd& p,
                                               Index l);

/// Statistical stage of the team design. Given the per-AP K x K matrices
/// Pi_l, each supported on the rows and columns in support[l], solves
/// c_l + sum_{j in C, j != l} Pi_j c_j = e_k for all l in a cluster C.
class TeamSystem {
 public:
  TeamSystem(std::vector<Eigen::MatrixXcd> pi, std::vector<std::vector<Index>> support);
  /// Full support on every AP.
  explicit TeamSystem(std::vector<Eigen::MatrixXcd> pi);

  /// K x |C| matrix whose columns are c_l for l in cluster order.
  Eigen::MatrixXcd solve(const std::vector<Index>& cluster, Index k) const;

  const std::vector<Eigen::MatrixXcd>& pi() const { return pi_; }

 private:
  std::vector<Eigen::MatrixXcd> pi_;
  std::vector<std::vector<Index>> support_;
  std::vector<Eigen::MatrixXcd> resolvent_;  // (I - Pi_l)^{-1} on the support
  std::vector<Eigen::MatrixXcd> t_;          // Pi_l (I - Pi_l)^{-1} on the support
};

/// Team MMSE for local CSI. Also covers small cells, where every cluster has
/// one AP and the statistical stage reduces to c_{l,k} = e_k.
DesignOutcome team_mmse_design(const CsiView& csi, const NetworkInstance& inst,
                               const Eigen::VectorXd& p);

/// max_{l in cluster(k)} ||c_{l,k} + sum_{j != l} Pi_j c_{j,k} - e_k||_2.
double team_residual(const BeamformerDesign& design, const CsiView& csi, Index k);

/// Per-realization MMSE on the cluster's antennas, zero elsewhere.
DesignOutcome centralized_mmse(const CsiView& csi, const NetworkInstance& inst,
                               const Eigen::VectorXd& p);

/// v_k = masked h_k.
DesignOutcome mrc(const CsiView& csi, const NetworkInstance& inst);

/// MSE-optimal design for inst.scenario.
DesignOutcome optimal_beamformers(const CsiView& csi, const NetworkInstance& inst,
                                  const Eigen::VectorXd& p);

/// Recomputes the realized beamformers of `design` on `csi`.
RealizedBeamformers realize(const BeamformerDesign& design, const CsiView& csi);

struct LsfdWeights {
  Eigen::VectorXcd a;
  bool used_pseudo_inverse = false;
};

/// Maximizer of |b^H a|^2 / (a^H B a): a = B^{-1} b. A singular B falls back
/// to the pseudo-inverse with a warning on stderr.
LsfdWeights lsfd_optimize(const Eigen::VectorXcd& b, const Eigen::MatrixXcd& B);

/// Scales block l of every v_k by weights(l, k).
RealizedBeamformers apply_lsfd(const RealizedBeamformers& beams, Index antennas_per_ap,
                               const Eigen::MatrixXcd& weights);

}  // namespace lsmimo
