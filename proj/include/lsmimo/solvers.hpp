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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lsmimo/beamforming.hpp"
#include "lsmimo/fixed_point.hpp"
#include "lsmimo/metrics.hpp"
#include "lsmimo/network.hpp"

namespace lsmimo {

/// Instance, training batch and the derived CSI view and expectation model.
/// All expectations of one solve are taken over this fixed batch.
struct SystemModel {
  NetworkInstance instance;
  ChannelBatch batch;
  CsiView csi;
  ExpectationModel expectation;

  Index users() const { return instance.users(); }
  double budget() const { return instance.config.power_budget(); }
};

SystemModel make_system(const NetworkInstance& inst, const ChannelBatch& batch);

/// Optimal design at p and its UatF statistics.
struct Evaluation {
  DesignOutcome outcome;
  UatfStats stats;
  Eigen::VectorXd sinr;
};

Evaluation evaluate(const SystemModel& sys, const Eigen::VectorXd& p);
/// Statistics of fixed beamformers under the system's expectation model.
UatfStats evaluate_stats(const SystemModel& sys, const RealizedBeamformers& beams);

/// T_k(p) = gamma_k p_k / SINR_k(v(p), p) with v(p) the optimal design at p.
InterferenceMapping joint_mapping(const SystemModel& sys, const Eigen::VectorXd& gammas);
/// Same with beamformers frozen; affine in p.
InterferenceMapping frozen_mapping(const UatfStats& stats, const Eigen::VectorXd& gammas);

/// gamma for a target rate in bit/s/Hz.
double sinr_target(double rate);

enum class Method { kJoint, kPowerOnly, kShortTerm, kMrcLsfd, kMrc };

std::string to_string(Method method);

struct SolveResult {
  Method method = Method::kJoint;
  Scenario scenario = Scenario::kCentralized;
  /// Certified point (see IterationTrace::solution).
  Eigen::VectorXd p_star;
  BeamformerDesign design;
  RealizedBeamformers beams;
  UatfStats stats;
  IterationTrace trace;
  Eigen::VectorXd sinr;
  Eigen::VectorXd rates;

  bool feasible() const { return trace.status != IterationStatus::kDiverged; }
  double min_rate() const { return rates.size() ? rates.minCoeff() : 0.0; }
};

struct SolverOptions {
  FixedPointOptions fixed_point;
  /// Defaults to P * 1.
  std::optional<Eigen::VectorXd> p0;
};

/// Minimum total power subject to SINR_k >= gamma_k. A diverged trace marks
/// infeasible targets; p_star is then the last iterate.
SolveResult solve_sum_power(const SystemModel& sys, const Eigen::VectorXd& gammas,
                            const SolverOptions& options = {});

/// max min_k SINR_k / gamma_k subject to ||p||_inf <= budget.
SolveResult solve_max_min(const SystemModel& sys, const Eigen::VectorXd& gammas, double budget,
                          const SolverOptions& options = {});

/// Max-min over powers only, with the beamformers of `fixed` kept as they are.
SolveResult solve_power_only_maxmin(const SystemModel& sys, const DesignOutcome& fixed,
                                    const Eigen::VectorXd& gammas, double budget,
                                    const SolverOptions& options = {});

struct ShortTermOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

struct ShortTermResult {
  std::vector<Eigen::VectorXd> powers;
  RealizedBeamformers beams;
  std::vector<IterationStatus> status;
  /// Ergodic rates with instantaneous SINR, averaged over realizations.
  Eigen::VectorXd rates;

  double min_rate() const { return rates.minCoeff(); }
};

/// Per-realization max-min with instantaneous MMSE beamformers.
ShortTermResult solve_short_term_maxmin(const SystemModel& sys, const Eigen::VectorXd& gammas,
                                        double budget, const ShortTermOptions& options = {});

struct LsfdOptions {
  /// Stop when the min-rate gain of a round drops below this (bit/s/Hz).
  double tol = 1e-6;
  int max_rounds = 50;
  /// Fold the LSFD update into a single normalized fixed-point iteration.
  bool single_loop = false;
  FixedPointOptions fixed_point;
};

struct LsfdResult {
  SolveResult result;
  int rounds = 0;
  std::vector<double> min_rate_history;
};

/// Max-min with MRC inner beamformers and optimal large-scale fading
/// decoding weights.
LsfdResult solve_lsfd_maxmin(const SystemModel& sys, const Eigen::VectorXd& gammas,
                             double budget, const LsfdOptions& options = {});

/// Optimal LSFD weights (L x K) for MRC beamformers at power p.
Eigen::MatrixXcd lsfd_weights(const SystemModel& sys, const RealizedBeamformers& mrc_beams,
                              const Eigen::VectorXd& p);

}  // namespace lsmimo
