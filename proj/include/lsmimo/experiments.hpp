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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsmimo/solvers.hpp"

namespace lsmimo {

enum class ExperimentKind {
  kConvergeQos,
  kConvergeMaxMin,
  kCdf,
  kCompareCentralized,
  kCompareDistributed,
};

std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
  NetworkConfig network = NetworkConfig::desk();
  ExperimentKind kind = ExperimentKind::kCdf;
  int drops = 20;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  std::string profile = "desk";
  /// Restricts multi-scenario experiments to one scenario.
  std::optional<Scenario> scenario;
  /// Per-user QoS target of the sum-power problem, bit/s/Hz.
  double qos_rate = 2.5;
  FixedPointOptions fixed_point;
  /// Worker threads for independent drops; 0 picks the hardware concurrency.
  unsigned threads = 0;

  static ExperimentConfig desk();
  static ExperimentConfig paper();

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  std::vector<Scenario> scenarios() const;
};

/// Applies `key = value` lines ('#' starts a comment). Unknown keys and
/// malformed values throw std::invalid_argument naming the line.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Geometry and channel seeds of drop d.
std::uint64_t geometry_seed(const ExperimentConfig& cfg, int drop);
std::uint64_t channel_seed(const ExperimentConfig& cfg, int drop);

/// Instance of drop d for `scenario`, and its training batch.
SystemModel drop_system(const ExperimentConfig& cfg, int drop, Scenario scenario);

struct ConvergenceSeries {
  Scenario scenario = Scenario::kCentralized;
  IterationTrace trace;
  Eigen::VectorXd reference;
  /// ||p_i - p*||_2 per iterate; empty when the run diverged.
  std::vector<double> distance;
  double tail_ratio = 0.0;
};

struct ConvergenceRun {
  std::string problem;  // "qos" or "maxmin"
  std::vector<ConvergenceSeries> series;
};

/// One drop; p* from a reference run with 4x the iteration budget.
ConvergenceRun run_convergence(const ExperimentConfig& cfg);
void write_convergence_csv(std::ostream& os, const ConvergenceRun& run);

struct RateRecord {
  int drop = 0;
  Index user = 0;
  Method method = Method::kJoint;
  Scenario scenario = Scenario::kCentralized;
  std::string bound;  // "uatf" or "coherent"
  double rate = 0.0;
};

/// Per drop and method, the per-user quantities behind the ordering checks.
struct DropSummary {
  int drop = 0;
  Method method = Method::kJoint;
  Scenario scenario = Scenario::kCentralized;
  Eigen::VectorXd sinr;      ///< UatF SINR (empty for the short-term method)
  Eigen::VectorXd uatf;      ///< UatF rates (empty for the short-term method)
  Eigen::VectorXd coherent;  ///< coherent-decoding rates
  IterationStatus status = IterationStatus::kConverged;
};

struct RateTable {
  std::vector<RateRecord> records;
  std::vector<DropSummary> summaries;

  const DropSummary* find(int drop, Method method, Scenario scenario) const;
};

RateTable run_cdf(const ExperimentConfig& cfg);
RateTable run_compare_centralized(const ExperimentConfig& cfg);
RateTable run_compare_distributed(const ExperimentConfig& cfg);

/// Drops where the ordering mrc-lsfd <= power-only <= joint (UatF min-rate,
/// 1e-9 slack) fails.
std::vector<int> distributed_ordering_violations(const RateTable& table);

void write_rates_csv(std::ostream& os, const RateTable& table);

/// Sorted samples of one (method, scenario, bound) series.
struct CdfSeries {
  Method method = Method::kJoint;
  Scenario scenario = Scenario::kCentralized;
  std::string bound;
  std::vector<double> samples;

  /// Empirical quantile, step convention: smallest sample x with F(x) >= q.
  double quantile(double q) const;
};

std::vector<CdfSeries> cdf_table(const RateTable& table);

/// Runs the invariant suite on `cfg`'s first drop; prints one PASS/FAIL line
/// per check and returns true when all pass.
bool run_invariant_suite(const ExperimentConfig& cfg, std::ostream& os);

/// Writes `contents` to out_dir/name, creating the directory.
std::filesystem::path write_artifact(const ExperimentConfig& cfg, const std::string& name,
                                     const std::string& contents);

}  // namespace lsmimo
