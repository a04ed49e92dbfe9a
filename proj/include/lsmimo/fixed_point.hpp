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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lsmimo {

using Index = Eigen::Index;

/// Strictly positive per-user transmit powers in units of the noise power.
class PowerVector {
 public:
  PowerVector() = default;
  /// Throws std::invalid_argument unless every entry is > 0 (NaN rejected).
  explicit PowerVector(Eigen::VectorXd values);

  static PowerVector constant(Index users, double value);

  const Eigen::VectorXd& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index k) const { return values_[k]; }

 private:
  Eigen::VectorXd values_;
};

/// A mapping p -> T(p) on the positive orthant. Standard interference
/// mappings (monotone and scalable) are the intended inputs.
struct InterferenceMapping {
  Index dimension = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;

  Eigen::VectorXd operator()(const Eigen::VectorXd& p) const { return eval(p); }
};

enum class IterationStatus { kConverged, kDiverged, kMaxIterations };

std::string to_string(IterationStatus status);

struct IterationTrace {
  /// p_0, p_1, ... in order; p_{n+1} is the image of p_n.
  std::vector<Eigen::VectorXd> iterates;
  /// residuals[n] = ||p_{n+1} - p_n||_2.
  std::vector<double> residuals;
  IterationStatus status = IterationStatus::kMaxIterations;
  /// The last iterate whose image was computed. When converged, the step
  /// from this point satisfies the stopping rule, so it is certified by
  /// ||solution - T(solution)|| <= tol * ||solution||.
  Eigen::VectorXd solution;

  bool converged() const { return status == IterationStatus::kConverged; }
  std::size_t iterations() const { return residuals.size(); }

  /// Geometric-mean contraction factor of the residuals over the last
  /// `window` steps. Returns NaN when fewer than window + 1 residuals exist.
  double tail_ratio(std::size_t window = 10) const;
  /// Largest single-step ratio r_{n+1} / r_n over the last `window` steps.
  double max_tail_ratio(std::size_t window = 10) const;
};

/// Monotone norms used to encode power budgets.
struct MonotoneNorm {
  enum class Kind { kL1, kWeightedLInf };

  Kind kind = Kind::kWeightedLInf;
  /// Per-user weights for the weighted l-infinity norm: ||p|| = max_k p_k / w_k.
  /// Empty means all ones.
  Eigen::VectorXd weights;

  static MonotoneNorm l1() { return {Kind::kL1, {}}; }
  static MonotoneNorm linf() { return {Kind::kWeightedLInf, {}}; }
  static MonotoneNorm weighted_linf(Eigen::VectorXd w);

  double operator()(const Eigen::VectorXd& p) const;
};

struct FixedPointOptions {
  double tol = 1e-8;
  int max_iter = 500;
  /// Plain iteration reports divergence once any entry exceeds this value.
  double divergence_cap = 1e9;
  /// Plain iteration also reports divergence when the last `stall_window`
  /// residuals are non-decreasing while ||p||_2 keeps growing.
  int stall_window = 50;
};

/// Iterates p <- T(p) from p0 until the relative step
/// ||p_{n+1} - p_n||_2 / ||p_n||_2 drops to tol.
/// Throws std::invalid_argument on dimension mismatch or invalid options.
IterationTrace iterate_fixed_point(const InterferenceMapping& map, const PowerVector& p0,
                                   const FixedPointOptions& options = {});

/// Iterates p <- (budget / ||T(p)||) T(p). Never reports divergence; stops
/// when ||p_{n+1} - p_n||_2 <= tol * min(||p_n||_2, ||p_n||).
IterationTrace iterate_normalized_fixed_point(const InterferenceMapping& map,
                                              const MonotoneNorm& norm, double budget,
                                              const PowerVector& p0,
                                              const FixedPointOptions& options = {});

struct SiViolation {
  enum class Axiom { kPositivity, kMonotonicity, kScalability };
  Axiom axiom = Axiom::kMonotonicity;
  std::size_t sample = 0;
  Index coordinate = 0;
  /// Relative amount by which the axiom failed.
  double excess = 0.0;
};

struct SiReport {
  std::size_t samples = 0;
  std::vector<SiViolation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(SiViolation::Axiom axiom) const;
};

/// Sampling box for check_si_axioms: base points are log-uniform in
/// [low, high] per coordinate.
struct SiSampling {
  double low = 1e-2;
  double high = 1e3;
  double max_scale = 4.0;
  double tolerance = 1e-9;
};

/// Draws q in the sampling box, p = q + d with d >= 0 (some coordinates of d
/// left at zero) and alpha in (1, max_scale], then checks T(p) >= T(q) and
/// alpha T(p) > T(alpha p) coordinate-wise up to a relative tolerance.
SiReport check_si_axioms(const InterferenceMapping& map, std::size_t samples,
                         std::uint64_t seed, const SiSampling& sampling = {});

}  // namespace lsmimo
