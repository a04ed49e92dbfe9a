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

#include "lsmimo/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

namespace lsmimo {

PowerVector::PowerVector(Eigen::VectorXd values) : values_(std::move(values)) {
  for (Index k = 0; k < values_.size(); ++k) {
    if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
      throw std::invalid_argument("PowerVector: entry " + std::to_string(k) +
                                  " is not a finite positive number");
    }
  }
}

PowerVector PowerVector::constant(Index users, double value) {
  return PowerVector(Eigen::VectorXd::Constant(users, value));
}

std::string to_string(IterationStatus status) {
  switch (status) {
    case IterationStatus::kConverged:
      return "converged";
    case IterationStatus::kDiverged:
      return "diverged";
    case IterationStatus::kMaxIterations:
      return "max-iterations";
  }
  return "unknown";
}

double IterationTrace::tail_ratio(std::size_t window) const {
  if (window == 0 || residuals.size() < window + 1) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double last = residuals.back();
  const double first = residuals[residuals.size() - 1 - window];
  if (first <= 0.0) return 0.0;
  return std::pow(last / first, 1.0 / static_cast<double>(window));
}

double IterationTrace::max_tail_ratio(std::size_t window) const {
  if (window == 0 || residuals.size() < window + 1) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double worst = 0.0;
  for (std::size_t i = residuals.size() - window; i < residuals.size(); ++i) {
    if (residuals[i - 1] <= 0.0) continue;
    worst = std::max(worst, residuals[i] / residuals[i - 1]);
  }
  return worst;
}

MonotoneNorm MonotoneNorm::weighted_linf(Eigen::VectorXd w) {
  for (Index k = 0; k < w.size(); ++k) {
    if (!(w[k] > 0.0)) throw std::invalid_argument("weighted_linf: weights must be positive");
  }
  return {Kind::kWeightedLInf, std::move(w)};
}

double MonotoneNorm::operator()(const Eigen::VectorXd& p) const {
  if (kind == Kind::kL1) return p.cwiseAbs().sum();
  if (weights.size() == 0) return p.cwiseAbs().maxCoeff();
  if (weights.size() != p.size()) {
    throw std::invalid_argument("MonotoneNorm: weight length does not match vector length");
  }
  return p.cwiseAbs().cwiseQuotient(weights).maxCoeff();
}

std::size_t SiReport::count(SiViolation::Axiom axiom) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(),
      [axiom](const SiViolation& v) { return v.axiom == axiom; }));
}

namespace {

void validate(const InterferenceMapping& map, const PowerVector& p0,
              const FixedPointOptions& options) {
  if (!map.eval) throw std::invalid_argument("interference mapping has no evaluator");
  if (map.dimension != p0.size()) {
    throw std::invalid_argument("initial point has dimension " + std::to_string(p0.size()) +
                                ", mapping expects " + std::to_string(map.dimension));
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (options.max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
  if (!(options.divergence_cap > 0.0)) {
    throw std::invalid_argument("divergence cap must be positive");
  }
}

Eigen::VectorXd apply(const InterferenceMapping& map, const Eigen::VectorXd& p) {
  Eigen::VectorXd out = map(p);
  if (out.size() != map.dimension) {
    throw std::invalid_argument("mapping returned a vector of the wrong dimension");
  }
  return out;
}

// Residuals non-decreasing and iterates growing over the trailing window.
bool stalled_growth(const IterationTrace& trace, int window) {
  if (window <= 1) return false;
  const auto w = static_cast<std::size_t>(window);
  const auto& r = trace.residuals;
  if (r.size() < w) return false;
  const std::size_t start = r.size() - w;
  for (std::size_t i = start + 1; i < r.size(); ++i) {
    if (r[i] < r[i - 1]) return false;
  }
  const auto& it = trace.iterates;
  for (std::size_t i = start + 1; i < it.size(); ++i) {
    if (!(it[i].norm() > it[i - 1].norm())) return false;
  }
  return true;
}

}  // namespace

IterationTrace iterate_fixed_point(const InterferenceMapping& map, const PowerVector& p0,
                                   const FixedPointOptions& options) {
  validate(map, p0, options);
  IterationTrace trace;
  Eigen::VectorXd p = p0.values();
  trace.iterates.push_back(p);

  for (int n = 0; n < options.max_iter; ++n) {
    Eigen::VectorXd next = apply(map, p);
    const double step = (next - p).norm();
    trace.residuals.push_back(step);
    trace.iterates.push_back(next);

    if (!next.allFinite() || next.maxCoeff() > options.divergence_cap) {
      trace.status = IterationStatus::kDiverged;
      trace.solution = p;
      return trace;
    }
    if (step <= options.tol * p.norm()) {
      trace.status = IterationStatus::kConverged;
      trace.solution = p;
      return trace;
    }
    if (stalled_growth(trace, options.stall_window)) {
      trace.status = IterationStatus::kDiverged;
      trace.solution = next;
      return trace;
    }
    p = std::move(next);
  }
  trace.status = IterationStatus::kMaxIterations;
  trace.solution = p;
  return trace;
}

IterationTrace iterate_normalized_fixed_point(const InterferenceMapping& map,
                                              const MonotoneNorm& norm, double budget,
                                              const PowerVector& p0,
                                              const FixedPointOptions& options) {
  validate(map, p0, options);
  if (!(budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (norm.kind == MonotoneNorm::Kind::kWeightedLInf && norm.weights.size() != 0 &&
      norm.weights.size() != map.dimension) {
    throw std::invalid_argument("norm weights do not match the mapping dimension");
  }

  IterationTrace trace;
  Eigen::VectorXd p = p0.values();
  trace.iterates.push_back(p);

  for (int n = 0; n < options.max_iter; ++n) {
    const Eigen::VectorXd t = apply(map, p);
    Eigen::VectorXd next = (budget / norm(t)) * t;
    const double step = (next - p).norm();
    trace.residuals.push_back(step);
    trace.iterates.push_back(next);

    if (step <= options.tol * std::min(p.norm(), norm(p))) {
      trace.status = IterationStatus::kConverged;
      trace.solution = p;
      return trace;
    }
    p = std::move(next);
  }
  trace.status = IterationStatus::kMaxIterations;
  trace.solution = p;
  return trace;
}

SiReport check_si_axioms(const InterferenceMapping& map, std::size_t samples,
                         std::uint64_t seed, const SiSampling& sampling) {
  if (!map.eval) throw std::invalid_argument("interference mapping has no evaluator");
  if (samples == 0) throw std::invalid_argument("at least one sample is required");
  if (!(sampling.low > 0.0) || !(sampling.high >= sampling.low) ||
      !(sampling.max_scale > 1.0)) {
    throw std::invalid_argument("invalid SI sampling box");
  }

  const Index dim = map.dimension;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_low = std::log(sampling.low);
  const double log_span = std::log(sampling.high) - log_low;
  const double tol = sampling.tolerance;

  SiReport report;
  report.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd q(dim);
    Eigen::VectorXd d(dim);
    for (Index k = 0; k < dim; ++k) {
      q[k] = std::exp(log_low + log_span * unit(rng));
      d[k] = unit(rng) < 0.5 ? 0.0 : q[k] * 2.0 * unit(rng);
    }
    const Eigen::VectorXd p = q + d;
    const double alpha = 1.0 + (sampling.max_scale - 1.0) * (1.0 - unit(rng));

    const Eigen::VectorXd tq = apply(map, q);
    const Eigen::VectorXd tp = apply(map, p);
    const Eigen::VectorXd tap = apply(map, alpha * p);

    for (Index k = 0; k < dim; ++k) {
      if (!(tq[k] > 0.0) || !(tp[k] > 0.0) || !(tap[k] > 0.0)) {
        report.violations.push_back({SiViolation::Axiom::kPositivity, s, k, 1.0});
        continue;
      }
      const double mono_scale = std::max(tq[k], tp[k]);
      if (tp[k] - tq[k] < -tol * mono_scale) {
        report.violations.push_back(
            {SiViolation::Axiom::kMonotonicity, s, k, (tq[k] - tp[k]) / mono_scale});
      }
      const double scaled = alpha * tp[k];
      if (scaled - tap[k] < -tol * scaled) {
        report.violations.push_back(
            {SiViolation::Axiom::kScalability, s, k, (tap[k] - scaled) / scaled});
      }
    }
  }
  return report;
}

}  // namespace lsmimo
