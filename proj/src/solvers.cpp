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

#include "lsmimo/solvers.hpp"

#include <cmath>
#include <limits>

namespace lsmimo {

SystemModel make_system(const NetworkInstance& inst, const ChannelBatch& batch) {
  SystemModel sys;
  sys.instance = inst;
  sys.batch = batch;
  sys.csi = build_csi(batch, inst);
  sys.expectation = ExpectationModel::for_csi(sys.csi, inst.scenario);
  return sys;
}

UatfStats evaluate_stats(const SystemModel& sys, const RealizedBeamformers& beams) {
  return estimate_uatf_stats(sys.csi.realizations, beams, sys.expectation);
}

Evaluation evaluate(const SystemModel& sys, const Eigen::VectorXd& p) {
  Evaluation ev;
  ev.outcome = optimal_beamformers(sys.csi, sys.instance, p);
  ev.stats = evaluate_stats(sys, ev.outcome.beams);
  ev.sinr = uatf_sinrs(ev.stats, p);
  return ev;
}

namespace {

void check_gammas(const Eigen::VectorXd& gammas, Index users) {
  if (gammas.size() != users) throw std::invalid_argument("gamma length does not match K");
  for (Index k = 0; k < users; ++k) {
    if (!(gammas[k] > 0.0) || !std::isfinite(gammas[k])) {
      throw std::invalid_argument("SINR targets must be finite and strictly positive");
    }
  }
}

Eigen::VectorXd power_update(const Eigen::VectorXd& gammas, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& sinr) {
  Eigen::VectorXd t(p.size());
  for (Index k = 0; k < p.size(); ++k) {
    t[k] = sinr[k] > 0.0 ? gammas[k] * p[k] / sinr[k]
                         : std::numeric_limits<double>::infinity();
  }
  return t;
}

PowerVector initial_point(const SolverOptions& options, Index users, double budget) {
  if (options.p0) return PowerVector(*options.p0);
  return PowerVector::constant(users, budget);
}

void fill_from_evaluation(SolveResult& out, const SystemModel& sys) {
  if (!out.p_star.allFinite() || !(out.p_star.minCoeff() > 0.0)) return;
  Evaluation ev = evaluate(sys, out.p_star);
  out.design = std::move(ev.outcome.design);
  out.beams = std::move(ev.outcome.beams);
  out.stats = std::move(ev.stats);
  out.sinr = std::move(ev.sinr);
  out.rates = out.sinr.unaryExpr([](double s) { return std::log2(1.0 + s); });
}

}  // namespace

InterferenceMapping joint_mapping(const SystemModel& sys, const Eigen::VectorXd& gammas) {
  check_gammas(gammas, sys.users());
  InterferenceMapping map;
  map.dimension = sys.users();
  map.eval = [&sys, gammas](const Eigen::VectorXd& p) {
    return power_update(gammas, p, evaluate(sys, p).sinr);
  };
  return map;
}

InterferenceMapping frozen_mapping(const UatfStats& stats, const Eigen::VectorXd& gammas) {
  check_gammas(gammas, stats.users());
  InterferenceMapping map;
  map.dimension = stats.users();
  map.eval = [stats, gammas](const Eigen::VectorXd& p) {
    return power_update(gammas, p, uatf_sinrs(stats, p));
  };
  return map;
}

double sinr_target(double rate) { return std::exp2(rate) - 1.0; }

std::string to_string(Method method) {
  switch (method) {
    case Method::kJoint: return "joint";
    case Method::kPowerOnly: return "power-only";
    case Method::kShortTerm: return "short-term";
    case Method::kMrcLsfd: return "mrc-lsfd";
    case Method::kMrc: return "mrc";
  }
  return "unknown";
}

SolveResult solve_sum_power(const SystemModel& sys, const Eigen::VectorXd& gammas,
                            const SolverOptions& options) {
  const InterferenceMapping map = joint_mapping(sys, gammas);
  SolveResult out;
  out.method = Method::kJoint;
  out.scenario = sys.instance.scenario;
  out.trace = iterate_fixed_point(map, initial_point(options, sys.users(), sys.budget()),
                                  options.fixed_point);
  out.p_star = out.trace.solution;
  fill_from_evaluation(out, sys);
  return out;
}

SolveResult solve_max_min(const SystemModel& sys, const Eigen::VectorXd& gammas, double budget,
                          const SolverOptions& options) {
  const InterferenceMapping map = joint_mapping(sys, gammas);
  SolveResult out;
  out.method = Method::kJoint;
  out.scenario = sys.instance.scenario;
  out.trace = iterate_normalized_fixed_point(map, MonotoneNorm::linf(), budget,
                                             initial_point(options, sys.users(), budget),
                                             options.fixed_point);
  out.p_star = out.trace.solution;
  fill_from_evaluation(out, sys);
  return out;
}

SolveResult solve_power_only_maxmin(const SystemModel& sys, const DesignOutcome& fixed,
                                    const Eigen::VectorXd& gammas, double budget,
                                    const SolverOptions& options) {
  SolveResult out;
  out.method = Method::kPowerOnly;
  out.scenario = sys.instance.scenario;
  out.design = fixed.design;
  out.beams = fixed.beams;
  out.stats = evaluate_stats(sys, fixed.beams);
  const InterferenceMapping map = frozen_mapping(out.stats, gammas);
  out.trace = iterate_normalized_fixed_point(map, MonotoneNorm::linf(), budget,
                                             initial_point(options, sys.users(), budget),
                                             options.fixed_point);
  out.p_star = out.trace.solution;
  out.sinr = uatf_sinrs(out.stats, out.p_star);
  out.rates = out.sinr.unaryExpr([](double s) { return std::log2(1.0 + s); });
  return out;
}

ShortTermResult solve_short_term_maxmin(const SystemModel& sys, const Eigen::VectorXd& gammas,
                                        double budget, const ShortTermOptions& options) {
  if (sys.instance.scenario != Scenario::kCentralized) {
    throw std::invalid_argument("the short-term baseline requires the centralized scenario");
  }
  SolverOptions per_sample;
  per_sample.fixed_point.tol = options.tol;
  per_sample.fixed_point.max_iter = options.max_iter;

  ShortTermResult out;
  for (const auto& h : sys.batch.realizations) {
    ChannelBatch single;
    single.realizations = {h};
    single.antennas_per_ap = sys.batch.antennas_per_ap;
    single.seed = sys.batch.seed;
    const SystemModel one = make_system(sys.instance, single);
    SolveResult r = solve_max_min(one, gammas, budget, per_sample);
    out.powers.push_back(r.p_star);
    out.beams.v.push_back(std::move(r.beams.v.front()));
    out.status.push_back(r.trace.status);
  }
  out.rates = coherent_rates(sys.batch.realizations, out.beams, out.powers);
  return out;
}

Eigen::MatrixXcd lsfd_weights(const SystemModel& sys, const RealizedBeamformers& mrc_beams,
                              const Eigen::VectorXd& p) {
  Eigen::MatrixXcd weights = Eigen::MatrixXcd::Zero(sys.instance.aps(), sys.users());
  for (Index k = 0; k < sys.users(); ++k) {
    const LsfdMoments m = lsfd_moments(sys.csi.realizations, mrc_beams, sys.expectation, p, k);
    const LsfdWeights a = lsfd_optimize(m.b, m.B);
    for (std::size_t i = 0; i < m.aps.size(); ++i) {
      weights(m.aps[i], k) = a.a[static_cast<Index>(i)];
    }
  }
  return weights;
}

LsfdResult solve_lsfd_maxmin(const SystemModel& sys, const Eigen::VectorXd& gammas,
                             double budget, const LsfdOptions& options) {
  if (sys.instance.scenario != Scenario::kDistributed) {
    throw std::invalid_argument("the MRC+LSFD baseline requires the distributed scenario");
  }
  check_gammas(gammas, sys.users());
  const DesignOutcome base = mrc(sys.csi, sys.instance);
  const Index n_ant = sys.instance.antennas();
  const MonotoneNorm linf = MonotoneNorm::linf();

  LsfdResult out;
  SolveResult& res = out.result;
  res.method = Method::kMrcLsfd;
  res.scenario = sys.instance.scenario;
  res.design = base.design;
  // Start from the max-min powers of plain MRC (unit weights). Each round
  // then weakly increases the min-rate, so the result never falls below MRC.
  const IterationTrace start =
      iterate_normalized_fixed_point(frozen_mapping(evaluate_stats(sys, base.beams), gammas), linf,
                                     budget, PowerVector::constant(sys.users(), budget),
                                     options.fixed_point);
  Eigen::VectorXd p = start.solution;
  Eigen::MatrixXcd weights;

  if (options.single_loop) {
    InterferenceMapping map;
    map.dimension = sys.users();
    map.eval = [&](const Eigen::VectorXd& q) {
      const RealizedBeamformers beams =
          apply_lsfd(base.beams, n_ant, lsfd_weights(sys, base.beams, q));
      return power_update(gammas, q, uatf_sinrs(evaluate_stats(sys, beams), q));
    };
    res.trace = iterate_normalized_fixed_point(map, linf, budget, PowerVector(p),
                                               options.fixed_point);
    p = res.trace.solution;
    weights = lsfd_weights(sys, base.beams, p);
    out.rounds = 1;
  } else {
    double previous = -std::numeric_limits<double>::infinity();
    for (int round = 0; round < options.max_rounds; ++round) {
      weights = lsfd_weights(sys, base.beams, p);
      const UatfStats stats = evaluate_stats(sys, apply_lsfd(base.beams, n_ant, weights));
      res.trace = iterate_normalized_fixed_point(frozen_mapping(stats, gammas), linf, budget,
                                                 PowerVector(p), options.fixed_point);
      p = res.trace.solution;
      const double current = std::log2(1.0 + uatf_sinrs(stats, p).minCoeff());
      out.min_rate_history.push_back(current);
      ++out.rounds;
      if (current - previous < options.tol) break;
      previous = current;
    }
  }

  res.p_star = p;
  res.design.lsfd = weights;
  res.design.power = p;
  res.beams = apply_lsfd(base.beams, n_ant, weights);
  res.stats = evaluate_stats(sys, res.beams);
  res.sinr = uatf_sinrs(res.stats, p);
  res.rates = res.sinr.unaryExpr([](double s) { return std::log2(1.0 + s); });
  return out;
}

}  // namespace lsmimo
