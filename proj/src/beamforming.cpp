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

#include "lsmimo/beamforming.hpp"

#include "linalg.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lsmimo {

NumericalFailure::NumericalFailure(const std::string& what, Index user)
    : std::runtime_error(user >= 0 ? what + " (user " + std::to_string(user) + ")" : what),
      user_(user) {}

namespace {

void check_power(const Eigen::VectorXd& p, Index users) {
  if (p.size() != users) throw std::invalid_argument("power vector length does not match K");
  for (Index k = 0; k < users; ++k) {
    if (!(p[k] > 0.0) || !std::isfinite(p[k])) {
      throw std::invalid_argument("power vector must be finite and strictly positive");
    }
  }
}

void check_instance(const CsiView& csi, const NetworkInstance& inst) {
  if (csi.users() != inst.users() || csi.aps() != inst.aps() ||
      csi.antennas_per_ap != inst.antennas()) {
    throw std::invalid_argument("CSI view does not match the network instance");
  }
}

/// Local MMSE stage of one AP restricted to the users it serves.
struct LocalStage {
  std::vector<Index> served;
  std::vector<Eigen::MatrixXcd> x;  // per realization, N x |served|
  Eigen::MatrixXcd pi;              // |served| x |served|
};

LocalStage compute_local_stage(const CsiView& csi, const Eigen::VectorXd& p, Index l,
                               double sigma) {
  const Index n_ant = csi.antennas_per_ap;
  LocalStage stage;
  stage.served = csi.served[static_cast<std::size_t>(l)];
  const auto s = static_cast<Index>(stage.served.size());
  stage.pi = Eigen::MatrixXcd::Zero(s, s);
  if (s == 0) return stage;
  const Eigen::VectorXd sqrt_p = p(stage.served).cwiseSqrt();
  stage.x.reserve(csi.size());
  Eigen::MatrixXcd w(n_ant, s);
  Eigen::MatrixXcd a(n_ant, n_ant);
  for (const auto& h : csi.realizations) {
    for (Index b = 0; b < s; ++b) {
      w.col(b) = h.block(l * n_ant, stage.served[static_cast<std::size_t>(b)], n_ant, 1) *
                 sqrt_p[b];
    }
    a.noalias() = w * w.adjoint();
    a.diagonal().array() += sigma;
    Eigen::MatrixXcd x = w;
    if (!detail::cholesky_solve_in_place(a, x)) {
      throw NumericalFailure("local MMSE system of AP " + std::to_string(l) +
                                 " is not positive definite",
                             -1);
    }
    stage.pi.noalias() += w.adjoint() * x;
    stage.x.push_back(std::move(x));
  }
  stage.pi /= static_cast<double>(csi.size());
  return stage;
}

std::vector<LocalStage> compute_local_stages(const CsiView& csi, const Eigen::VectorXd& p,
                                             const Eigen::VectorXd& sigma) {
  std::vector<LocalStage> stages;
  stages.reserve(static_cast<std::size_t>(csi.aps()));
  for (Index l = 0; l < csi.aps(); ++l) stages.push_back(compute_local_stage(csi, p, l, sigma[l]));
  return stages;
}

RealizedBeamformers apply_coefficients(const CsiView& csi, const std::vector<LocalStage>& stages,
                                       const std::vector<Eigen::MatrixXcd>& coefficients) {
  const Index n_ant = csi.antennas_per_ap;
  std::vector<Eigen::MatrixXcd> rows(stages.size());
  for (std::size_t l = 0; l < stages.size(); ++l) {
    if (!stages[l].served.empty()) rows[l] = coefficients[l](stages[l].served, stages[l].served);
  }
  RealizedBeamformers beams;
  beams.v.reserve(csi.size());
  for (std::size_t n = 0; n < csi.size(); ++n) {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(csi.total_antennas(), csi.users());
    for (Index l = 0; l < csi.aps(); ++l) {
      const LocalStage& stage = stages[static_cast<std::size_t>(l)];
      if (stage.served.empty()) continue;
      // Column k of coefficients[l] vanishes unless l serves k.
      const Eigen::MatrixXcd block = stage.x[n].lazyProduct(rows[static_cast<std::size_t>(l)]);
      for (std::size_t b = 0; b < stage.served.size(); ++b) {
        v.block(l * n_ant, stage.served[b], n_ant, 1) = block.col(static_cast<Index>(b));
      }
    }
    beams.v.push_back(std::move(v));
  }
  return beams;
}

RealizedBeamformers centralized_beams(const CsiView& csi, const Eigen::VectorXd& p,
                                      const Eigen::VectorXd& sigma) {
  const Index n_ant = csi.antennas_per_ap;
  const Index m = csi.total_antennas();
  const Index users = csi.users();
  const Eigen::VectorXd sqrt_p = p.cwiseSqrt();

  // Users with the same cluster share one factorization per realization.
  std::map<std::vector<Index>, std::vector<Index>> groups;
  for (Index k = 0; k < users; ++k) groups[csi.clusters[static_cast<std::size_t>(k)]].push_back(k);
  struct Group {
    std::vector<Index> aps;
    std::vector<Index> rows;
    std::vector<Index> users;
    Eigen::VectorXd diag;
    Eigen::MatrixXcd a;  // workspace
    Eigen::MatrixXcd x;  // workspace
  };
  std::vector<Group> plan;
  for (const auto& [aps, members] : groups) {
    Group g{aps, {}, members, Eigen::VectorXd(static_cast<Index>(aps.size()) * n_ant), {}, {}};
    Index r = 0;
    for (Index l : aps) {
      for (Index a = 0; a < n_ant; ++a, ++r) {
        g.rows.push_back(l * n_ant + a);
        g.diag[r] = sigma[l];
      }
    }
    g.a.resize(r, r);
    g.x.resize(r, static_cast<Index>(members.size()));
    plan.push_back(std::move(g));
  }

  RealizedBeamformers beams;
  beams.v.reserve(csi.size());
  Eigen::MatrixXcd gram(m, m);
  for (const auto& h : csi.realizations) {
    // Gram of P^{1/2}-weighted masked channels; column k lives on its cluster.
    gram.setZero();
    for (Index k = 0; k < users; ++k) {
      const auto& cluster = csi.clusters[static_cast<std::size_t>(k)];
      for (Index l1 : cluster) {
        const auto w1 = h.block(l1 * n_ant, k, n_ant, 1);
        for (Index l2 : cluster) {
          if (l2 > l1) break;  // lower triangle suffices
          const auto w2 = h.block(l2 * n_ant, k, n_ant, 1);
          gram.block(l1 * n_ant, l2 * n_ant, n_ant, n_ant).noalias() +=
              p[k] * (w1 * w2.adjoint());
        }
      }
    }
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(m, users);
    for (Group& g : plan) {
      const auto q = static_cast<Index>(g.rows.size());
      for (Index c = 0; c < q; ++c) {
        for (Index r = c; r < q; ++r) g.a(r, c) = gram(g.rows[r], g.rows[c]);
        g.a(c, c) += g.diag[c];
      }
      for (std::size_t u = 0; u < g.users.size(); ++u) {
        const Index k = g.users[u];
        for (Index r = 0; r < q; ++r) g.x(r, static_cast<Index>(u)) = h(g.rows[r], k) * sqrt_p[k];
      }
      if (!detail::cholesky_solve_in_place(g.a, g.x)) {
        throw NumericalFailure("centralized MMSE system is not positive definite", g.users[0]);
      }
      for (std::size_t u = 0; u < g.users.size(); ++u) {
        for (Index r = 0; r < q; ++r) v(g.rows[r], g.users[u]) = g.x(r, static_cast<Index>(u));
      }
    }
    beams.v.push_back(std::move(v));
  }
  return beams;
}

}  // namespace

Eigen::MatrixXcd local_mmse(const Eigen::MatrixXcd& h, const Eigen::VectorXd& p, double sigma) {
  if (p.size() != h.cols()) throw std::invalid_argument("local_mmse: power length mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("local_mmse: sigma must be positive");
  const Eigen::MatrixXcd w = h * p.cwiseSqrt().asDiagonal();
  Eigen::MatrixXcd a = w * w.adjoint();
  a.diagonal().array() += sigma;
  Eigen::MatrixXcd x = w;
  if (!detail::cholesky_solve_in_place(a, x)) {
    throw NumericalFailure("local MMSE system is not positive definite", -1);
  }
  return x;
}

std::vector<Eigen::MatrixXcd> local_mmse_stage(const CsiView& csi, const Eigen::VectorXd& p,
                                               Index l) {
  check_power(p, csi.users());
  if (l < 0 || l >= csi.aps()) throw std::invalid_argument("local_mmse_stage: AP out of range");
  const LocalStage stage = compute_local_stage(csi, p, l, csi.error_scale(p)[l]);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(csi.size());
  for (std::size_t n = 0; n < csi.size(); ++n) {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(csi.antennas_per_ap, csi.users());
    if (!stage.served.empty()) v(Eigen::all, stage.served) = stage.x[n];
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

std::vector<std::vector<Index>> full_support(const std::vector<Eigen::MatrixXcd>& pi) {
  std::vector<std::vector<Index>> support(pi.size());
  for (std::size_t l = 0; l < pi.size(); ++l) {
    support[l].resize(static_cast<std::size_t>(pi[l].rows()));
    std::iota(support[l].begin(), support[l].end(), Index{0});
  }
  return support;
}

}  // namespace

TeamSystem::TeamSystem(std::vector<Eigen::MatrixXcd> pi)
    : TeamSystem(pi, full_support(pi)) {}

// Reduced form of the c-system: with d = sum_j Pi_j c_j,
// c_l = (I - Pi_l)^{-1} (e_k - d) and (I + sum_j T_j) d = sum_j T_j e_k,
// where T_j = Pi_j (I - Pi_j)^{-1}.
TeamSystem::TeamSystem(std::vector<Eigen::MatrixXcd> pi, std::vector<std::vector<Index>> support)
    : pi_(std::move(pi)), support_(std::move(support)) {
  if (pi_.empty() || pi_.size() != support_.size()) {
    throw std::invalid_argument("TeamSystem needs one support set per AP");
  }
  const Index users = pi_.front().rows();
  resolvent_.resize(pi_.size());
  t_.resize(pi_.size());
  for (std::size_t l = 0; l < pi_.size(); ++l) {
    if (pi_[l].rows() != users || pi_[l].cols() != users) {
      throw std::invalid_argument("Pi matrices must all be K x K");
    }
    const auto& served = support_[l];
    const auto s = static_cast<Index>(served.size());
    if (s == 0) continue;
    Eigen::MatrixXcd block = pi_[l](served, served);
    Eigen::MatrixXcd complement = Eigen::MatrixXcd::Identity(s, s) - block;
    Eigen::MatrixXcd inverse = Eigen::MatrixXcd::Identity(s, s);
    if (!detail::cholesky_solve_in_place(complement, inverse)) {
      throw NumericalFailure("I - Pi_" + std::to_string(l) + " is not positive definite", -1);
    }
    t_[l] = block * inverse;
    resolvent_[l] = std::move(inverse);
  }
}

Eigen::MatrixXcd TeamSystem::solve(const std::vector<Index>& cluster, Index k) const {
  const Index users = pi_.front().rows();
  if (k < 0 || k >= users) throw std::invalid_argument("user index out of range");
  Eigen::MatrixXcd s_sum = Eigen::MatrixXcd::Zero(users, users);
  for (Index j : cluster) {
    if (j < 0 || j >= static_cast<Index>(pi_.size())) throw std::invalid_argument("AP index out of range");
    const auto& served = support_[static_cast<std::size_t>(j)];
    if (!served.empty()) s_sum(served, served) += t_[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXcd system = s_sum;
  system.diagonal().array() += 1.0;
  Eigen::MatrixXcd d = s_sum.col(k);
  if (!detail::cholesky_solve_in_place(system, d)) throw NumericalFailure("singular team system", k);
  Eigen::VectorXcd rhs = -d.col(0);
  rhs[k] += 1.0;  // e_k - d
  if (!rhs.allFinite()) throw NumericalFailure("singular team system", k);
  Eigen::MatrixXcd out(users, static_cast<Index>(cluster.size()));
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const auto l = static_cast<std::size_t>(cluster[i]);
    Eigen::VectorXcd c = rhs;
    if (!support_[l].empty()) c(support_[l]) = resolvent_[l] * rhs(support_[l]);
    out.col(static_cast<Index>(i)) = c;
  }
  return out;
}

DesignOutcome team_mmse_design(const CsiView& csi, const NetworkInstance& inst,
                               const Eigen::VectorXd& p) {
  check_instance(csi, inst);
  check_power(p, csi.users());
  if (inst.scenario == Scenario::kCentralized) {
    throw std::invalid_argument("team_mmse_design requires local CSI");
  }
  const Index users = csi.users();
  const Index aps = csi.aps();

  BeamformerDesign design;
  design.scenario = inst.scenario;
  design.power = p;
  design.error_scale = csi.error_scale(p);
  const std::vector<LocalStage> stages = compute_local_stages(csi, p, design.error_scale);

  std::vector<Eigen::MatrixXcd> pi(static_cast<std::size_t>(aps), Eigen::MatrixXcd::Zero(users, users));
  std::vector<std::vector<Index>> support(static_cast<std::size_t>(aps));
  for (Index l = 0; l < aps; ++l) {
    const LocalStage& stage = stages[static_cast<std::size_t>(l)];
    support[static_cast<std::size_t>(l)] = stage.served;
    if (!stage.served.empty()) pi[static_cast<std::size_t>(l)](stage.served, stage.served) = stage.pi;
  }
  const TeamSystem system(std::move(pi), std::move(support));

  design.coefficients.assign(static_cast<std::size_t>(aps), Eigen::MatrixXcd::Zero(users, users));
  for (Index k = 0; k < users; ++k) {
    const auto& cluster = csi.clusters[static_cast<std::size_t>(k)];
    const Eigen::MatrixXcd c = system.solve(cluster, k);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
      design.coefficients[static_cast<std::size_t>(cluster[i])].col(k) = c.col(static_cast<Eigen::Index>(i));
    }
  }
  design.pi = system.pi();

  DesignOutcome out;
  out.beams = apply_coefficients(csi, stages, design.coefficients);
  out.design = std::move(design);
  return out;
}

double team_residual(const BeamformerDesign& design, const CsiView& csi, Index k) {
  if (design.coefficients.empty()) throw std::invalid_argument("design has no team stage");
  const auto& cluster = csi.clusters[static_cast<std::size_t>(k)];
  const Index users = csi.users();
  Eigen::VectorXcd d = Eigen::VectorXcd::Zero(users);
  for (Index j : cluster) {
    d += design.pi[static_cast<std::size_t>(j)] * design.coefficients[static_cast<std::size_t>(j)].col(k);
  }
  double worst = 0.0;
  for (Index l : cluster) {
    const auto& pi_l = design.pi[static_cast<std::size_t>(l)];
    const auto c_l = design.coefficients[static_cast<std::size_t>(l)].col(k);
    Eigen::VectorXcd r = c_l + d - pi_l * c_l;
    r[k] -= 1.0;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

DesignOutcome centralized_mmse(const CsiView& csi, const NetworkInstance& inst,
                               const Eigen::VectorXd& p) {
  check_instance(csi, inst);
  check_power(p, csi.users());
  if (inst.scenario != Scenario::kCentralized) {
    throw std::invalid_argument("centralized_mmse requires the centralized scenario");
  }
  DesignOutcome out;
  out.design.scenario = inst.scenario;
  out.design.power = p;
  out.design.error_scale = csi.error_scale(p);
  out.beams = centralized_beams(csi, p, out.design.error_scale);
  return out;
}

DesignOutcome mrc(const CsiView& csi, const NetworkInstance& inst) {
  check_instance(csi, inst);
  DesignOutcome out;
  out.design.scenario = inst.scenario;
  out.design.kind = CombinerKind::kMrc;
  out.beams.v = csi.realizations;
  return out;
}

DesignOutcome optimal_beamformers(const CsiView& csi, const NetworkInstance& inst,
                                  const Eigen::VectorXd& p) {
  if (inst.scenario == Scenario::kCentralized) return centralized_mmse(csi, inst, p);
  return team_mmse_design(csi, inst, p);
}

RealizedBeamformers realize(const BeamformerDesign& design, const CsiView& csi) {
  RealizedBeamformers beams;
  if (design.kind == CombinerKind::kMrc) {
    beams.v = csi.realizations;
  } else if (design.scenario == Scenario::kCentralized) {
    check_power(design.power, csi.users());
    beams = centralized_beams(csi, design.power, design.error_scale);
  } else {
    check_power(design.power, csi.users());
    if (design.coefficients.size() != static_cast<std::size_t>(csi.aps())) {
      throw std::invalid_argument("design does not match the CSI view");
    }
    beams = apply_coefficients(csi, compute_local_stages(csi, design.power, design.error_scale),
                               design.coefficients);
  }
  if (design.lsfd.size() != 0) beams = apply_lsfd(beams, csi.antennas_per_ap, design.lsfd);
  return beams;
}

LsfdWeights lsfd_optimize(const Eigen::VectorXcd& b, const Eigen::MatrixXcd& B) {
  const Index s = b.size();
  if (s == 0 || B.rows() != s || B.cols() != s) {
    throw std::invalid_argument("lsfd_optimize: b and B must be nonempty and aligned");
  }
  LsfdWeights out;
  if (s == 1) {
    out.a = Eigen::VectorXcd::Ones(1);
    return out;
  }
  const Eigen::MatrixXcd herm = 0.5 * (B + B.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(std::abs(lambda.maxCoeff()), 1e-300);
  if (lambda.minCoeff() > cutoff) {
    out.a = herm.llt().solve(b);
    return out;
  }
  std::cerr << "warning: LSFD moment matrix is singular; using the pseudo-inverse\n";
  out.used_pseudo_inverse = true;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s);
  for (Index i = 0; i < s; ++i) {
    if (lambda[i] > cutoff) inv[i] = 1.0 / lambda[i];
  }
  const Eigen::MatrixXcd& u = eig.eigenvectors();
  out.a = u * inv.asDiagonal() * (u.adjoint() * b);
  return out;
}

RealizedBeamformers apply_lsfd(const RealizedBeamformers& beams, Index antennas_per_ap,
                               const Eigen::MatrixXcd& weights) {
  RealizedBeamformers out = beams;
  for (auto& v : out.v) {
    if (weights.rows() * antennas_per_ap != v.rows() || weights.cols() != v.cols()) {
      throw std::invalid_argument("apply_lsfd: weight shape does not match beamformers");
    }
    for (Index k = 0; k < v.cols(); ++k) {
      for (Index l = 0; l < weights.rows(); ++l) {
        v.block(l * antennas_per_ap, k, antennas_per_ap, 1) *= weights(l, k);
      }
    }
  }
  return out;
}

}  // namespace lsmimo
