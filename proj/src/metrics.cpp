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

#include "lsmimo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsmimo {

UndefinedBeamformer::UndefinedBeamformer(Index user)
    : std::domain_error("beamformer of user " + std::to_string(user) +
                        " is identically zero; its SINR is undefined"),
      user_(user) {}

ExpectationModel ExpectationModel::sample_mean(Index antennas, Index users) {
  ExpectationModel model;
  model.block_size = antennas;
  model.active.resize(1);
  for (Index k = 0; k < users; ++k) model.active[0].push_back(k);
  model.unknown_gain = Eigen::MatrixXd::Zero(1, users);
  return model;
}

ExpectationModel ExpectationModel::for_csi(const CsiView& csi, Scenario scenario) {
  ExpectationModel model;
  model.block_size = csi.antennas_per_ap;
  model.active = csi.served;
  model.unknown_gain = csi.unknown_gain;
  model.independent_blocks = scenario != Scenario::kCentralized;
  return model;
}

namespace {

void check_alignment(const std::vector<Eigen::MatrixXcd>& channels,
                     const RealizedBeamformers& beams, const ExpectationModel& model) {
  if (channels.empty()) throw std::invalid_argument("empty channel batch");
  if (channels.size() != beams.size()) {
    throw std::invalid_argument("channel batch and beamformers have different lengths");
  }
  const Index m = channels.front().rows();
  const Index k = channels.front().cols();
  if (model.block_size * model.blocks() != m) {
    throw std::invalid_argument("expectation model does not cover the antenna dimension");
  }
  for (std::size_t n = 0; n < channels.size(); ++n) {
    if (channels[n].rows() != m || channels[n].cols() != k || beams.v[n].rows() != m ||
        beams.v[n].cols() != k) {
      throw std::invalid_argument("realization " + std::to_string(n) +
                                  " has inconsistent dimensions");
    }
  }
  if (model.unknown_gain.size() != 0 &&
      (model.unknown_gain.rows() != model.blocks() || model.unknown_gain.cols() != k)) {
    throw std::invalid_argument("unknown_gain has the wrong shape");
  }
}

}  // namespace

UatfStats estimate_uatf_stats(const std::vector<Eigen::MatrixXcd>& channels,
                              const RealizedBeamformers& beams, const ExpectationModel& model) {
  check_alignment(channels, beams, model);
  const Index users = channels.front().cols();
  const Index blocks = model.blocks();
  const Index n_ant = model.block_size;
  const double inv = 1.0 / static_cast<double>(channels.size());

  Eigen::MatrixXd block_norm = Eigen::MatrixXd::Zero(blocks, users);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(users, users);
  Eigen::VectorXcd gain = Eigen::VectorXcd::Zero(users);
  Eigen::MatrixXcd total(users, users);

  // Per-block first and second moments (independent-blocks mode).
  std::vector<Eigen::MatrixXcd> mean_z;
  std::vector<Eigen::MatrixXd> power_z;
  if (model.independent_blocks) {
    for (const auto& idx : model.active) {
      const auto m = static_cast<Index>(idx.size());
      mean_z.push_back(Eigen::MatrixXcd::Zero(m, m));
      power_z.push_back(Eigen::MatrixXd::Zero(m, m));
    }
  }

  for (std::size_t n = 0; n < channels.size(); ++n) {
    const Eigen::MatrixXcd& h = channels[n];
    const Eigen::MatrixXcd& v = beams.v[n];
    if (!model.independent_blocks) total.setZero();
    for (Index l = 0; l < blocks; ++l) {
      const auto& idx = model.active[static_cast<std::size_t>(l)];
      const auto m = static_cast<Index>(idx.size());
      const Index r0 = l * n_ant;
      for (Index b = 0; b < m; ++b) {
        const auto vb = v.col(idx[static_cast<std::size_t>(b)]).segment(r0, n_ant);
        block_norm(l, idx[static_cast<std::size_t>(b)]) += vb.squaredNorm();
        for (Index a = 0; a < m; ++a) {
          // z = h_{l, idx[a]}^H v_{l, idx[b]}
          const std::complex<double> z =
              h.col(idx[static_cast<std::size_t>(a)]).segment(r0, n_ant).dot(vb);
          if (model.independent_blocks) {
            mean_z[static_cast<std::size_t>(l)](a, b) += z;
            power_z[static_cast<std::size_t>(l)](a, b) += std::norm(z);
          } else {
            total(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) += z;
          }
        }
      }
    }
    if (!model.independent_blocks) {
      cross += total.cwiseAbs2();
      gain += total.diagonal();
    }
  }

  if (model.independent_blocks) {
    total.setZero();
    for (Index l = 0; l < blocks; ++l) {
      const auto& idx = model.active[static_cast<std::size_t>(l)];
      if (idx.empty()) continue;
      const Eigen::MatrixXcd mz = mean_z[static_cast<std::size_t>(l)] * inv;
      total(idx, idx) += mz;
      cross(idx, idx) += power_z[static_cast<std::size_t>(l)] * inv - mz.cwiseAbs2();
    }
    cross += total.cwiseAbs2();
    gain = total.diagonal();
  } else {
    cross *= inv;
    gain *= inv;
  }

  block_norm *= inv;
  if (model.unknown_gain.size() != 0) cross += model.unknown_gain.transpose() * block_norm;

  UatfStats stats;
  stats.gain = std::move(gain);
  stats.cross = std::move(cross);
  stats.norm = block_norm.colwise().sum().transpose();
  return stats;
}

UatfStats estimate_uatf_stats(const ChannelBatch& batch, const RealizedBeamformers& beams) {
  return estimate_uatf_stats(batch.realizations, beams,
                             ExpectationModel::sample_mean(batch.total_antennas(), batch.users()));
}

namespace {

double interference_plus_noise(const UatfStats& stats, const Eigen::VectorXd& p, Index k) {
  const double signal = std::norm(stats.gain[k]);
  double den = p[k] * std::max(stats.cross(k, k) - signal, 0.0) + stats.norm[k];
  for (Index j = 0; j < stats.users(); ++j) {
    if (j != k) den += p[j] * stats.cross(j, k);
  }
  return den;
}

}  // namespace

double uatf_sinr(const UatfStats& stats, const Eigen::VectorXd& p, Index k) {
  if (p.size() != stats.users()) throw std::invalid_argument("uatf_sinr: power length mismatch");
  if (!(stats.norm[k] > 0.0)) throw UndefinedBeamformer(k);
  return p[k] * std::norm(stats.gain[k]) / interference_plus_noise(stats, p, k);
}

Eigen::VectorXd uatf_sinrs(const UatfStats& stats, const Eigen::VectorXd& p) {
  Eigen::VectorXd out(stats.users());
  for (Index k = 0; k < stats.users(); ++k) out[k] = uatf_sinr(stats, p, k);
  return out;
}

double empirical_mse(const UatfStats& stats, const Eigen::VectorXd& p, Index k) {
  if (p.size() != stats.users()) {
    throw std::invalid_argument("empirical_mse: power length mismatch");
  }
  double mse = 1.0 + stats.norm[k] - 2.0 * std::sqrt(p[k]) * stats.gain[k].real();
  for (Index j = 0; j < stats.users(); ++j) mse += p[j] * stats.cross(j, k);
  return mse;
}

double empirical_mse(const ChannelBatch& batch, const RealizedBeamformers& beams,
                     const Eigen::VectorXd& p, Index k) {
  return empirical_mse(estimate_uatf_stats(batch, beams), p, k);
}

Eigen::VectorXd uatf_rates(const UatfStats& stats, const Eigen::VectorXd& p) {
  return uatf_sinrs(stats, p).unaryExpr([](double s) { return std::log2(1.0 + s); });
}

Eigen::VectorXd coherent_rates(const std::vector<Eigen::MatrixXcd>& channels,
                               const RealizedBeamformers& beams,
                               const std::vector<Eigen::VectorXd>& powers) {
  if (channels.size() != beams.size() || channels.size() != powers.size() || channels.empty()) {
    throw std::invalid_argument("coherent_rates: batch, beamformers and powers must align");
  }
  const Index users = channels.front().cols();
  Eigen::VectorXd rates = Eigen::VectorXd::Zero(users);
  for (std::size_t n = 0; n < channels.size(); ++n) {
    const Eigen::VectorXd& p = powers[n];
    if (p.size() != users) throw std::invalid_argument("coherent_rates: power length mismatch");
    const Eigen::MatrixXcd x = channels[n].adjoint() * beams.v[n];
    for (Index k = 0; k < users; ++k) {
      const double noise = beams.v[n].col(k).squaredNorm();
      if (!(noise > 0.0)) continue;
      double interference = 0.0;
      for (Index j = 0; j < users; ++j) {
        if (j != k) interference += p[j] * std::norm(x(j, k));
      }
      rates[k] += std::log2(1.0 + p[k] * std::norm(x(k, k)) / (interference + noise));
    }
  }
  return rates / static_cast<double>(channels.size());
}

Eigen::VectorXd coherent_rates(const ChannelBatch& batch, const RealizedBeamformers& beams,
                               const Eigen::VectorXd& p) {
  return coherent_rates(batch.realizations, beams,
                        std::vector<Eigen::VectorXd>(batch.size(), p));
}

LsfdMoments lsfd_moments(const std::vector<Eigen::MatrixXcd>& channels,
                         const RealizedBeamformers& beams, const ExpectationModel& model,
                         const Eigen::VectorXd& p, Index k) {
  check_alignment(channels, beams, model);
  const Index users = channels.front().cols();
  if (p.size() != users) throw std::invalid_argument("lsfd_moments: power length mismatch");
  const Index n_ant = model.block_size;

  LsfdMoments out;
  for (Index l = 0; l < model.blocks(); ++l) {
    const auto& idx = model.active[static_cast<std::size_t>(l)];
    if (std::find(idx.begin(), idx.end(), k) != idx.end()) out.aps.push_back(l);
  }
  const auto s = static_cast<Index>(out.aps.size());
  const double inv = 1.0 / static_cast<double>(channels.size());

  // u(i, j) = v_{l_i,k}^H h_{l_i,j}
  Eigen::MatrixXcd u(s, users);
  Eigen::MatrixXcd mean_u = Eigen::MatrixXcd::Zero(s, users);
  Eigen::MatrixXd power_u = Eigen::MatrixXd::Zero(s, users);
  Eigen::MatrixXcd second = Eigen::MatrixXcd::Zero(s, s);
  Eigen::VectorXd block_norm = Eigen::VectorXd::Zero(s);
  const Eigen::VectorXd sqrt_p = p.cwiseSqrt();

  for (std::size_t n = 0; n < channels.size(); ++n) {
    u.setZero();
    for (Index i = 0; i < s; ++i) {
      const Index l = out.aps[static_cast<std::size_t>(i)];
      const auto& idx = model.active[static_cast<std::size_t>(l)];
      const auto vk = beams.v[n].block(l * n_ant, k, n_ant, 1);
      block_norm[i] += vk.squaredNorm();
      const Eigen::MatrixXcd hl = channels[n].middleRows(l * n_ant, n_ant)(Eigen::all, idx);
      const Eigen::RowVectorXcd row = vk.adjoint() * hl;
      for (std::size_t a = 0; a < idx.size(); ++a) u(i, idx[a]) = row[static_cast<Index>(a)];
    }
    mean_u += u;
    power_u += u.cwiseAbs2();
    if (!model.independent_blocks) {
      const Eigen::MatrixXcd weighted = u * sqrt_p.asDiagonal();
      second += weighted * weighted.adjoint();
    }
  }
  mean_u *= inv;
  power_u *= inv;
  block_norm *= inv;

  if (model.independent_blocks) {
    const Eigen::MatrixXcd weighted = mean_u * sqrt_p.asDiagonal();
    second = weighted * weighted.adjoint();
    for (Index i = 0; i < s; ++i) second(i, i) = power_u.row(i).dot(p);
  } else {
    second *= inv;
  }

  out.b = mean_u.col(k);
  out.B = second - p[k] * out.b * out.b.adjoint();
  for (Index i = 0; i < s; ++i) {
    const Index l = out.aps[static_cast<std::size_t>(i)];
    double scale = 1.0;
    if (model.unknown_gain.size() != 0) scale += model.unknown_gain.row(l).dot(p);
    out.B(i, i) += block_norm[i] * scale;
  }
  return out;
}

}  // namespace lsmimo
