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

#include "lsmimo/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace lsmimo {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'S', 'M', 'B', 'A', 'T', 'C', 'H'};
constexpr std::uint32_t kBatchVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "batch container assumes a little-endian host");

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

template <class T>
void put(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw io_error(path, "truncated file");
  return value;
}

}  // namespace

void write_batch(const std::filesystem::path& path, const ChannelBatch& batch) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error(path, "cannot open for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kBatchVersion);
  put<std::int64_t>(os, static_cast<std::int64_t>(batch.size()));
  put<std::int64_t>(os, batch.total_antennas());
  put<std::int64_t>(os, batch.users());
  put<std::int64_t>(os, batch.antennas_per_ap);
  put<std::uint64_t>(os, batch.seed);
  for (const auto& h : batch.realizations) {
    for (Index r = 0; r < h.rows(); ++r) {
      for (Index c = 0; c < h.cols(); ++c) {
        put<double>(os, h(r, c).real());
        put<double>(os, h(r, c).imag());
      }
    }
  }
  if (!os) throw io_error(path, "write failed");
}

ChannelBatch read_batch(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error(path, "cannot open for reading");
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw io_error(path, "not a channel batch file");
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kBatchVersion) {
    throw io_error(path, "unsupported batch version " + std::to_string(version));
  }
  const auto n_sim = get<std::int64_t>(is, path);
  const auto rows = get<std::int64_t>(is, path);
  const auto cols = get<std::int64_t>(is, path);
  const auto per_ap = get<std::int64_t>(is, path);
  ChannelBatch batch;
  batch.seed = get<std::uint64_t>(is, path);
  if (n_sim < 0 || rows < 0 || cols < 0 || per_ap <= 0 || rows % per_ap != 0) {
    throw io_error(path, "corrupt batch header");
  }
  batch.antennas_per_ap = per_ap;
  batch.realizations.reserve(static_cast<std::size_t>(n_sim));
  for (std::int64_t n = 0; n < n_sim; ++n) {
    Eigen::MatrixXcd h(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        const double re = get<double>(is, path);
        const double im = get<double>(is, path);
        h(r, c) = {re, im};
      }
    }
    batch.realizations.push_back(std::move(h));
  }
  return batch;
}

namespace {

nlohmann::json config_to_json(const NetworkConfig& c) {
  return {{"users", c.users},
          {"aps", c.aps},
          {"antennas", c.antennas},
          {"area_side", c.area_side},
          {"cluster_size", c.cluster_size},
          {"pathloss_a", c.pathloss_a},
          {"pathloss_b", c.pathloss_b},
          {"shadow_std_db", c.shadow_std_db},
          {"shadow_corr_dist", c.shadow_corr_dist},
          {"bandwidth_hz", c.bandwidth_hz},
          {"noise_figure_db", c.noise_figure_db},
          {"height_diff", c.height_diff},
          {"power_dbm", c.power_dbm},
          {"n_sim", c.n_sim}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  j.at("users").get_to(c.users);
  j.at("aps").get_to(c.aps);
  j.at("antennas").get_to(c.antennas);
  j.at("area_side").get_to(c.area_side);
  j.at("cluster_size").get_to(c.cluster_size);
  j.at("pathloss_a").get_to(c.pathloss_a);
  j.at("pathloss_b").get_to(c.pathloss_b);
  j.at("shadow_std_db").get_to(c.shadow_std_db);
  j.at("shadow_corr_dist").get_to(c.shadow_corr_dist);
  j.at("bandwidth_hz").get_to(c.bandwidth_hz);
  j.at("noise_figure_db").get_to(c.noise_figure_db);
  j.at("height_diff").get_to(c.height_diff);
  j.at("power_dbm").get_to(c.power_dbm);
  j.at("n_sim").get_to(c.n_sim);
  return c;
}

nlohmann::json points_to_json(const std::vector<Point>& pts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

std::vector<Point> points_from_json(const nlohmann::json& j) {
  std::vector<Point> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

void write_instance(const std::filesystem::path& path, const NetworkInstance& inst) {
  nlohmann::json gain = nlohmann::json::array();
  for (Index l = 0; l < inst.aps(); ++l) {
    std::vector<double> row(static_cast<std::size_t>(inst.users()));
    for (Index k = 0; k < inst.users(); ++k) row[static_cast<std::size_t>(k)] = inst.gain(l, k);
    gain.push_back(row);
  }
  const nlohmann::json j = {{"format", "lsmimo-instance"},
                            {"version", 1},
                            {"config", config_to_json(inst.config)},
                            {"scenario", to_string(inst.scenario)},
                            {"seed", inst.seed},
                            {"ap_positions", points_to_json(inst.ap_positions)},
                            {"user_positions", points_to_json(inst.user_positions)},
                            {"gain", gain},
                            {"clusters", inst.clusters}};
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw io_error(path, "cannot open for writing");
  os << j.dump(1) << '\n';
  if (!os) throw io_error(path, "write failed");
}

NetworkInstance read_instance(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw io_error(path, "cannot open for reading");
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    if (j.at("format") != "lsmimo-instance" || j.at("version") != 1) {
      throw io_error(path, "not an lsmimo instance file");
    }
    NetworkInstance inst;
    inst.config = config_from_json(j.at("config"));
    inst.scenario = parse_scenario(j.at("scenario").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.ap_positions = points_from_json(j.at("ap_positions"));
    inst.user_positions = points_from_json(j.at("user_positions"));
    const auto& gain = j.at("gain");
    const auto aps = static_cast<Index>(gain.size());
    const Index users = aps ? static_cast<Index>(gain.at(0).size()) : 0;
    inst.gain.resize(aps, users);
    for (Index l = 0; l < aps; ++l) {
      const auto& row = gain.at(static_cast<std::size_t>(l));
      if (static_cast<Index>(row.size()) != users) throw io_error(path, "ragged gain matrix");
      for (Index k = 0; k < users; ++k) inst.gain(l, k) = row.at(static_cast<std::size_t>(k));
    }
    inst.clusters = j.at("clusters").get<std::vector<std::vector<Index>>>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path, std::string("malformed instance: ") + e.what());
  }
}

}  // namespace lsmimo
