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

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "lsmimo/io.hpp"
#include "test_util.hpp"

namespace lsmimo {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lsmimo_io_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(BatchIo, RoundTripIsBitIdentical) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto cfg = test::tiny_config(3 + static_cast<int>(seed), 4, 2, 2, 5);
    const auto inst = generate_instance(cfg, Scenario::kDistributed, seed);
    const ChannelBatch batch = sample_channels(inst, cfg.n_sim, seed * 7);
    const fs::path path = temp_file("batch_" + std::to_string(seed) + ".bin");
    write_batch(path, batch);
    const ChannelBatch back = read_batch(path);
    EXPECT_EQ(back.seed, batch.seed);
    EXPECT_EQ(back.antennas_per_ap, batch.antennas_per_ap);
    ASSERT_EQ(back.size(), batch.size());
    for (std::size_t n = 0; n < batch.size(); ++n) EXPECT_EQ(back.realizations[n], batch.realizations[n]);
  }
}

TEST(BatchIo, RejectsForeignAndTruncatedFiles) {
  const fs::path bad = temp_file("not_a_batch.bin");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "hello world, definitely not a batch";
  }
  try {
    read_batch(bad);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
  }

  std::mt19937_64 rng(1);
  const ChannelBatch batch = test::make_batch({test::random_complex(4, 2, rng)}, 2);
  const fs::path path = temp_file("truncated.bin");
  write_batch(path, batch);
  fs::resize_file(path, fs::file_size(path) - 8);
  EXPECT_THROW(read_batch(path), std::runtime_error);
  EXPECT_THROW(read_batch(temp_file("missing.bin")), std::runtime_error);
}

TEST(InstanceIo, RoundTrip) {
  const auto inst = generate_instance(NetworkConfig::desk(), Scenario::kCentralized, 12);
  const fs::path path = temp_file("instance.json");
  write_instance(path, inst);
  const NetworkInstance back = read_instance(path);
  EXPECT_EQ(back.gain, inst.gain);
  EXPECT_EQ(back.clusters, inst.clusters);
  EXPECT_EQ(back.scenario, inst.scenario);
  EXPECT_EQ(back.seed, inst.seed);
  EXPECT_EQ(back.config.users, inst.config.users);
  EXPECT_EQ(back.config.shadow_std_db, inst.config.shadow_std_db);
  ASSERT_EQ(back.user_positions.size(), inst.user_positions.size());
  EXPECT_EQ(back.user_positions[3].x, inst.user_positions[3].x);
}

TEST(InstanceIo, RejectsWrongFormat) {
  const fs::path path = temp_file("wrong.json");
  {
    std::ofstream out(path);
    out << R"({"format": "something-else", "version": 1})";
  }
  EXPECT_THROW(read_instance(path), std::runtime_error);
}

}  // namespace
}  // namespace lsmimo
