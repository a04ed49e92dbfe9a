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

#include <filesystem>

#include "lsmimo/network.hpp"

namespace lsmimo {

/// Binary batch container, little-endian:
///   "LSMBATCH" | u32 version (=1) | i64 n_sim | i64 rows | i64 cols |
///   i64 antennas_per_ap | u64 seed | n_sim * rows * cols * (f64 re, f64 im)
/// Each realization is stored row-major.
void write_batch(const std::filesystem::path& path, const ChannelBatch& batch);
ChannelBatch read_batch(const std::filesystem::path& path);

/// Instance as JSON (config, positions, gains, clusters, scenario, seed).
void write_instance(const std::filesystem::path& path, const NetworkInstance& inst);
NetworkInstance read_instance(const std::filesystem::path& path);

}  // namespace lsmimo
