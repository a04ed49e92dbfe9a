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

// Command-line front end for the experiment families.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lsmimo/beamforming.hpp"
#include "lsmimo/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::optional<std::string> scenario;
  std::string profile = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<int> drops;
  std::optional<int> nsim;
  std::optional<unsigned> threads;
  std::string out = ".";
  std::optional<std::string> config;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario, "Restrict to one scenario")
      ->check(CLI::IsMember({"small-cells", "distributed", "centralized"}));
  cmd->add_option("--profile", f.profile, "Scale profile")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--drops", f.drops, "Number of user drops")->check(CLI::PositiveNumber);
  cmd->add_option("--nsim", f.nsim, "Training realizations per drop")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--config", f.config, "key = value file overriding defaults")
      ->check(CLI::ExistingFile);
}

lsmimo::ExperimentConfig build_config(const CommonFlags& f, lsmimo::ExperimentKind kind,
                                      int default_drops) {
  lsmimo::ExperimentConfig cfg =
      f.profile == "paper" ? lsmimo::ExperimentConfig::paper() : lsmimo::ExperimentConfig::desk();
  cfg.kind = kind;
  if (default_drops > 0) cfg.drops = default_drops;
  if (f.config) lsmimo::apply_config_file(cfg, *f.config);
  if (f.scenario) cfg.scenario = lsmimo::parse_scenario(*f.scenario);
  if (f.seed) cfg.seed = *f.seed;
  if (f.drops) cfg.drops = *f.drops;
  if (f.nsim) cfg.network.n_sim = *f.nsim;
  if (f.threads) cfg.threads = *f.threads;
  cfg.out_dir = f.out;
  cfg.validate();
  return cfg;
}

void print_quantiles(const lsmimo::RateTable& table) {
  for (const auto& s : lsmimo::cdf_table(table)) {
    std::printf("%-11s %-12s %-9s  q10 %.3f  q50 %.3f  q90 %.3f  (n=%zu)\n",
                lsmimo::to_string(s.method).c_str(), lsmimo::to_string(s.scenario).c_str(),
                s.bound.c_str(), s.quantile(0.1), s.quantile(0.5), s.quantile(0.9),
                s.samples.size());
  }
}

std::string rates_csv(const lsmimo::RateTable& table) {
  std::ostringstream os;
  lsmimo::write_rates_csv(os, table);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint long-term power control and beamforming experiments"};
  app.require_subcommand(1);

  CommonFlags converge_flags, cdf_flags, cc_flags, cd_flags, check_flags;
  std::string problem = "maxmin";
  auto* converge = app.add_subcommand("converge", "Fixed-point convergence traces");
  add_common(converge, converge_flags);
  converge->add_option("--problem", problem, "qos (sum power) or maxmin")
      ->check(CLI::IsMember({"qos", "maxmin"}))
      ->capture_default_str();
  auto* cdf = app.add_subcommand("cdf", "Rate CDFs of the joint solution, all scenarios");
  add_common(cdf, cdf_flags);
  auto* cc = app.add_subcommand("compare-centralized", "Joint vs short-term vs power-only");
  add_common(cc, cc_flags);
  auto* cd = app.add_subcommand("compare-distributed", "Joint vs power-only vs MRC+LSFD");
  add_common(cd, cd_flags);
  auto* check = app.add_subcommand("check", "Invariant suite on one drop");
  add_common(check, check_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    using lsmimo::ExperimentKind;
    if (*converge) {
      const auto kind =
          problem == "qos" ? ExperimentKind::kConvergeQos : ExperimentKind::kConvergeMaxMin;
      const auto cfg = build_config(converge_flags, kind, 1);
      const auto run = lsmimo::run_convergence(cfg);
      std::ostringstream os;
      lsmimo::write_convergence_csv(os, run);
      const auto path = lsmimo::write_artifact(cfg, "convergence_" + run.problem + ".csv", os.str());
      for (const auto& s : run.series) {
        std::printf("%-12s %-15s iterations %4zu  tail ratio %.4f\n",
                    lsmimo::to_string(s.scenario).c_str(),
                    lsmimo::to_string(s.trace.status).c_str(), s.trace.iterations(), s.tail_ratio);
      }
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*cdf) {
      const auto cfg = build_config(cdf_flags, ExperimentKind::kCdf, 0);
      const auto table = lsmimo::run_cdf(cfg);
      const auto path = lsmimo::write_artifact(cfg, "rates_cdf.csv", rates_csv(table));
      print_quantiles(table);
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*cc) {
      const auto cfg = build_config(cc_flags, ExperimentKind::kCompareCentralized, 0);
      const auto table = lsmimo::run_compare_centralized(cfg);
      const auto path =
          lsmimo::write_artifact(cfg, "rates_compare_centralized.csv", rates_csv(table));
      print_quantiles(table);
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*cd) {
      const auto cfg = build_config(cd_flags, ExperimentKind::kCompareDistributed, 0);
      const auto table = lsmimo::run_compare_distributed(cfg);
      const auto path =
          lsmimo::write_artifact(cfg, "rates_compare_distributed.csv", rates_csv(table));
      print_quantiles(table);
      std::printf("wrote %s\n", path.string().c_str());
      const auto bad = lsmimo::distributed_ordering_violations(table);
      if (!bad.empty()) {
        std::cerr << "error: min-rate ordering mrc-lsfd <= power-only <= joint fails on "
                  << bad.size() << " drop(s), first " << bad.front() << '\n';
        return kExitNumerical;
      }
    } else if (*check) {
      const auto cfg = build_config(check_flags, ExperimentKind::kCdf, 1);
      return lsmimo::run_invariant_suite(cfg, std::cout) ? kExitOk : kExitNumerical;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const lsmimo::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const lsmimo::UndefinedBeamformer& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
