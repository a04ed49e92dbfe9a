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

#include "lsmimo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace lsmimo {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConvergeQos: return "converge-qos";
    case ExperimentKind::kConvergeMaxMin: return "converge-maxmin";
    case ExperimentKind::kCdf: return "cdf";
    case ExperimentKind::kCompareCentralized: return "compare-centralized";
    case ExperimentKind::kCompareDistributed: return "compare-distributed";
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::desk() { return {}; }

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig cfg;
  cfg.network = NetworkConfig::paper();
  cfg.drops = 100;
  cfg.profile = "paper";
  return cfg;
}

void ExperimentConfig::validate() const {
  network.validate();
  if (drops < 1) throw std::invalid_argument("drops must be >= 1");
  if (!(qos_rate > 0.0)) throw std::invalid_argument("qos_rate must be positive");
  if (!(fixed_point.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (fixed_point.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

std::vector<Scenario> ExperimentConfig::scenarios() const {
  if (scenario) return {*scenario};
  return {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& where) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument(where + ": expected a number, got '" + value + "'");
  }
  return out;
}

long long parse_integer(const std::string& value, const std::string& where) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument(where + ": expected an integer, got '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& value, const std::string& where) {
  const long long v = parse_integer(value, where);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(where + ": value out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(number);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    NetworkConfig& n = cfg.network;
    if (key == "users") n.users = parse_int(value, where);
    else if (key == "aps") n.aps = parse_int(value, where);
    else if (key == "antennas") n.antennas = parse_int(value, where);
    else if (key == "area_side") n.area_side = parse_double(value, where);
    else if (key == "cluster_size") n.cluster_size = parse_int(value, where);
    else if (key == "pathloss_a") n.pathloss_a = parse_double(value, where);
    else if (key == "pathloss_b") n.pathloss_b = parse_double(value, where);
    else if (key == "shadow_std_db") n.shadow_std_db = parse_double(value, where);
    else if (key == "shadow_corr_dist") n.shadow_corr_dist = parse_double(value, where);
    else if (key == "bandwidth_hz") n.bandwidth_hz = parse_double(value, where);
    else if (key == "noise_figure_db") n.noise_figure_db = parse_double(value, where);
    else if (key == "height_diff") n.height_diff = parse_double(value, where);
    else if (key == "power_dbm") n.power_dbm = parse_double(value, where);
    else if (key == "n_sim") n.n_sim = parse_int(value, where);
    else if (key == "drops") cfg.drops = parse_int(value, where);
    else if (key == "seed") {
      const long long s = parse_integer(value, where);
      if (s < 0) throw std::invalid_argument(where + ": seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "qos_rate") cfg.qos_rate = parse_double(value, where);
    else if (key == "tol") cfg.fixed_point.tol = parse_double(value, where);
    else if (key == "max_iter") cfg.fixed_point.max_iter = parse_int(value, where);
    else if (key == "threads") {
      const int t = parse_int(value, where);
      if (t < 0) throw std::invalid_argument(where + ": threads must be nonnegative");
      cfg.threads = static_cast<unsigned>(t);
    } else if (key == "scenario") {
      try {
        cfg.scenario = parse_scenario(value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
      }
    } else {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << is.rdbuf();
  try {
    apply_config_text(cfg, text.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::uint64_t geometry_seed(const ExperimentConfig& cfg, int drop) {
  return cfg.seed + static_cast<std::uint64_t>(drop);
}

std::uint64_t channel_seed(const ExperimentConfig& cfg, int drop) {
  return cfg.seed + 1'000'000u + static_cast<std::uint64_t>(drop);
}

SystemModel drop_system(const ExperimentConfig& cfg, int drop, Scenario scenario) {
  const NetworkInstance inst = generate_instance(cfg.network, scenario, geometry_seed(cfg, drop));
  return make_system(inst, sample_channels(inst, cfg.network.n_sim, channel_seed(cfg, drop)));
}

namespace {

/// Runs body(i) for i in [0, n) on a small pool; rethrows the first failure
/// in index order.
template <class Body>
void parallel_for(int n, unsigned threads, Body&& body) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(n, 1)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions opts;
  opts.fixed_point = cfg.fixed_point;
  return opts;
}

Eigen::VectorXd ones(Index users) { return Eigen::VectorXd::Ones(users); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void add_rates(std::vector<RateRecord>& out, int drop, Method method, Scenario scenario,
               const std::string& bound, const Eigen::VectorXd& rates) {
  for (Index k = 0; k < rates.size(); ++k) out.push_back({drop, k, method, scenario, bound, rates[k]});
}

struct DropOutput {
  std::vector<RateRecord> records;
  std::vector<DropSummary> summaries;

  void add(int drop, Method method, Scenario scenario, const SolveResult& r,
           const Eigen::VectorXd& coherent) {
    add_rates(records, drop, method, scenario, "uatf", r.rates);
    add_rates(records, drop, method, scenario, "coherent", coherent);
    summaries.push_back({drop, method, scenario, r.sinr, r.rates, coherent, r.trace.status});
  }
};

RateTable gather(std::vector<DropOutput>& drops) {
  RateTable table;
  for (auto& d : drops) {
    table.records.insert(table.records.end(), d.records.begin(), d.records.end());
    table.summaries.insert(table.summaries.end(), d.summaries.begin(), d.summaries.end());
  }
  return table;
}

}  // namespace

ConvergenceRun run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.drops != 1) throw std::invalid_argument("convergence runs use a single drop");
  const bool qos = cfg.kind == ExperimentKind::kConvergeQos;
  if (!qos && cfg.kind != ExperimentKind::kConvergeMaxMin) {
    throw std::invalid_argument("run_convergence needs a converge-* experiment kind");
  }
  ConvergenceRun run;
  run.problem = qos ? "qos" : "maxmin";
  SolverOptions main = solver_options(cfg);
  SolverOptions reference = main;
  reference.fixed_point.max_iter = 4 * main.fixed_point.max_iter;
  reference.fixed_point.tol = 1e-13;

  for (Scenario sc : cfg.scenarios()) {
    const SystemModel sys = drop_system(cfg, 0, sc);
    ConvergenceSeries series;
    series.scenario = sc;
    SolveResult ref;
    if (qos) {
      const Eigen::VectorXd gammas = ones(sys.users()) * sinr_target(cfg.qos_rate);
      series.trace = solve_sum_power(sys, gammas, main).trace;
      if (series.trace.status != IterationStatus::kDiverged) {
        ref = solve_sum_power(sys, gammas, reference);
      }
    } else {
      series.trace = solve_max_min(sys, ones(sys.users()), sys.budget(), main).trace;
      ref = solve_max_min(sys, ones(sys.users()), sys.budget(), reference);
    }
    if (series.trace.status != IterationStatus::kDiverged &&
        ref.trace.status != IterationStatus::kDiverged) {
      series.reference = ref.trace.iterates.back();
      for (const auto& p : series.trace.iterates) {
        series.distance.push_back((p - series.reference).norm());
      }
    }
    series.tail_ratio = series.trace.tail_ratio(10);
    run.series.push_back(std::move(series));
  }
  return run;
}

void write_convergence_csv(std::ostream& os, const ConvergenceRun& run) {
  os << "# lsmimo convergence v1\n";
  os << "problem,scenario,iteration,distance,status\n";
  for (const auto& s : run.series) {
    const std::string status = to_string(s.trace.status);
    if (s.distance.empty()) {
      os << run.problem << ',' << to_string(s.scenario) << ',' << s.trace.iterations()
         << ",inf," << status << '\n';
      continue;
    }
    for (std::size_t i = 0; i < s.distance.size(); ++i) {
      os << run.problem << ',' << to_string(s.scenario) << ',' << i << ','
         << format_double(s.distance[i]) << ',' << status << '\n';
    }
  }
}

const DropSummary* RateTable::find(int drop, Method method, Scenario scenario) const {
  for (const auto& s : summaries) {
    if (s.drop == drop && s.method == method && s.scenario == scenario) return &s;
  }
  return nullptr;
}

RateTable run_cdf(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<DropOutput> out(static_cast<std::size_t>(cfg.drops));
  parallel_for(cfg.drops, cfg.threads, [&](int d) {
    DropOutput& o = out[static_cast<std::size_t>(d)];
    for (Scenario sc : cfg.scenarios()) {
      const SystemModel sys = drop_system(cfg, d, sc);
      const SolveResult r = solve_max_min(sys, ones(sys.users()), sys.budget(), solver_options(cfg));
      o.add(d, Method::kJoint, sc, r, coherent_rates(sys.batch, r.beams, r.p_star));
    }
  });
  return gather(out);
}

RateTable run_compare_centralized(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<DropOutput> out(static_cast<std::size_t>(cfg.drops));
  parallel_for(cfg.drops, cfg.threads, [&](int d) {
    DropOutput& o = out[static_cast<std::size_t>(d)];
    const Scenario sc = Scenario::kCentralized;
    const SystemModel sys = drop_system(cfg, d, sc);
    const Eigen::VectorXd g = ones(sys.users());
    const double budget = sys.budget();

    const SolveResult joint = solve_max_min(sys, g, budget, solver_options(cfg));
    o.add(d, Method::kJoint, sc, joint, coherent_rates(sys.batch, joint.beams, joint.p_star));

    const DesignOutcome full_power =
        centralized_mmse(sys.csi, sys.instance, Eigen::VectorXd::Constant(sys.users(), budget));
    const SolveResult po = solve_power_only_maxmin(sys, full_power, g, budget, solver_options(cfg));
    o.add(d, Method::kPowerOnly, sc, po, coherent_rates(sys.batch, po.beams, po.p_star));

    ShortTermOptions st_opts;
    st_opts.tol = cfg.fixed_point.tol;
    const ShortTermResult st = solve_short_term_maxmin(sys, g, budget, st_opts);
    add_rates(o.records, d, Method::kShortTerm, sc, "coherent", st.rates);
    const bool all_converged =
        std::all_of(st.status.begin(), st.status.end(),
                    [](IterationStatus s) { return s == IterationStatus::kConverged; });
    o.summaries.push_back({d, Method::kShortTerm, sc, {}, {}, st.rates,
                           all_converged ? IterationStatus::kConverged
                                         : IterationStatus::kMaxIterations});
  });
  return gather(out);
}

RateTable run_compare_distributed(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<DropOutput> out(static_cast<std::size_t>(cfg.drops));
  parallel_for(cfg.drops, cfg.threads, [&](int d) {
    DropOutput& o = out[static_cast<std::size_t>(d)];
    const Scenario sc = Scenario::kDistributed;
    const SystemModel sys = drop_system(cfg, d, sc);
    const Eigen::VectorXd g = ones(sys.users());
    const double budget = sys.budget();

    const SolveResult joint = solve_max_min(sys, g, budget, solver_options(cfg));
    o.add(d, Method::kJoint, sc, joint, coherent_rates(sys.batch, joint.beams, joint.p_star));

    const DesignOutcome full_power =
        team_mmse_design(sys.csi, sys.instance, Eigen::VectorXd::Constant(sys.users(), budget));
    const SolveResult po = solve_power_only_maxmin(sys, full_power, g, budget, solver_options(cfg));
    o.add(d, Method::kPowerOnly, sc, po, coherent_rates(sys.batch, po.beams, po.p_star));

    LsfdOptions lsfd_opts;
    lsfd_opts.fixed_point = cfg.fixed_point;
    const SolveResult lsfd = solve_lsfd_maxmin(sys, g, budget, lsfd_opts).result;
    o.add(d, Method::kMrcLsfd, sc, lsfd, coherent_rates(sys.batch, lsfd.beams, lsfd.p_star));
  });
  return gather(out);
}

std::vector<int> distributed_ordering_violations(const RateTable& table) {
  constexpr double kSlack = 1e-9;
  std::vector<int> bad;
  std::map<int, bool> seen;
  for (const auto& s : table.summaries) seen[s.drop] = true;
  for (const auto& [drop, unused] : seen) {
    (void)unused;
    const auto* joint = table.find(drop, Method::kJoint, Scenario::kDistributed);
    const auto* po = table.find(drop, Method::kPowerOnly, Scenario::kDistributed);
    const auto* lsfd = table.find(drop, Method::kMrcLsfd, Scenario::kDistributed);
    if (!joint || !po || !lsfd) continue;
    const double j = joint->uatf.minCoeff();
    const double p = po->uatf.minCoeff();
    const double m = lsfd->uatf.minCoeff();
    if (m > p + kSlack || p > j + kSlack) bad.push_back(drop);
  }
  return bad;
}

void write_rates_csv(std::ostream& os, const RateTable& table) {
  os << "# lsmimo rates v1\n";
  os << "drop,user,method,scenario,bound,rate\n";
  for (const auto& r : table.records) {
    os << r.drop << ',' << r.user << ',' << to_string(r.method) << ',' << to_string(r.scenario)
       << ',' << r.bound << ',' << format_double(r.rate) << '\n';
  }
}

double CdfSeries::quantile(double q) const {
  if (samples.empty()) throw std::invalid_argument("quantile of an empty series");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  const auto n = static_cast<double>(samples.size());
  const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n) - 1.0));
  return samples[std::min(idx, samples.size() - 1)];
}

std::vector<CdfSeries> cdf_table(const RateTable& table) {
  std::vector<CdfSeries> series;
  for (const auto& r : table.records) {
    auto it = std::find_if(series.begin(), series.end(), [&](const CdfSeries& s) {
      return s.method == r.method && s.scenario == r.scenario && s.bound == r.bound;
    });
    if (it == series.end()) {
      series.push_back({r.method, r.scenario, r.bound, {}});
      it = std::prev(series.end());
    }
    it->samples.push_back(r.rate);
  }
  for (auto& s : series) std::sort(s.samples.begin(), s.samples.end());
  return series;
}

namespace {

void report(std::ostream& os, bool& all, bool ok, const std::string& name,
            const std::string& detail) {
  all = all && ok;
  os << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

bool run_invariant_suite(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  bool all = true;
  std::map<Scenario, Eigen::VectorXd> sinrs;
  for (Scenario sc : {Scenario::kSmallCells, Scenario::kDistributed, Scenario::kCentralized}) {
    const SystemModel sys = drop_system(cfg, 0, sc);
    const std::string tag = to_string(sc);
    const Eigen::VectorXd g = ones(sys.users());
    const double budget = sys.budget();
    const InterferenceMapping map = joint_mapping(sys, g);

    const SiReport si = check_si_axioms(map, 100, cfg.seed);
    report(os, all, si.ok(), "si-axioms/" + tag,
           std::to_string(si.violations.size()) + " violations in 100 samples");

    const SolveResult r = solve_max_min(sys, g, budget, solver_options(cfg));
    const Eigen::VectorXd t = map(r.p_star);
    const Eigen::VectorXd normalized = (budget / t.maxCoeff()) * t;
    const double cert = (r.p_star - normalized).lpNorm<Eigen::Infinity>() / budget;
    report(os, all, r.trace.converged() && cert <= 1e-8, "certificate/" + tag, sci(cert));

    const double spread = (r.sinr.maxCoeff() - r.sinr.minCoeff()) / r.sinr.minCoeff();
    report(os, all, spread <= 1e-5, "balance/" + tag, sci(spread));

    double duality = 0.0;
    for (Index k = 0; k < sys.users(); ++k) {
      duality = std::max(duality,
                         std::abs(empirical_mse(r.stats, r.p_star, k) - 1.0 / (1.0 + r.sinr[k])));
    }
    report(os, all, duality <= 1e-9, "duality/" + tag, sci(duality));

    const Eigen::VectorXd coherent = coherent_rates(sys.batch, r.beams, r.p_star);
    const double gap = (coherent - r.rates).minCoeff();
    report(os, all, gap >= 0.0, "bound-ordering/" + tag, "min gap " + sci(gap));

    SolverOptions low = solver_options(cfg);
    low.p0 = Eigen::VectorXd::Constant(sys.users(), 0.01 * budget);
    const SolveResult r2 = solve_max_min(sys, g, budget, low);
    const double diff = (r.p_star - r2.p_star).norm() / r.p_star.norm();
    report(os, all, diff <= 1e-6, "uniqueness/" + tag, sci(diff));
    sinrs[sc] = r.sinr;
  }
  const double d1 = (sinrs[Scenario::kSmallCells] - sinrs[Scenario::kDistributed]).maxCoeff();
  const double d2 = (sinrs[Scenario::kDistributed] - sinrs[Scenario::kCentralized]).maxCoeff();
  report(os, all, d1 <= 1e-9 && d2 <= 1e-9, "information-ordering",
         "max excess " + sci(std::max(d1, d2)));
  return all;
}

std::filesystem::path write_artifact(const ExperimentConfig& cfg, const std::string& name,
                                     const std::string& contents) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw std::runtime_error(cfg.out_dir.string() + ": cannot create directory: " + ec.message());
  }
  const std::filesystem::path path = cfg.out_dir / name;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
  os << contents;
  if (!os) throw std::runtime_error(path.string() + ": write failed");
  return path;
}

}  // namespace lsmimo
