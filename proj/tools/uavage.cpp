// Command-line front end: run / summarize / oracle / validate.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavage/config.hpp"
#include "uavage/matrix.hpp"
#include "uavage/oracle.hpp"
#include "uavage/results.hpp"

namespace {

using namespace uavage;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos) {
        const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("bad seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

struct Common {
  std::string config;
  std::string profile = "desk";
  std::string out;
  std::string seeds;
};

RunConfig load(const Common& c) {
  const Profile p = parse_profile(c.profile);
  RunConfig cfg = c.config.empty() ? profile_defaults(p) : parse_config(c.config, p);
  if (!c.seeds.empty()) cfg.sweep.seeds = parse_seeds(c.seeds);
  if (!c.out.empty()) cfg.output_dir = c.out;
  validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config overlaid on the profile defaults")->check(CLI::ExistingFile);
  app->add_option("--profile", c.profile, "default profile: desk|paper")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seeds", c.seeds, "seed list, e.g. 1,2,5-8");
}

int cmd_run(const Common& c, int jobs) {
  const RunConfig cfg = load(c);
  const auto all = enumerate_jobs(cfg);
  std::cerr << "running " << all.size() << " jobs into " << cfg.output_dir << '\n';
  MatrixOptions opt;
  opt.jobs = jobs;
  std::size_t done = 0;
  opt.on_done = [&](const Job& j, const ResultRow& r) {
    ++done;
    std::cerr << '[' << done << '/' << all.size() << "] " << j.tag() << ' ';
    if (r.ok())
      std::cerr << "age=" << r.mean_age << '\n';
    else
      std::cerr << "FAILED: " << r.error << '\n';
  };
  const MatrixResult res = run_matrix(cfg, opt);
  print_summary(std::cout, res.summary);
  int failed = 0;
  for (const auto& r : res.rows) failed += !r.ok();
  return failed == 0 ? 0 : 2;
}

int cmd_summarize(const std::vector<std::string>& files) {
  std::vector<ResultRow> rows;
  for (const auto& f : files) {
    auto more = read_rows(std::filesystem::path(f));
    rows.insert(rows.end(), more.begin(), more.end());
  }
  if (rows.empty()) throw ConfigError("no result rows to summarize");
  print_summary(std::cout, summarize(rows));
  return 0;
}

int cmd_oracle(std::uint64_t seed) {
  OracleConfig oc;
  oc.seed = seed;
  const OracleReport r = run_oracle(oc);
  std::printf("small instance: 3x3 grid, 1 UAV, %d clusters, 4 devices, T=10\n", r.num_clusters);
  std::printf("dynamic programming optimum : %.6f\n", r.optimum);
  std::printf("tabular Q-learning (greedy) : %.6f  gap %.3g (tol %.3g, %d episodes)\n", r.tabular, r.tabular_gap(),
              oc.tabular_tolerance, r.tabular_episodes);
  std::printf("DQN (greedy)                : %.6f  gap %.3g (tol %.3g)\n", r.dqn, r.dqn_gap(), oc.dqn_tolerance);
  const bool ok = r.tabular_gap() <= oc.tabular_tolerance && r.dqn_gap() <= oc.dqn_tolerance;
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_validate(const Common& c) {
  const RunConfig cfg = load(c);
  const auto jobs = enumerate_jobs(cfg);
  std::cout << "config ok: " << jobs.size() << " runs (" << cfg.sweep.tx_rates.size() << " rates x "
            << cfg.sweep.duplex.size() << " duplex x " << cfg.sweep.uav_counts.size() << " swarm sizes x "
            << cfg.sweep.schemes.size() << " schemes x " << cfg.sweep.seeds.size() << " seeds)\n";
  for (Duplex d : cfg.sweep.duplex)
    for (double rate : cfg.sweep.tx_rates) {
      const int cap = cluster_capacity({rate, d}, cfg.scenario.world.cell_size, cfg.scenario.uav.velocity,
                                       cfg.scenario.budget.packet_size);
      std::cout << "  " << to_string(d) << " @ " << rate / 1e6 << " Mbps: cluster capacity " << cap << ", "
                << (cfg.scenario.num_devices + cap - 1) / cap << " clusters\n";
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV swarm age-of-information simulator"};
  app.require_subcommand(1);

  Common run_opts, val_opts;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "execute the experiment matrix");
  add_common(run, run_opts);
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> files;
  auto* sum = app.add_subcommand("summarize", "tabulate result files");
  sum->add_option("files", files, "results.csv files")->required()->check(CLI::ExistingFile);

  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "small-instance DP / tabular / DQN comparison");
  oracle->add_option("--seed", oracle_seed, "training seed");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  add_common(val, val_opts);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_opts, jobs);
    if (*sum) return cmd_summarize(files);
    if (*oracle) return cmd_oracle(oracle_seed);
    if (*val) return cmd_validate(val_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
