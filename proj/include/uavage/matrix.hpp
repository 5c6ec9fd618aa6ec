#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "uavage/config.hpp"
#include "uavage/results.hpp"
#include "uavage/schemes.hpp"

namespace uavage {

/// One sweep point x seed.
struct Job {
  int index = 0;
  SchemeKind scheme = SchemeKind::random_walk;
  Duplex duplex = Duplex::full;
  double tx_rate = 0.0;
  int num_uavs = 1;
  std::uint64_t seed = 0;

  std::string tag() const {
    std::string s = std::string(to_string(scheme)) + "_" + std::string(to_string(duplex)) + "_R" +
                     csv::real(tx_rate / 1e6) + "_U" + std::to_string(num_uavs) + "_s" + std::to_string(seed);
    for (char& c : s)
      if (c == '.') c = 'p';
    return s;
  }
};

/// Cartesian product in a fixed order: duplex, rate, U, scheme, seed.
inline std::vector<Job> enumerate_jobs(const RunConfig& cfg) {
  std::vector<Job> jobs;
  for (Duplex d : cfg.sweep.duplex)
    for (double rate : cfg.sweep.tx_rates)
      for (int u : cfg.sweep.uav_counts)
        for (SchemeKind s : cfg.sweep.schemes)
          for (std::uint64_t seed : cfg.sweep.seeds)
            jobs.push_back({static_cast<int>(jobs.size()), s, d, rate, u, seed});
  return jobs;
}

struct JobOutput {
  ResultRow row;
  std::vector<CurvePoint> curve;
  std::vector<FrameRecord> frames;  // final episode
};

inline JobOutput run_job(const RunConfig& cfg, const Job& job) {
  JobOutput out;
  ResultRow& r = out.row;
  r.scheme = job.scheme;
  r.duplex = job.duplex;
  r.tx_rate = job.tx_rate;
  r.num_uavs = job.num_uavs;
  r.num_devices = cfg.scenario.num_devices;
  r.seed = job.seed;
  try {
    const Environment env(scenario_for(cfg, job.tx_rate, job.duplex, job.num_uavs, job.seed));
    r.num_clusters = env.num_clusters();
    TrainConfig tc = cfg.train;
    tc.seed = job.seed;
    Trainer trainer(env, job.scheme, tc);
    trainer.run_to_end();
    TrainResult res = trainer.result();
    r.mean_age = res.eval_mean_age;
    r.mean_power = res.eval_mean_power;
    r.messages = res.per_episode.messages;
    r.mac_ops = res.per_episode.mac_ops;
    r.wall_time = res.per_episode.wall_time;
    out.curve = std::move(res.curve);
    out.frames = std::move(res.last_episode.frames);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return out;
}

inline nlohmann::json to_json(const FrameRecord& f) {
  nlohmann::json cells = nlohmann::json::array();
  for (const Cell& c : f.cells) cells.push_back({c.x, c.y});
  return {{"frame", f.frame},       {"cells", cells},          {"clusters", f.clusters},
          {"served", f.served},     {"rewards", f.rewards},    {"weighted_age", f.weighted_age},
          {"total_power_w", f.total_power}, {"ages", f.ages}};
}

struct MatrixOptions {
  int jobs = 1;                  // worker threads
  bool write_files = true;
  std::function<void(const Job&, const ResultRow&)> on_done;  // called under a lock
};

struct MatrixResult {
  std::vector<ResultRow> rows;  // in job order
  std::vector<SummaryEntry> summary;
};

/// Runs every job on a bounded worker pool. Rows come back in job order regardless of
/// completion order; a failing job leaves its error on the row and the matrix carries on.
inline MatrixResult run_matrix(const RunConfig& cfg, const MatrixOptions& opt = {}) {
  namespace fs = std::filesystem;
  const std::vector<Job> jobs = enumerate_jobs(cfg);
  const fs::path root(cfg.output_dir);
  if (opt.write_files) {
    fs::create_directories(root / "curves");
    fs::create_directories(root / "plots");
    if (cfg.frame_logs) fs::create_directories(root / "frames");
  }

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      JobOutput out = run_job(cfg, jobs[i]);
      if (opt.write_files) {
        std::ofstream curve(root / "curves" / (jobs[i].tag() + ".jsonl"));
        for (const auto& p : out.curve)
          curve << nlohmann::json{{"episode_end", p.episode_end}, {"epsilon", p.epsilon},
                                  {"mean_weighted_age", p.mean_weighted_age}}
                       .dump()
                << '\n';
        if (cfg.frame_logs) {
          std::ofstream frames(root / "frames" / (jobs[i].tag() + ".jsonl"));
          for (const auto& f : out.frames) frames << to_json(f).dump() << '\n';
        }
      }
      std::lock_guard lock(mu);
      rows[i] = std::move(out.row);
      if (opt.on_done) opt.on_done(jobs[i], rows[i]);
    }
  };
  const int n = std::max(1, std::min<int>(opt.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  MatrixResult result{std::move(rows), {}};
  result.summary = summarize(result.rows);
  if (opt.write_files) {
    std::ofstream csv_out(root / "results.csv");
    write_rows(csv_out, result.rows);
    std::ofstream sum_out(root / "summary.csv");
    write_summary_csv(sum_out, result.summary);
    for (const auto& s : rate_series(result.summary)) {
      std::ofstream f(root / "plots" / (s.name + ".dat"));
      write_series(f, s);
    }
    for (const auto& s : swarm_series(result.summary)) {
      std::ofstream f(root / "plots" / (s.name + ".dat"));
      write_series(f, s);
    }
  }
  return result;
}

}  // namespace uavage
