// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned below.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../gradcheck.hpp"
#include "uavage/config.hpp"
#include "uavage/matrix.hpp"
#include "uavage/oracle.hpp"

using namespace uavage;
namespace fs = std::filesystem;

namespace tol {
constexpr double formula_rel = 1e-12;
constexpr double formula_seconds = 1.0;
constexpr int aoi_trajectories = 10'000;
constexpr double aoi_seconds = 10.0;
constexpr int grad_cases = 100;
constexpr double grad_rel = 1e-4;
constexpr double grad_seconds = 30.0;
constexpr double oracle_dqn_gap = 0.05;
constexpr double oracle_tabular_gap = 0.01;
constexpr double oracle_seconds = 300.0;
constexpr double duplex_slack = 0.0;       // full - half must be <= this
constexpr double ordering_pooled_se = 1.0;  // allowed inversion, in pooled standard errors
constexpr double swarm_slack = 0.0;        // age(U+1) - age(U) must be <= this
constexpr double mac_ratio = 5.0;
constexpr double accounting_seconds = 60.0;
constexpr double guard_seconds = 1.0;
}  // namespace tol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << v.detail << std::endl;
  if (!v.pass) ++failures;
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

// --- 1 -------------------------------------------------------------------

Verdict formulas() {
  const auto t0 = Clock::now();
  const RunConfig paper = paper_profile();
  const double M = paper.scenario.world.cell_size, v = paper.scenario.uav.velocity;
  const double L = paper.scenario.budget.packet_size;
  const int half = cluster_capacity({25e6, Duplex::half}, M, v, L);
  const int full = cluster_capacity({25e6, Duplex::full}, M, v, L);
  const LinkBudget& b = paper.scenario.budget;
  auto rel = [](double a, double e) { return std::abs(a - e) / std::abs(e); };
  // hand computations: beta0 = 30 dB, H = 100 m, H_BS = 15 m, sigma^2 = -100 dBm, B = 1 MHz, L = 5 Mb
  const double worst = std::max({rel(gain_device(100, 0, b), 1e3 / 1e4), rel(gain_device(100, 100, b), 1e3 / 2e4),
                                 rel(gain_bs(100, 0, 15, b), 1e3 / (85.0 * 85.0)),
                                 rel(tx_power(0.1, b), (std::pow(2.0, 5.0) - 1.0) * 1e-13 / 0.1)});
  const double secs = seconds_since(t0);
  const bool ok = half == 10 && full == 20 && worst < tol::formula_rel && secs < tol::formula_seconds;
  return {ok, "capacity(25 Mbps) half=" + std::to_string(half) + " full=" + std::to_string(full) +
                  ", worst gain/power rel err=" + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// --- 2 -------------------------------------------------------------------

Verdict aoi_dynamics() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  long long mismatches = 0, out_of_bounds = 0, checks = 0;
  for (int traj = 0; traj < tol::aoi_trajectories; ++traj) {
    const int D = 1 + static_cast<int>(rng() % 8);
    const int amax = 1 + static_cast<int>(rng() % 30);
    const int init = 1 + static_cast<int>(rng() % amax);
    const int T = 1 + static_cast<int>(rng() % 60);
    AoiState s = AoiState::initial(D, amax, init);
    std::vector<int> last(static_cast<std::size_t>(D), -1);
    for (int t = 0; t < T; ++t) {
      std::vector<int> served;
      for (int d = 0; d < D; ++d)
        if (rng() % 3 == 0) served.push_back(d);
      s = update_aoi(s, served);
      for (int d : served) last[d] = t;
      for (int d = 0; d < D; ++d) {
        const int expect = last[d] < 0 ? std::min(amax, init + t + 1) : std::min(amax, t - last[d] + 1);
        mismatches += s.ages[d] != expect;
        out_of_bounds += s.ages[d] < 1 || s.ages[d] > amax;
        ++checks;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && out_of_bounds == 0 && secs < tol::aoi_seconds,
          std::to_string(tol::aoi_trajectories) + " trajectories, " + std::to_string(checks) + " ages checked, " +
              std::to_string(mismatches) + " mismatches, " + std::to_string(out_of_bounds) + " out of bounds, " +
              fmt(secs, 3) + " s"};
}

// --- 3 -------------------------------------------------------------------

Verdict gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int i = 0; i < tol::grad_cases; ++i)
    worst = std::max(worst, gradcheck::relative_error(gradcheck::random_case(rng)));
  const double secs = seconds_since(t0);
  return {worst < tol::grad_rel && secs < tol::grad_seconds,
          std::to_string(tol::grad_cases) + " random nets/batches, worst relative error " + fmt(worst, 3) + ", " +
              fmt(secs, 3) + " s"};
}

// --- 4 -------------------------------------------------------------------

OracleReport oracle_once() {
  OracleConfig cfg;
  cfg.dqn_tolerance = tol::oracle_dqn_gap;
  cfg.tabular_tolerance = tol::oracle_tabular_gap;
  return run_oracle(cfg);
}

Verdict oracle() {
  const auto t0 = Clock::now();
  const OracleReport r = oracle_once();
  const double secs = seconds_since(t0);
  return {r.num_clusters == 2 && r.dqn_gap() <= tol::oracle_dqn_gap && r.tabular_gap() <= tol::oracle_tabular_gap &&
              secs < tol::oracle_seconds,
          "optimum " + fmt(r.optimum, 6) + ", tabular " + fmt(r.tabular, 6) + " (gap " + fmt(r.tabular_gap(), 3) +
              "), DQN " + fmt(r.dqn, 6) + " (gap " + fmt(r.dqn_gap(), 3) + "), " + fmt(secs, 3) + " s"};
}

// --- desk runs shared by 5, 6, 7, 10 ----------------------------------------

class DeskRuns {
 public:
  DeskRuns(fs::path out, std::vector<std::uint64_t> seeds) : out_(std::move(out)), seeds_(std::move(seeds)) {
    cfg_ = desk_profile();
    cfg_.output_dir = out_.string();
  }

  const RunConfig& config() const { return cfg_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }

  Job job(SchemeKind s, Duplex d, int u, std::uint64_t seed) const {
    return {0, s, d, cfg_.scenario.rate.tx_rate, u, seed};
  }

  const ResultRow& row(SchemeKind s, Duplex d, int u, std::uint64_t seed) {
    const Job j = job(s, d, u, seed);
    auto it = rows_.find(j.tag());
    if (it != rows_.end()) return it->second;
    const auto t0 = Clock::now();
    JobOutput o = run_job(cfg_, j);
    std::cerr << "  ran " << j.tag() << " age=" << o.row.mean_age << " (" << fmt(seconds_since(t0), 3) << " s)"
              << (o.row.ok() ? "" : " error: " + o.row.error) << std::endl;
    order_.push_back(j.tag());
    return rows_.emplace(j.tag(), std::move(o.row)).first->second;
  }

  Moments ages(SchemeKind s, Duplex d, int u) {
    std::vector<double> v;
    for (auto seed : seeds_) {
      const ResultRow& r = row(s, d, u, seed);
      if (!r.ok()) throw std::runtime_error(r.error);
      v.push_back(r.mean_age);
    }
    return Moments::of(v);
  }

  void write() const {
    if (rows_.empty()) return;
    fs::create_directories(out_);
    std::vector<ResultRow> rows;
    for (const auto& tag : order_) rows.push_back(rows_.at(tag));
    std::ofstream csv(out_ / "results.csv");
    write_rows(csv, rows);
    std::ofstream sum(out_ / "summary.csv");
    write_summary_csv(sum, summarize(rows));
  }

 private:
  fs::path out_;
  std::vector<std::uint64_t> seeds_;
  RunConfig cfg_;
  std::map<std::string, ResultRow> rows_;
  std::vector<std::string> order_;
};

std::string mean_sd(const Moments& m) { return fmt(m.mean) + "±" + fmt(m.stderr_, 2); }

// --- 5 -------------------------------------------------------------------

constexpr int kDuplexUavs = 2;

Verdict duplex_trend(DeskRuns& runs) {
  bool ok = true;
  std::string detail = "U=" + std::to_string(kDuplexUavs) + ", " + std::to_string(runs.seeds().size()) + " seeds:";
  for (SchemeKind s : kAllSchemes) {
    const Moments h = runs.ages(s, Duplex::half, kDuplexUavs), f = runs.ages(s, Duplex::full, kDuplexUavs);
    const bool good = f.mean - h.mean <= tol::duplex_slack;
    ok = ok && good;
    detail += " " + std::string(to_string(s)) + " full " + fmt(f.mean) + (good ? " <= " : " > ") + "half " + fmt(h.mean) + ";";
  }
  return {ok && runs.seeds().size() >= 5, detail};
}

// --- 6 -------------------------------------------------------------------

constexpr int kOrderUavs = 3;

Verdict scheme_ordering(DeskRuns& runs) {
  const std::vector<SchemeKind> chain{SchemeKind::co_marl, SchemeKind::pco_marl, SchemeKind::d_marl,
                                      SchemeKind::random_walk};
  std::vector<Moments> m;
  for (SchemeKind s : chain) m.push_back(runs.ages(s, Duplex::full, kOrderUavs));
  bool ok = runs.seeds().size() >= 2;
  std::string detail = "U=" + std::to_string(kOrderUavs) + " full:";
  for (std::size_t i = 0; i < chain.size(); ++i) detail += " " + std::string(to_string(chain[i])) + " " + mean_sd(m[i]);
  detail += ";";
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double inversion = m[i].mean - m[i + 1].mean;
    const double se = pooled_stderr(m[i], m[i + 1]);
    const bool good = inversion <= tol::ordering_pooled_se * se;
    ok = ok && good;
    detail += " " + std::string(to_string(chain[i])) + (good ? "<=" : " INVERTS ") + std::string(to_string(chain[i + 1])) +
              " (gap " + fmt(-inversion, 3) + ", pooled SE " + fmt(se, 2) + ")";
  }
  return {ok, detail};
}

// --- 7 -------------------------------------------------------------------

Verdict swarm_trend(DeskRuns& runs) {
  std::vector<Moments> m;
  for (int u = 1; u <= 3; ++u) m.push_back(runs.ages(SchemeKind::co_marl, Duplex::full, u));
  bool ok = true;
  std::string detail = "Co-MARL full:";
  for (int u = 1; u <= 3; ++u) detail += " U=" + std::to_string(u) + " " + mean_sd(m[u - 1]);
  for (int u = 1; u < 3; ++u) ok = ok && m[u].mean - m[u - 1].mean <= tol::swarm_slack;
  return {ok, detail};
}

// --- 8 -------------------------------------------------------------------

Verdict accounting() {
  const auto t0 = Clock::now();
  const std::vector<std::int64_t> expect{3, 12, 9, 6};
  const std::vector<SchemeKind> order{SchemeKind::c_rl, SchemeKind::co_marl, SchemeKind::pco_marl, SchemeKind::d_marl};
  bool ok = true;
  std::string msgs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto n = count_messages(order[i], 3);
    ok = ok && n == expect[i];
    msgs += (i ? "/" : "") + std::to_string(n);
  }
  // MACs per episode in steady state (the buffers already hold a batch) on the U=3 desk config.
  const RunConfig desk = desk_profile();
  const Environment env(scenario_for(desk, desk.scenario.rate.tx_rate, Duplex::full, 3, 1));
  auto macs = [&](SchemeKind s) {
    TrainConfig tc = desk.train;
    tc.seed = 1;
    SchemeRunner r(env, s, tc);
    r.run_episode(1.0);
    return static_cast<double>(r.run_episode(1.0).counters.mac_ops);
  };
  const double central = macs(SchemeKind::c_rl);
  double worst = 1e300;
  std::string ratios;
  for (SchemeKind s : {SchemeKind::co_marl, SchemeKind::pco_marl, SchemeKind::d_marl}) {
    const double ratio = central / macs(s);
    worst = std::min(worst, ratio);
    ratios += " " + std::string(to_string(s)) + " " + fmt(ratio, 3);
  }
  const double secs = seconds_since(t0);
  ok = ok && worst >= tol::mac_ratio && secs < tol::accounting_seconds;
  return {ok, "messages at U=3 (C-RL/Co/PCo/D) " + msgs + "; MAC ratio C-RL : " + ratios + " (C=" +
                  std::to_string(env.num_clusters()) + "), " + fmt(secs, 3) + " s"};
}

// --- 9 -------------------------------------------------------------------

Verdict dimensionality_guard() {
  const auto t0 = Clock::now();
  RunConfig desk = desk_profile();
  desk.scenario.num_devices = 120;  // capacity 10 at the desk rate in full duplex -> 12 clusters
  const Environment env(scenario_for(desk, desk.scenario.rate.tx_rate, Duplex::full, 4, 1));
  std::string what;
  try {
    SchemeRunner r(env, SchemeKind::c_rl, desk.train);
  } catch (const DimensionalityError& e) {
    what = e.what();
  }
  const double secs = seconds_since(t0);
  return {env.num_clusters() == 12 && !what.empty() && secs < tol::guard_seconds,
          "U=4, C=" + std::to_string(env.num_clusters()) + ": " + (what.empty() ? "no refusal" : "refused (" + what + ")")};
}

// --- 10 ------------------------------------------------------------------

Verdict determinism(DeskRuns& runs) {
  // A desk job from criterion 7, rerun from scratch and compared field by field.
  const Job j = runs.job(SchemeKind::co_marl, Duplex::full, 1, runs.seeds().front());
  const std::string first = format_row(runs.row(j.scheme, j.duplex, j.num_uavs, j.seed), false);
  const std::string again = format_row(run_job(runs.config(), j).row, false);
  // The oracle's numbers, twice.
  const OracleReport a = oracle_once(), b = oracle_once();
  const bool oracle_same = a.optimum == b.optimum && a.tabular == b.tabular && a.dqn == b.dqn &&
                           a.tabular_episodes == b.tabular_episodes;
  // A short training run of every scheme, twice.
  const RunConfig desk = desk_profile();
  const Environment env(scenario_for(desk, desk.scenario.rate.tx_rate, Duplex::full, 2, 9));
  bool short_same = true;
  for (SchemeKind s : kAllSchemes) {
    TrainConfig tc = desk.train;
    tc.episodes = 20;
    tc.seed = 9;
    const TrainResult x = train(env, s, tc), y = train(env, s, tc);
    short_same = short_same && x.episode_ages == y.episode_ages && x.episode_powers == y.episode_powers &&
                 x.totals.mac_ops == y.totals.mac_ops && x.totals.messages == y.totals.messages;
  }
  return {first == again && oracle_same && short_same,
          std::string("desk row rerun ") + (first == again ? "identical" : "DIFFERS") + ", oracle rerun " +
              (oracle_same ? "identical" : "DIFFERS") + ", 20-episode runs of all schemes " +
              (short_same ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string out = "acceptance_runs";
  std::string only;
  std::string seeds_arg = "1-5";
  app.add_option("--out", out, "directory for the desk run rows");
  app.add_option("--only", only, "comma-separated criterion ids (default: all)");
  app.add_option("--seeds", seeds_arg, "seeds for the desk criteria");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  if (!only.empty()) {
    std::stringstream ss(only);
    for (std::string tok; std::getline(ss, tok, ',');) selected.insert(std::stoi(tok));
  }
  auto want = [&](int id) { return selected.empty() || selected.count(id) != 0; };

  std::vector<std::uint64_t> seeds;
  {
    std::stringstream ss(seeds_arg);
    for (std::string tok; std::getline(ss, tok, ',');) {
      const auto dash = tok.find('-');
      const std::uint64_t lo = std::stoull(tok.substr(0, dash));
      const std::uint64_t hi = dash == std::string::npos ? lo : std::stoull(tok.substr(dash + 1));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  DeskRuns runs(out, seeds);

  if (want(1)) report(1, "formula suite", guarded(formulas));
  if (want(2)) report(2, "AoI dynamics", guarded(aoi_dynamics));
  if (want(3)) report(3, "gradient check", guarded(gradients));
  if (want(4)) report(4, "oracle equivalence", guarded(oracle));
  if (want(5)) report(5, "duplex trend", guarded([&] { return duplex_trend(runs); }));
  if (want(6)) report(6, "scheme ordering", guarded([&] { return scheme_ordering(runs); }));
  if (want(7)) report(7, "swarm-size trend", guarded([&] { return swarm_trend(runs); }));
  if (want(8)) report(8, "accounting", guarded(accounting));
  if (want(9)) report(9, "dimensionality guard", guarded(dimensionality_guard));
  if (want(10)) report(10, "determinism", guarded([&] { return determinism(runs); }));
  runs.write();

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
