#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "uavage/common.hpp"
#include "uavage/schemes.hpp"

namespace uavage {

/// One (sweep point, seed) outcome.
struct ResultRow {
  SchemeKind scheme = SchemeKind::random_walk;
  Duplex duplex = Duplex::full;
  double tx_rate = 0.0;  // bits/s
  int num_uavs = 0;
  int num_devices = 0;
  int num_clusters = 0;
  std::uint64_t seed = 0;
  double mean_age = 0.0;    // evaluation-window mean weighted age
  double mean_power = 0.0;  // evaluation-window mean total uplink power, W
  std::int64_t messages = 0;  // per episode
  std::int64_t mac_ops = 0;   // per episode
  double wall_time = 0.0;     // seconds per episode
  std::string error;          // nonempty when the run failed

  bool ok() const { return error.empty(); }
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kResultHeader =
    "scheme,duplex,tx_rate_bps,uavs,devices,clusters,seed,mean_age,mean_power_w,messages,mac_ops,wall_time_s,error";

namespace csv {

inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace csv

inline std::string format_row(const ResultRow& r, bool include_wall_time = true) {
  std::ostringstream os;
  os << to_string(r.scheme) << ',' << to_string(r.duplex) << ',' << csv::real(r.tx_rate) << ',' << r.num_uavs << ','
     << r.num_devices << ',' << r.num_clusters << ',' << r.seed << ',' << csv::real(r.mean_age) << ','
     << csv::real(r.mean_power) << ',' << r.messages << ',' << r.mac_ops << ','
     << (include_wall_time ? csv::real(r.wall_time) : std::string("-")) << ',' << csv::quote(r.error);
  return os.str();
}

inline void write_rows(std::ostream& os, const std::vector<ResultRow>& rows, bool include_wall_time = true) {
  os << kResultHeader << '\n';
  for (const auto& r : rows) os << format_row(r, include_wall_time) << '\n';
}

inline ResultRow parse_row(const std::string& line) {
  const auto f = csv::split(line);
  if (f.size() != 13) throw ConfigError("result row has " + std::to_string(f.size()) + " fields, expected 13");
  ResultRow r;
  try {
    r.scheme = parse_scheme(f[0]);
    r.duplex = parse_duplex(f[1]);
    r.tx_rate = std::stod(f[2]);
    r.num_uavs = std::stoi(f[3]);
    r.num_devices = std::stoi(f[4]);
    r.num_clusters = std::stoi(f[5]);
    r.seed = std::stoull(f[6]);
    r.mean_age = std::stod(f[7]);
    r.mean_power = std::stod(f[8]);
    r.messages = std::stoll(f[9]);
    r.mac_ops = std::stoll(f[10]);
    r.wall_time = f[11] == "-" ? 0.0 : std::stod(f[11]);
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("malformed result row: ") + e.what());
  }
  r.error = f[12];
  return r;
}

inline std::vector<ResultRow> read_rows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultHeader) throw ConfigError("result file lacks the expected header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line))
    if (!line.empty()) rows.push_back(parse_row(line));
  return rows;
}

inline std::vector<ResultRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open result file '" + path.string() + "'");
  return read_rows(in);
}

/// Sample mean, standard deviation and standard error of a set of values.
struct Moments {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_ = 0.0;

  static Moments of(const std::vector<double>& v) {
    Moments m;
    m.n = static_cast<int>(v.size());
    if (m.n == 0) return m;
    for (double x : v) m.mean += x;
    m.mean /= m.n;
    if (m.n > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - m.mean) * (x - m.mean);
      m.stddev = std::sqrt(ss / (m.n - 1));
      m.stderr_ = m.stddev / std::sqrt(static_cast<double>(m.n));
    }
    return m;
  }
};

/// Pooled standard error of a difference of two seed means.
inline double pooled_stderr(const Moments& a, const Moments& b) {
  return std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

struct SummaryKey {
  SchemeKind scheme;
  Duplex duplex;
  double tx_rate;
  int num_uavs;
  friend auto operator<=>(const SummaryKey&, const SummaryKey&) = default;
};

struct SummaryEntry {
  SummaryKey key;
  int failed = 0;
  Moments age;
  Moments power;
  Moments messages;
  Moments mac_ops;
  Moments wall_time;
};

/// Seed-level aggregation of successful rows per (scheme, duplex, rate, U).
inline std::vector<SummaryEntry> summarize(const std::vector<ResultRow>& rows) {
  struct Acc {
    int failed = 0;
    std::vector<double> age, power, msgs, macs, wall;
  };
  std::map<SummaryKey, Acc> groups;
  for (const auto& r : rows) {
    Acc& a = groups[{r.scheme, r.duplex, r.tx_rate, r.num_uavs}];
    if (!r.ok()) {
      ++a.failed;
      continue;
    }
    a.age.push_back(r.mean_age);
    a.power.push_back(r.mean_power);
    a.msgs.push_back(static_cast<double>(r.messages));
    a.macs.push_back(static_cast<double>(r.mac_ops));
    a.wall.push_back(r.wall_time);
  }
  std::vector<SummaryEntry> out;
  for (const auto& [k, a] : groups)
    out.push_back({k, a.failed, Moments::of(a.age), Moments::of(a.power), Moments::of(a.msgs), Moments::of(a.macs),
                   Moments::of(a.wall)});
  return out;
}

inline void print_summary(std::ostream& os, const std::vector<SummaryEntry>& entries) {
  os << std::left << std::setw(10) << "scheme" << std::setw(7) << "duplex" << std::right << std::setw(10) << "rate_Mbps"
     << std::setw(5) << "U" << std::setw(6) << "seeds" << std::setw(12) << "mean_age" << std::setw(10) << "sd"
     << std::setw(10) << "messages" << std::setw(14) << "mac_ops" << std::setw(12) << "wall_ms" << std::setw(8)
     << "failed" << '\n';
  for (const auto& e : entries) {
    os << std::left << std::setw(10) << to_string(e.key.scheme) << std::setw(7) << to_string(e.key.duplex)
       << std::right << std::fixed << std::setprecision(3) << std::setw(10) << e.key.tx_rate / 1e6 << std::setw(5)
       << e.key.num_uavs << std::setw(6) << e.age.n << std::setw(12) << std::setprecision(4) << e.age.mean
       << std::setw(10) << e.age.stddev << std::setw(10) << std::setprecision(0) << e.messages.mean << std::setw(14)
       << std::scientific << std::setprecision(3) << e.mac_ops.mean << std::fixed << std::setw(12)
       << std::setprecision(3) << e.wall_time.mean * 1e3 << std::setw(8) << e.failed << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryEntry>& entries) {
  os << "scheme,duplex,tx_rate_bps,uavs,seeds,failed,mean_age,sd_age,se_age,mean_power_w,messages,mac_ops,sd_mac_ops,"
        "wall_time_s,sd_wall_time_s\n";
  for (const auto& e : entries)
    os << to_string(e.key.scheme) << ',' << to_string(e.key.duplex) << ',' << csv::real(e.key.tx_rate) << ','
       << e.key.num_uavs << ',' << e.age.n << ',' << e.failed << ',' << csv::real(e.age.mean) << ','
       << csv::real(e.age.stddev) << ',' << csv::real(e.age.stderr_) << ',' << csv::real(e.power.mean) << ','
       << csv::real(e.messages.mean) << ',' << csv::real(e.mac_ops.mean) << ',' << csv::real(e.mac_ops.stddev) << ','
       << csv::real(e.wall_time.mean) << ',' << csv::real(e.wall_time.stddev) << '\n';
}

/// Two-column plot series (x, seed-mean age).
struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Age versus transmission rate, one series per (duplex, U, scheme).
inline std::vector<PlotSeries> rate_series(const std::vector<SummaryEntry>& entries) {
  std::map<std::string, PlotSeries> m;
  for (const auto& e : entries) {
    if (e.age.n == 0) continue;
    const std::string name = "rate_" + std::string(to_string(e.key.duplex)) + "_U" + std::to_string(e.key.num_uavs) +
                             "_" + std::string(to_string(e.key.scheme));
    m[name].name = name;
    m[name].points.emplace_back(e.key.tx_rate / 1e6, e.age.mean);
  }
  std::vector<PlotSeries> out;
  for (auto& [k, s] : m) {
    std::sort(s.points.begin(), s.points.end());
    out.push_back(std::move(s));
  }
  return out;
}

/// Age versus swarm size, one series per (duplex, rate, scheme).
inline std::vector<PlotSeries> swarm_series(const std::vector<SummaryEntry>& entries) {
  std::map<std::string, PlotSeries> m;
  for (const auto& e : entries) {
    if (e.age.n == 0) continue;
    std::ostringstream rate;
    rate << e.key.tx_rate / 1e6;
    const std::string name = "uavs_" + std::string(to_string(e.key.duplex)) + "_R" + rate.str() + "_" +
                             std::string(to_string(e.key.scheme));
    m[name].name = name;
    m[name].points.emplace_back(e.key.num_uavs, e.age.mean);
  }
  std::vector<PlotSeries> out;
  for (auto& [k, s] : m) {
    std::sort(s.points.begin(), s.points.end());
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_series(std::ostream& os, const PlotSeries& s) {
  for (const auto& [x, y] : s.points) os << csv::real(x) << ' ' << csv::real(y) << '\n';
}

}  // namespace uavage
