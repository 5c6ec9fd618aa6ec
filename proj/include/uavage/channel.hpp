#pragma once

#include <cmath>
#include <string>

#include "uavage/common.hpp"

// Line-of-sight link budget, uplink power, and cycle timing for one UAV frame.
// All quantities are linear SI units; dB helpers convert configuration values.

namespace uavage {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct LinkBudget {
  double beta0 = 1e3;          // channel gain at 1 m (30 dB)
  double noise_power = 1e-13;  // W (-100 dBm)
  double bandwidth = 1e6;      // Hz
  double packet_size = 5e6;    // bits

  static LinkBudget from_db(double beta0_db, double noise_dbm, double bandwidth_hz, double packet_bits) {
    return {db_to_linear(beta0_db), dbm_to_watts(noise_dbm), bandwidth_hz, packet_bits};
  }
};

struct RateConfig {
  double tx_rate = 31.25e6;  // bits/s
  Duplex duplex = Duplex::full;
};

struct CycleTiming {
  double t_nav = 0.0;
  double t_tx = 0.0;
  double t_relay = 0.0;
};

inline double nav_time(double cell_size, double velocity) {
  if (!(velocity > 0.0)) throw std::invalid_argument("velocity must be > 0");
  return cell_size / velocity;
}

/// Half duplex splits the navigation time between uplink and relay; full duplex overlaps them.
inline CycleTiming cycle_timing(Duplex duplex, double cell_size, double velocity) {
  const double tn = nav_time(cell_size, velocity);
  const double share = duplex == Duplex::half ? tn / 2.0 : tn;
  return {tn, share, share};
}

/// Largest number of packets a UAV can collect during one transmission stage.
/// Throws ConfigError when not even one packet fits.
inline int cluster_capacity(const RateConfig& rate, double cell_size, double velocity, double packet_size) {
  if (!(rate.tx_rate > 0.0) || !(cell_size > 0.0) || !(velocity > 0.0) || !(packet_size > 0.0))
    throw ConfigError("cluster capacity inputs must be positive");
  const double divisor = (rate.duplex == Duplex::half ? 2.0 : 1.0) * packet_size * velocity;
  const double bound = rate.tx_rate * cell_size / divisor;
  // absorb representation error when the bound is an exact integer
  const double capacity = std::floor(bound * (1.0 + 1e-12));
  if (capacity < 1.0)
    throw ConfigError("cluster capacity bound R_T*L_c/(" +
                      std::string(rate.duplex == Duplex::half ? "2*" : "") +
                      "M*v_u) = " + std::to_string(bound) +
                      " < 1: transmission rate too low to serve one device per frame");
  return static_cast<int>(capacity);
}

/// Device-to-UAV gain.
inline double gain_device(double uav_height, double horizontal_distance, const LinkBudget& budget) {
  return budget.beta0 / (uav_height * uav_height + horizontal_distance * horizontal_distance);
}

/// Uplink power needed to deliver one packet within the bandwidth at the given gain.
inline double tx_power(double gain, const LinkBudget& budget) {
  return (std::exp2(budget.packet_size / budget.bandwidth) - 1.0) * budget.noise_power / gain;
}

/// UAV-to-BS gain. Logged only; relaying is assumed reliable.
inline double gain_bs(double uav_height, double horizontal_distance, double bs_height, const LinkBudget& budget) {
  const double dh = std::abs(uav_height - bs_height);
  return budget.beta0 / (dh * dh + horizontal_distance * horizontal_distance);
}

}  // namespace uavage
