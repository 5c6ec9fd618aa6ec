#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uavage {

/// Grid cell index. (0,0) is the south-west corner cell.
struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Planar coordinate in meters, measured from the south-west corner of the grid.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class Duplex { half, full };

inline std::string_view to_string(Duplex d) { return d == Duplex::half ? "half" : "full"; }

inline Duplex parse_duplex(std::string_view s) {
  if (s == "half") return Duplex::half;
  if (s == "full") return Duplex::full;
  throw std::invalid_argument("unknown duplex mode '" + std::string(s) + "' (expected half|full)");
}

/// Raised for physically inconsistent or malformed configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent RNG streams from a seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t role, std::uint64_t index = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ role) ^ index);
}

}  // namespace uavage
