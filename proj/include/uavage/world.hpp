#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "uavage/common.hpp"

namespace uavage {

/// Movement choices of one UAV per frame, in the order used by action indices.
enum class Direction : int { north = 0, south = 1, east = 2, west = 3, hover = 4 };

inline constexpr int kNumDirections = 5;
inline constexpr std::array<Direction, kNumDirections> kDirections{
    Direction::north, Direction::south, Direction::east, Direction::west, Direction::hover};

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::north: return "north";
    case Direction::south: return "south";
    case Direction::east: return "east";
    case Direction::west: return "west";
    case Direction::hover: return "hover";
  }
  return "?";
}

/// Cell offset produced by one move.
constexpr Cell direction_offset(Direction d) {
  switch (d) {
    case Direction::north: return {0, 1};
    case Direction::south: return {0, -1};
    case Direction::east: return {1, 0};
    case Direction::west: return {-1, 0};
    case Direction::hover: return {0, 0};
  }
  return {0, 0};
}

struct WorldConfig {
  int grid_cells_x = 11;
  int grid_cells_y = 11;
  double cell_size = 100.0;          // L_c, meters
  std::optional<Cell> bs_cell;       // defaults to the geometric center cell
  double bs_height = 15.0;           // meters
  std::vector<Cell> restricted_cells;
  double frame_duration = 4.0;       // seconds
  std::uint64_t rng_seed = 0;
};

struct Device {
  int id = 0;
  Point position;
  double weight = 1.0;
  int cluster_id = -1;
};

struct Cluster {
  int id = 0;
  std::vector<int> member_ids;
  Point centroid;
};

struct UavConfig {
  int count = 1;
  double height = 100.0;    // meters
  double velocity = 25.0;   // m/s
  Duplex duplex = Duplex::full;
  std::vector<Cell> start_positions;  // empty: every UAV starts at the BS cell
};

/// Immutable grid geometry. Valid cells are the grid set minus the restricted zone.
class GridWorld {
 public:
  explicit GridWorld(WorldConfig config) : config_(std::move(config)) {
    if (config_.grid_cells_x < 1 || config_.grid_cells_y < 1)
      throw ConfigError("grid dimensions must be >= 1");
    if (!(config_.cell_size > 0.0)) throw ConfigError("cell_size must be > 0");
    if (!config_.bs_cell) config_.bs_cell = Cell{config_.grid_cells_x / 2, config_.grid_cells_y / 2};
    if (!in_grid(*config_.bs_cell)) throw ConfigError("base station cell lies outside the grid");
    restricted_.assign(static_cast<std::size_t>(config_.grid_cells_x) * config_.grid_cells_y, false);
    for (const Cell& c : config_.restricted_cells) {
      if (!in_grid(c))
        throw ConfigError("restricted cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                          ") lies outside the grid");
      restricted_[index(c)] = true;
    }
    if (restricted_[index(*config_.bs_cell)])
      throw ConfigError("base station cell lies inside the restricted zone");
  }

  const WorldConfig& config() const { return config_; }
  int cells_x() const { return config_.grid_cells_x; }
  int cells_y() const { return config_.grid_cells_y; }
  double cell_size() const { return config_.cell_size; }
  double extent_x() const { return config_.grid_cells_x * config_.cell_size; }
  double extent_y() const { return config_.grid_cells_y * config_.cell_size; }
  double bs_height() const { return config_.bs_height; }
  Cell bs_cell() const { return *config_.bs_cell; }
  Point bs_position() const { return cell_center(bs_cell()); }

  bool in_grid(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < config_.grid_cells_x && c.y < config_.grid_cells_y;
  }
  bool is_restricted(Cell c) const { return in_grid(c) && restricted_[index(c)]; }
  bool is_valid(Cell c) const { return in_grid(c) && !restricted_[index(c)]; }

  Point cell_center(Cell c) const {
    return {(c.x + 0.5) * config_.cell_size, (c.y + 0.5) * config_.cell_size};
  }

  /// Cell containing a point; points on the far boundary map to the last cell.
  Cell cell_of(Point p) const {
    auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    return {clampi(static_cast<int>(std::floor(p.x / config_.cell_size)), config_.grid_cells_x),
            clampi(static_cast<int>(std::floor(p.y / config_.cell_size)), config_.grid_cells_y)};
  }

  std::vector<Cell> valid_cells() const {
    std::vector<Cell> out;
    for (int y = 0; y < cells_y(); ++y)
      for (int x = 0; x < cells_x(); ++x)
        if (is_valid({x, y})) out.push_back({x, y});
    return out;
  }

 private:
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * config_.grid_cells_x + c.x;
  }

  WorldConfig config_;
  std::vector<bool> restricted_;
};

inline GridWorld build_world(WorldConfig config) { return GridWorld(std::move(config)); }

/// Uniform i.i.d. device positions over the grid extent, weights 1/count.
inline std::vector<Device> place_devices(const GridWorld& world, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("device count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, world.extent_x());
  std::uniform_real_distribution<double> uy(0.0, world.extent_y());
  std::vector<Device> devices(static_cast<std::size_t>(count));
  for (int d = 0; d < count; ++d) {
    devices[d].id = d;
    devices[d].position.x = ux(rng);
    devices[d].position.y = uy(rng);
    devices[d].weight = 1.0 / count;
  }
  return devices;
}

/// Balanced geographic clustering: devices sorted row-major over their cells
/// (then by exact position and id), filled sequentially up to `capacity`.
/// Writes the cluster id back into each device.
inline std::vector<Cluster> cluster_devices(std::vector<Device>& devices, int capacity,
                                            const GridWorld& world) {
  if (capacity < 1) throw ConfigError("cluster capacity must be >= 1");
  std::vector<int> order(devices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto key = [&](int i) {
    const Device& d = devices[i];
    Cell c = world.cell_of(d.position);
    return std::make_tuple(c.y, c.x, d.position.y, d.position.x, d.id);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  const int n = static_cast<int>(devices.size());
  const int num_clusters = (n + capacity - 1) / capacity;
  std::vector<Cluster> clusters(static_cast<std::size_t>(num_clusters));
  for (int k = 0; k < num_clusters; ++k) clusters[k].id = k;
  for (int pos = 0; pos < n; ++pos) {
    Cluster& c = clusters[pos / capacity];
    Device& d = devices[order[pos]];
    d.cluster_id = c.id;
    c.member_ids.push_back(d.id);
  }
  for (Cluster& c : clusters) {
    double sx = 0.0, sy = 0.0;
    for (int id : c.member_ids) {
      sx += devices[id].position.x;
      sy += devices[id].position.y;
    }
    c.centroid = {sx / c.member_ids.size(), sy / c.member_ids.size()};
  }
  return clusters;
}

/// One navigation step. Moves that would leave the grid or enter the
/// restricted zone degrade to hover.
inline Cell apply_move(Cell location, Direction direction, const GridWorld& world) {
  Cell off = direction_offset(direction);
  Cell next{location.x + off.x, location.y + off.y};
  return world.is_valid(next) ? next : location;
}

inline bool move_is_valid(Cell location, Direction direction, const GridWorld& world) {
  Cell off = direction_offset(direction);
  return world.is_valid({location.x + off.x, location.y + off.y});
}

/// Start cells for every UAV, validated against the world.
inline std::vector<Cell> resolve_start_positions(const UavConfig& uav, const GridWorld& world) {
  if (uav.count < 1) throw ConfigError("UAV count must be >= 1");
  if (!(uav.velocity > 0.0)) throw ConfigError("UAV velocity must be > 0");
  if (!(uav.height > 0.0)) throw ConfigError("UAV height must be > 0");
  std::vector<Cell> starts;
  if (uav.start_positions.empty()) {
    starts.assign(static_cast<std::size_t>(uav.count), world.bs_cell());
  } else {
    if (static_cast<int>(uav.start_positions.size()) != uav.count)
      throw ConfigError("start_positions must list one cell per UAV");
    starts = uav.start_positions;
  }
  for (const Cell& c : starts)
    if (!world.is_valid(c)) throw ConfigError("UAV start cell is outside the grid or restricted");
  return starts;
}

}  // namespace uavage
