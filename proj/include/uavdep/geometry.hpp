#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace uavdep {

struct GroundPoint {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const GroundPoint& a, const GroundPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct UavPosition {
  double x = 0.0;
  double y = 0.0;
  double altitude = 0.0;
};

inline double horizontal_distance(const UavPosition& u, const GroundPoint& p) {
  return std::hypot(u.x - p.x, u.y - p.y);
}

inline double distance3d(const UavPosition& u, const GroundPoint& p) {
  return std::hypot(u.x - p.x, u.y - p.y, u.altitude);
}

struct UavDeployment {
  std::vector<UavPosition> positions;

  std::size_t size() const { return positions.size(); }
  const UavPosition& operator[](std::size_t i) const { return positions[i]; }
  UavPosition& operator[](std::size_t i) { return positions[i]; }
};

/// Flight region: [x_min,x_max] x [y_min,y_max] x [alt_min,alt_max].
struct FlightBox {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double alt_min = 0.0, alt_max = 0.0;

  bool contains(const UavPosition& u) const {
    return u.x >= x_min && u.x <= x_max && u.y >= y_min && u.y <= y_max &&
           u.altitude >= alt_min && u.altitude <= alt_max;
  }

  UavPosition clamp(const UavPosition& u) const {
    return {std::clamp(u.x, x_min, x_max), std::clamp(u.y, y_min, y_max),
            std::clamp(u.altitude, alt_min, alt_max)};
  }
};

/// Regular discretization of the ground region; cells addressed (row, col)
/// with row along y and col along x.
struct GroundGrid {
  GroundPoint origin;
  double cell_size = 0.0;
  int nx = 0;
  int ny = 0;

  int num_cells() const { return nx * ny; }
  double cell_area() const { return cell_size * cell_size; }
  int index(int row, int col) const { return row * nx + col; }

  GroundPoint center(int row, int col) const {
    return {origin.x + (col + 0.5) * cell_size,
            origin.y + (row + 0.5) * cell_size};
  }
};

inline GroundGrid make_square_grid(double side_length, int n) {
  if (n < 1 || side_length <= 0.0)
    throw std::invalid_argument("make_square_grid: bad dimensions");
  return {{0.0, 0.0}, side_length / n, n, n};
}

/// Scalar field over a GroundGrid (true or estimated UE intensity).
struct IntensityGrid {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // row-major, size nx*ny

  IntensityGrid() = default;
  IntensityGrid(int nx_, int ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), values(static_cast<std::size_t>(nx_) * ny_, fill) {}

  double at(int row, int col) const { return values[row * nx + col]; }
  double& at(int row, int col) { return values[row * nx + col]; }
};

}  // namespace uavdep
