#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "uavdep/channel.hpp"
#include "uavdep/geometry.hpp"

namespace uavdep {

/// Discrete signal-weighted Voronoi partition: per grid cell, the index of
/// the UAV with the strongest mean signal power (ties to the lowest index).
struct CellAssignment {
  int nx = 0;
  int ny = 0;
  int num_uavs = 0;
  std::vector<int> labels;  // row-major, size nx*ny

  int at(int row, int col) const { return labels[row * nx + col]; }
};

/// UAV adjacency over the partition. Every node carries a self-loop and
/// degrees count it; UAVs owning no cell are flagged.
struct NeighborGraph {
  int num_nodes = 0;
  std::vector<char> adjacency;  // num_nodes*num_nodes, symmetric
  std::vector<int> degrees;
  std::vector<char> empty_cell;  // UAV owns zero grid cells

  bool connected(int i, int j) const { return adjacency[i * num_nodes + j] != 0; }
};

inline CellAssignment assign_cells(const UavDeployment& deployment,
                                   const GroundGrid& grid,
                                   const ChannelEnvironment& env) {
  const int u_count = static_cast<int>(deployment.size());
  if (u_count < 1)
    throw std::invalid_argument("assign_cells: empty deployment");
  CellAssignment out;
  out.nx = grid.nx;
  out.ny = grid.ny;
  out.num_uavs = u_count;
  out.labels.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int row = 0; row < grid.ny; ++row) {
    for (int col = 0; col < grid.nx; ++col) {
      const GroundPoint y = grid.center(row, col);
      int best = 0;
      double best_power = mean_signal_power(deployment[0], y, env);
      for (int i = 1; i < u_count; ++i) {
        const double p = mean_signal_power(deployment[i], y, env);
        if (p > best_power) {
          best_power = p;
          best = i;
        }
      }
      out.labels[grid.index(row, col)] = best;
    }
  }
  return out;
}

/// Builds the Delaunay-style neighbor graph from 4-adjacency of cell labels.
inline NeighborGraph neighbor_graph(const CellAssignment& assignment) {
  const int n = assignment.num_uavs;
  if (n < 1) throw std::invalid_argument("neighbor_graph: no UAVs");
  NeighborGraph g;
  g.num_nodes = n;
  g.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
  g.empty_cell.assign(n, 1);
  auto link = [&](int a, int b) {
    g.adjacency[a * n + b] = 1;
    g.adjacency[b * n + a] = 1;
  };
  for (int i = 0; i < n; ++i) link(i, i);
  for (int row = 0; row < assignment.ny; ++row) {
    for (int col = 0; col < assignment.nx; ++col) {
      const int label = assignment.at(row, col);
      g.empty_cell[label] = 0;
      if (col + 1 < assignment.nx) {
        const int right = assignment.at(row, col + 1);
        if (right != label) link(label, right);
      }
      if (row + 1 < assignment.ny) {
        const int below = assignment.at(row + 1, col);
        if (below != label) link(label, below);
      }
    }
  }
  g.degrees.assign(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (g.connected(i, j)) ++g.degrees[i];
  return g;
}

}  // namespace uavdep
