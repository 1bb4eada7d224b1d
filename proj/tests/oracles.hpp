#pragma once

// Independent reference implementations used by the tests. None of these
// share code with the library beyond the public cell linearisation.

#include <array>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include <csperf/mesh.hpp>

namespace oracle {

using vec3 = std::array<int, 3>;

// Panel frame on the cube [-N, N]^3: outward normal, +i axis, +j axis.
struct frame {
  vec3 normal, u, v;
};

inline const std::array<frame, 6>& frames() {
  static const std::array<frame, 6> f = {{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},    // +x
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}},   // +y
      {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},  // -x
      {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},   // -y
      {{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}},   // +z
      {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},   // -z
  }};
  return f;
}

// Lattice corners of a cell, cells being 2 units wide.
inline std::array<vec3, 4> corners(int n, const csperf::cell_id& c) {
  const frame& f = frames()[static_cast<std::size_t>(c.panel)];
  std::array<vec3, 4> out{};
  int k = 0;
  for (int di = 0; di <= 1; ++di)
    for (int dj = 0; dj <= 1; ++dj) {
      const int a = -n + 2 * (c.i + di);
      const int b = -n + 2 * (c.j + dj);
      for (int x = 0; x < 3; ++x) out[k][x] = n * f.normal[x] + a * f.u[x] + b * f.v[x];
      ++k;
    }
  return out;
}

// Cells sharing exactly two lattice corners share an edge.
inline std::vector<std::set<std::uint32_t>> geometric_adjacency(int n) {
  const csperf::cubed_sphere_mesh mesh(n, 1);
  const auto cells = static_cast<std::uint32_t>(mesh.total_horizontal_cells());
  std::map<vec3, std::vector<std::uint32_t>> by_corner;
  for (std::uint32_t c = 0; c < cells; ++c)
    for (const auto& p : corners(n, mesh.from_index(c))) by_corner[p].push_back(c);
  std::vector<std::map<std::uint32_t, int>> shared(cells);
  for (const auto& [p, list] : by_corner)
    for (auto a : list)
      for (auto b : list)
        if (a != b) ++shared[a][b];
  std::vector<std::set<std::uint32_t>> adj(cells);
  for (std::uint32_t c = 0; c < cells; ++c)
    for (const auto& [other, count] : shared[c])
      if (count == 2) adj[c].insert(other);
  return adj;
}

// Breadth-first distance of every cell from a seed set over `adj`.
inline std::vector<int> distances(const std::vector<std::set<std::uint32_t>>& adj,
                                  const std::vector<std::uint32_t>& seeds) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<std::uint32_t> q;
  for (auto s : seeds) {
    dist[s] = 0;
    q.push(s);
  }
  while (!q.empty()) {
    const auto c = q.front();
    q.pop();
    for (auto nb : adj[c])
      if (dist[nb] < 0) {
        dist[nb] = dist[c] + 1;
        q.push(nb);
      }
  }
  return dist;
}

}  // namespace oracle
