#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <string>

#include "error.hpp"

namespace csperf {

// Linear cell index, 0 .. 6N^2-1.
using cell_index = std::uint32_t;

// Cube unfolding used throughout:
//
//               +-------+
//               |   4   |   top     (+z)
//   +-------+---+-------+---+-------+-------+
//   |   3   |   0   |   1   |   2   |
//   | (-y)  |  (+x) |  (+y) |  (-x) |   equatorial ring, i runs east
//   +-------+-------+-------+-------+
//               |   5   |   bottom  (-z)
//               +-------+
//
// On every panel i grows towards the east edge and j towards the north edge.
// Ring panels: east(k) meets west(k+1) with matching j. The top and bottom
// panels are rotated relative to the ring, so some shared edges reverse the
// along-edge index; the table in detail::edge_links spells that out.
enum class direction : std::uint8_t { west = 0, east = 1, south = 2, north = 3 };

inline constexpr std::array<direction, 4> all_directions = {
    direction::west, direction::east, direction::south, direction::north};

struct cell_id {
  int panel = 0;
  int i = 0;
  int j = 0;

  friend bool operator==(const cell_id&, const cell_id&) = default;
};

namespace detail {

struct edge_link {
  int panel;        // panel on the other side
  direction enter;  // edge of that panel we arrive on
  bool reversed;    // along-edge index runs the other way
};

using W = direction;

// edge_links[panel][dir]
inline constexpr std::array<std::array<edge_link, 4>, 6> edge_links = {{
    //      west                 east                 south                north
    {{{3, W::east, false}, {1, W::west, false}, {5, W::north, false}, {4, W::south, false}}},
    {{{0, W::east, false}, {2, W::west, false}, {5, W::east, true}, {4, W::east, false}}},
    {{{1, W::east, false}, {3, W::west, false}, {5, W::south, true}, {4, W::north, true}}},
    {{{2, W::east, false}, {0, W::west, false}, {5, W::west, false}, {4, W::west, true}}},
    {{{3, W::north, true}, {1, W::north, false}, {0, W::north, false}, {2, W::north, true}}},
    {{{3, W::south, false}, {1, W::south, true}, {2, W::south, true}, {0, W::south, false}}},
}};

}  // namespace detail

// Cubed-sphere horizontal mesh plus a vertical level count. Adjacency is
// computed arithmetically, so the object is two integers and is cheap to copy.
class cubed_sphere_mesh {
public:
  // Largest N for which 6N^2 fits in cell_index.
  static constexpr int max_panel_size = 26754;

  cubed_sphere_mesh(int panel_size, int levels)
      : n_(panel_size), levels_(levels) {
    if (panel_size < 1)
      throw invalid_argument("mesh: panel_size must be >= 1, got " +
                             std::to_string(panel_size));
    if (panel_size > max_panel_size)
      throw invalid_argument("mesh: panel_size " + std::to_string(panel_size) +
                             " exceeds " + std::to_string(max_panel_size));
    if (levels < 1)
      throw invalid_argument("mesh: levels must be >= 1, got " +
                             std::to_string(levels));
  }

  int panel_size() const noexcept { return n_; }
  int levels() const noexcept { return levels_; }

  std::int64_t total_horizontal_cells() const noexcept {
    return 6 * static_cast<std::int64_t>(n_) * n_;
  }

  // Undirected edges of the 4-regular adjacency graph: 4 * cells / 2.
  std::int64_t edge_count() const noexcept { return 2 * total_horizontal_cells(); }

  // index = panel * N^2 + j * N + i
  cell_index to_index(const cell_id& c) const noexcept {
    const auto n = static_cast<cell_index>(n_);
    return static_cast<cell_index>(c.panel) * n * n +
           static_cast<cell_index>(c.j) * n + static_cast<cell_index>(c.i);
  }

  cell_id from_index(cell_index idx) const noexcept {
    const auto n = static_cast<cell_index>(n_);
    const cell_index per_panel = n * n;
    const cell_index in_panel = idx % per_panel;
    return {static_cast<int>(idx / per_panel), static_cast<int>(in_panel % n),
            static_cast<int>(in_panel / n)};
  }

  bool contains(const cell_id& c) const noexcept {
    return c.panel >= 0 && c.panel < 6 && c.i >= 0 && c.i < n_ && c.j >= 0 &&
           c.j < n_;
  }

  cell_id neighbor(const cell_id& c, direction d) const noexcept {
    const int last = n_ - 1;
    switch (d) {
      case direction::west:
        if (c.i > 0) return {c.panel, c.i - 1, c.j};
        break;
      case direction::east:
        if (c.i < last) return {c.panel, c.i + 1, c.j};
        break;
      case direction::south:
        if (c.j > 0) return {c.panel, c.i, c.j - 1};
        break;
      case direction::north:
        if (c.j < last) return {c.panel, c.i, c.j + 1};
        break;
    }
    const auto& link = detail::edge_links[c.panel][static_cast<int>(d)];
    const int along =
        (d == direction::west || d == direction::east) ? c.j : c.i;
    const int t = link.reversed ? last - along : along;
    switch (link.enter) {
      case direction::west: return {link.panel, 0, t};
      case direction::east: return {link.panel, last, t};
      case direction::south: return {link.panel, t, 0};
      case direction::north: return {link.panel, t, last};
    }
    return c;  // unreachable
  }

  // Neighbours in west, east, south, north order.
  std::array<cell_index, 4> neighbors(cell_index idx) const noexcept {
    const cell_id c = from_index(idx);
    std::array<cell_index, 4> out{};
    for (std::size_t k = 0; k < 4; ++k)
      out[k] = to_index(neighbor(c, all_directions[k]));
    return out;
  }

private:
  int n_;
  int levels_;
};

inline cubed_sphere_mesh build_mesh(int panel_size, int levels) {
  return cubed_sphere_mesh(panel_size, levels);
}

inline std::int64_t total_horizontal_cells(const cubed_sphere_mesh& mesh) {
  return mesh.total_horizontal_cells();
}

// Plain-text debugging summary.
inline std::string mesh_summary(const cubed_sphere_mesh& mesh) {
  std::ostringstream os;
  os << "mesh C" << mesh.panel_size() << "\n"
     << "  panel_size: " << mesh.panel_size() << "\n"
     << "  levels: " << mesh.levels() << "\n"
     << "  horizontal_cells: " << mesh.total_horizontal_cells() << "\n"
     << "  edges: " << mesh.edge_count() << "\n";
  return os.str();
}

}  // namespace csperf
