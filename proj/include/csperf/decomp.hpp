#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace csperf {

enum class decomposition_mode { exchange_halos, redundant_compute };

// Default halo payload: 120 levels * 8-byte words * 3 exchanged fields.
inline constexpr std::int64_t default_bytes_per_cell = 120 * 8 * 3;

// Half-open rectangle [i0,i1) x [j0,j1) on one panel.
struct cell_block {
  int panel = 0;
  int i0 = 0, i1 = 0;
  int j0 = 0, j1 = 0;

  std::int64_t size() const noexcept {
    return static_cast<std::int64_t>(i1 - i0) * (j1 - j0);
  }
  bool contains(const cell_id& c) const noexcept {
    return c.panel == panel && c.i >= i0 && c.i < i1 && c.j >= j0 && c.j < j1;
  }
};

namespace detail {

// Sizes of `parts` contiguous ranges covering `n`; the last n % parts
// ranges carry one extra element.
inline std::vector<int> split_starts(int n, int parts) {
  std::vector<int> starts(parts + 1, 0);
  const int base = n / parts;
  const int extra = n % parts;
  for (int b = 0; b < parts; ++b)
    starts[b + 1] = starts[b] + base + (b >= parts - extra ? 1 : 0);
  return starts;
}

inline std::vector<int> range_lookup(const std::vector<int>& starts) {
  std::vector<int> lookup(starts.back());
  for (std::size_t b = 0; b + 1 < starts.size(); ++b)
    std::fill(lookup.begin() + starts[b], lookup.begin() + starts[b + 1],
              static_cast<int>(b));
  return lookup;
}

inline bool sorted_contains(const std::vector<cell_index>& v, cell_index c) {
  return std::binary_search(v.begin(), v.end(), c);
}

}  // namespace detail

// Assignment of mesh cells to ranks plus (optionally) the depth-d halo rings
// of every rank.
//
// Two layouts exist:
//  - ranks a multiple of 6: each panel is cut into p x q rectangular blocks,
//    rank = panel * (p*q) + bj * p + bi;
//  - ranks in {1, 2, 3}: each rank owns 6/ranks whole panels.
class decomposition {
public:
  decomposition(const cubed_sphere_mesh& mesh, int ranks,
                decomposition_mode mode = decomposition_mode::exchange_halos)
      : mesh_(mesh), ranks_(ranks), mode_(mode) {
    const std::int64_t cells = mesh.total_horizontal_cells();
    if (ranks < 1)
      throw invalid_argument("partition: ranks must be >= 1, got " +
                             std::to_string(ranks));
    if (ranks > cells)
      throw invalid_argument("partition: " + std::to_string(ranks) +
                             " ranks exceed " + std::to_string(cells) +
                             " cells");
    const int n = mesh.panel_size();
    if (ranks % 6 == 0) {
      blocks_per_panel_ = ranks / 6;
      choose_block_grid(n);
    } else if (6 % ranks == 0) {
      panels_per_rank_ = 6 / ranks;
      blocks_i_ = blocks_j_ = 1;
    } else {
      throw invalid_argument("partition: ranks must be a multiple of 6 or one of "
                             "{1, 2, 3}, got " + std::to_string(ranks));
    }
    i_starts_ = detail::split_starts(n, blocks_i_);
    j_starts_ = detail::split_starts(n, blocks_j_);
    i_block_ = detail::range_lookup(i_starts_);
    j_block_ = detail::range_lookup(j_starts_);
  }

  const cubed_sphere_mesh& mesh() const noexcept { return mesh_; }
  int ranks() const noexcept { return ranks_; }
  decomposition_mode mode() const noexcept { return mode_; }
  void set_mode(decomposition_mode mode) noexcept { mode_ = mode; }

  // Block grid on each panel (1 x 1 for whole-panel layouts).
  int blocks_i() const noexcept { return blocks_i_; }
  int blocks_j() const noexcept { return blocks_j_; }

  int owner(const cell_id& c) const noexcept {
    if (panels_per_rank_ > 0) return c.panel / panels_per_rank_;
    return c.panel * blocks_per_panel_ + j_block_[c.j] * blocks_i_ +
           i_block_[c.i];
  }
  int owner(cell_index idx) const noexcept { return owner(mesh_.from_index(idx)); }

  std::vector<cell_block> blocks(int rank) const {
    const int n = mesh_.panel_size();
    std::vector<cell_block> out;
    if (panels_per_rank_ > 0) {
      for (int p = rank * panels_per_rank_; p < (rank + 1) * panels_per_rank_; ++p)
        out.push_back({p, 0, n, 0, n});
      return out;
    }
    const int panel = rank / blocks_per_panel_;
    const int local = rank % blocks_per_panel_;
    const int bi = local % blocks_i_;
    const int bj = local / blocks_i_;
    out.push_back({panel, i_starts_[bi], i_starts_[bi + 1], j_starts_[bj],
                   j_starts_[bj + 1]});
    return out;
  }

  std::int64_t owned_count(int rank) const {
    std::int64_t total = 0;
    for (const auto& b : blocks(rank)) total += b.size();
    return total;
  }

  // Owned cells as sorted linear indices.
  std::vector<cell_index> owned(int rank) const {
    std::vector<cell_index> out;
    for (const auto& b : blocks(rank))
      for (int j = b.j0; j < b.j1; ++j)
        for (int i = b.i0; i < b.i1; ++i)
          out.push_back(mesh_.to_index({b.panel, i, j}));
    std::sort(out.begin(), out.end());
    return out;
  }

  bool halos_computed() const noexcept { return halo_depth_ > 0; }
  int halo_depth() const noexcept { return halo_depth_; }

  // Depth of halo computed redundantly in redundant_compute mode. Defaults to
  // the halo depth.
  int redundant_depth() const noexcept {
    return redundant_depth_ > 0 ? std::min(redundant_depth_, halo_depth_)
                                : halo_depth_;
  }
  void set_redundant_depth(int depth) {
    if (depth < 0) throw invalid_argument("redundant depth must be >= 0");
    redundant_depth_ = depth;
  }

  // rings[k] holds the sorted cells at graph distance k+1 from the owned set.
  const std::vector<std::vector<cell_index>>& halo_rings(int rank) const {
    return halos_.at(static_cast<std::size_t>(rank));
  }

  std::int64_t halo_count(int rank, int max_depth = -1) const {
    const auto& rings = halo_rings(rank);
    std::int64_t total = 0;
    const int depth = max_depth < 0 ? static_cast<int>(rings.size()) : max_depth;
    for (int k = 0; k < depth && k < static_cast<int>(rings.size()); ++k)
      total += static_cast<std::int64_t>(rings[k].size());
    return total;
  }

  std::vector<cell_index> halo(int rank) const {
    std::vector<cell_index> out;
    for (const auto& ring : halo_rings(rank))
      out.insert(out.end(), ring.begin(), ring.end());
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  friend decomposition compute_halos(const cubed_sphere_mesh&,
                                     const decomposition&, int);

  // Squarest blocks: minimise |q/p - 1| over p*q = blocks_per_panel with
  // p, q <= N; ties go to the larger p.
  void choose_block_grid(int n) {
    const int m = blocks_per_panel_;
    int best_p = 0, best_q = 0;
    for (int p = 1; p <= m; ++p) {
      if (m % p != 0) continue;
      const int q = m / p;
      if (p > n || q > n) continue;
      if (best_p == 0) {
        best_p = p, best_q = q;
        continue;
      }
      // |q-p|/p vs |best_q-best_p|/best_p
      const std::int64_t lhs = static_cast<std::int64_t>(std::abs(q - p)) * best_p;
      const std::int64_t rhs =
          static_cast<std::int64_t>(std::abs(best_q - best_p)) * p;
      if (lhs < rhs || (lhs == rhs && p > best_p)) best_p = p, best_q = q;
    }
    if (best_p == 0)
      throw invalid_argument("partition: " + std::to_string(m) +
                             " blocks per panel cannot be arranged as p x q "
                             "with p, q <= " + std::to_string(n));
    blocks_i_ = best_p;
    blocks_j_ = best_q;
  }

  cubed_sphere_mesh mesh_;
  int ranks_;
  decomposition_mode mode_;
  int blocks_per_panel_ = 0;
  int panels_per_rank_ = 0;
  int blocks_i_ = 1, blocks_j_ = 1;
  std::vector<int> i_starts_, j_starts_;
  std::vector<int> i_block_, j_block_;
  int halo_depth_ = 0;
  int redundant_depth_ = 0;
  std::vector<std::vector<std::vector<cell_index>>> halos_;
};

inline decomposition partition(
    const cubed_sphere_mesh& mesh, int ranks,
    decomposition_mode mode = decomposition_mode::exchange_halos) {
  return decomposition(mesh, ranks, mode);
}

// Horizontal cells per core.
struct local_area_t {
  std::int64_t cells;
  std::int64_t cores;

  double value() const noexcept { return static_cast<double>(cells) / cores; }
  bool is_integral() const noexcept { return cells % cores == 0; }
  std::int64_t integral() const noexcept { return cells / cores; }
};

inline local_area_t local_area(const cubed_sphere_mesh& mesh,
                               std::int64_t total_cores) {
  if (total_cores < 1)
    throw invalid_argument("local_area: total_cores must be >= 1");
  return {mesh.total_horizontal_cells(), total_cores};
}

// Breadth-first rings of non-owned cells around each rank's subdomain.
inline decomposition compute_halos(const cubed_sphere_mesh& mesh,
                                   const decomposition& decomp, int depth) {
  if (depth < 1)
    throw invalid_argument("compute_halos: depth must be >= 1, got " +
                           std::to_string(depth));
  if (depth > mesh.panel_size())
    throw invalid_argument("compute_halos: depth " + std::to_string(depth) +
                           " exceeds panel size " +
                           std::to_string(mesh.panel_size()));
  if (mesh.panel_size() != decomp.mesh().panel_size())
    throw invalid_argument("compute_halos: mesh does not match decomposition");

  decomposition out = decomp;
  out.halo_depth_ = depth;
  out.halos_.assign(static_cast<std::size_t>(decomp.ranks()), {});
  if (decomp.ranks() == 1) {
    out.halos_[0].assign(static_cast<std::size_t>(depth), {});
    return out;
  }

  std::vector<cell_index> next;
  for (int r = 0; r < decomp.ranks(); ++r) {
    auto& rings = out.halos_[static_cast<std::size_t>(r)];
    rings.assign(static_cast<std::size_t>(depth), {});

    // Ring 1 only needs the perimeter of each owned block.
    next.clear();
    for (const auto& b : decomp.blocks(r)) {
      auto visit = [&](int i, int j) {
        const cell_id c{b.panel, i, j};
        for (direction d : all_directions) {
          const cell_id nb = mesh.neighbor(c, d);
          if (decomp.owner(nb) != r) next.push_back(mesh.to_index(nb));
        }
      };
      for (int i = b.i0; i < b.i1; ++i) {
        visit(i, b.j0);
        if (b.j1 - 1 != b.j0) visit(i, b.j1 - 1);
      }
      for (int j = b.j0 + 1; j < b.j1 - 1; ++j) {
        visit(b.i0, j);
        if (b.i1 - 1 != b.i0) visit(b.i1 - 1, j);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    rings[0] = next;

    for (int k = 1; k < depth; ++k) {
      next.clear();
      for (cell_index c : rings[k - 1]) {
        for (cell_index nb : mesh.neighbors(c)) {
          if (decomp.owner(nb) == r) continue;
          bool seen = false;
          for (int prev = 0; prev < k && !seen; ++prev)
            seen = detail::sorted_contains(rings[prev], nb);
          if (!seen) next.push_back(nb);
        }
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      rings[k] = next;
    }
  }
  return out;
}

struct halo_message {
  int src = 0;
  int dst = 0;
  std::int64_t cells = 0;
  std::int64_t bytes = 0;

  friend bool operator==(const halo_message&, const halo_message&) = default;
};

// Point-to-point traffic of one halo exchange.
struct exchange_pattern {
  std::vector<halo_message> messages;  // sorted by (src, dst)
  std::int64_t bytes_per_cell = default_bytes_per_cell;

  std::int64_t total_bytes() const noexcept {
    std::int64_t total = 0;
    for (const auto& m : messages) total += m.bytes;
    return total;
  }

  std::int64_t bytes_sent(int rank) const noexcept {
    std::int64_t total = 0;
    for (const auto& m : messages)
      if (m.src == rank) total += m.bytes;
    return total;
  }

  std::int64_t bytes_received(int rank) const noexcept {
    std::int64_t total = 0;
    for (const auto& m : messages)
      if (m.dst == rank) total += m.bytes;
    return total;
  }

  // Ranks sending or receiving at least one message.
  int participating_ranks() const {
    std::vector<int> ranks;
    for (const auto& m : messages) {
      ranks.push_back(m.src);
      ranks.push_back(m.dst);
    }
    std::sort(ranks.begin(), ranks.end());
    return static_cast<int>(std::unique(ranks.begin(), ranks.end()) - ranks.begin());
  }
};

// One message per (owner -> halo holder) pair. In redundant_compute mode the
// rings up to the redundant depth are recomputed locally and drop out.
inline exchange_pattern make_exchange_pattern(
    const decomposition& decomp,
    std::int64_t bytes_per_cell = default_bytes_per_cell) {
  if (!decomp.halos_computed())
    throw invalid_argument("exchange_pattern: halos have not been computed");
  if (bytes_per_cell < 1)
    throw invalid_argument("exchange_pattern: bytes_per_cell must be >= 1");

  const int first_ring = decomp.mode() == decomposition_mode::redundant_compute
                             ? decomp.redundant_depth()
                             : 0;
  exchange_pattern pattern;
  pattern.bytes_per_cell = bytes_per_cell;
  std::map<int, std::int64_t> from;
  for (int dst = 0; dst < decomp.ranks(); ++dst) {
    from.clear();
    const auto& rings = decomp.halo_rings(dst);
    for (std::size_t k = static_cast<std::size_t>(first_ring); k < rings.size(); ++k)
      for (cell_index c : rings[k]) ++from[decomp.owner(c)];
    for (const auto& [src, cells] : from)
      pattern.messages.push_back({src, dst, cells, cells * bytes_per_cell});
  }
  std::sort(pattern.messages.begin(), pattern.messages.end(),
            [](const halo_message& a, const halo_message& b) {
              return a.src != b.src ? a.src < b.src : a.dst < b.dst;
            });
  return pattern;
}

// Extra cells each rank computes in redundant_compute mode (zero otherwise).
inline std::vector<std::int64_t> redundant_compute_extent(
    const decomposition& decomp) {
  std::vector<std::int64_t> extra(static_cast<std::size_t>(decomp.ranks()), 0);
  if (decomp.mode() != decomposition_mode::redundant_compute) return extra;
  if (!decomp.halos_computed())
    throw invalid_argument("redundant_compute_extent: halos have not been computed");
  for (int r = 0; r < decomp.ranks(); ++r)
    extra[static_cast<std::size_t>(r)] = decomp.halo_count(r, decomp.redundant_depth());
  return extra;
}

// CSV columns: rank,owned,halo,neighbors,bytes_out
inline std::string decomposition_csv(const decomposition& decomp,
                                     const exchange_pattern& pattern) {
  std::vector<int> peers(static_cast<std::size_t>(decomp.ranks()), 0);
  std::vector<std::int64_t> bytes_out(static_cast<std::size_t>(decomp.ranks()), 0);
  for (const auto& m : pattern.messages) {
    ++peers[static_cast<std::size_t>(m.src)];
    bytes_out[static_cast<std::size_t>(m.src)] += m.bytes;
  }
  std::ostringstream os;
  os << "rank,owned,halo,neighbors,bytes_out\n";
  for (int r = 0; r < decomp.ranks(); ++r)
    os << r << ',' << decomp.owned_count(r) << ','
       << (decomp.halos_computed() ? decomp.halo_count(r) : 0) << ','
       << peers[static_cast<std::size_t>(r)] << ','
       << bytes_out[static_cast<std::size_t>(r)] << '\n';
  return os.str();
}

}  // namespace csperf
