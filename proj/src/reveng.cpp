#include <algorithm>
#include <numeric>
#include <set>

#include "fcdram/error.hpp"
#include "fcdram/harness.hpp"

namespace fcdram {

namespace {

struct UnionFind {
  std::vector<std::uint64_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::uint64_t find(std::uint64_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint64_t a, std::uint64_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Copies a fresh pattern from src to dst over a destination holding its
// complement and returns the fraction of columns that arrived intact.
double clone_match(Engine& engine, RowAddress src, RowAddress dst, Rng& rng) {
  const std::uint32_t C = engine.topology().columns();
  Bits pattern(C), inverse(C);
  rng.fill_bits(pattern);
  for (std::uint32_t c = 0; c < C; ++c) inverse[c] = pattern[c] ^ 1U;
  engine.poke_row(src, pattern);
  engine.poke_row(dst, inverse);
  engine.execute(rowclone_trace(engine.profile(), src, dst), rng);
  const Bits got = engine.peek_row(dst);
  std::uint32_t same = 0;
  for (std::uint32_t c = 0; c < C; ++c) same += got[c] == pattern[c] ? 1U : 0U;
  return static_cast<double>(same) / C;
}

}  // namespace

std::vector<std::vector<std::uint64_t>> infer_subarray_map(Engine& engine, Rng& rng) {
  const ChipProfile& p = engine.profile();
  if (!p.supports_sequential_neighbor_activation)
    throw Error(ErrorCode::CapabilityUnsupported, p.name + ": RowClone needs neighbor activation");
  const BankTopology& topo = engine.topology();
  const std::uint64_t R = topo.rows_per_subarray();
  const std::uint64_t G = R * topo.num_subarrays();
  auto addr = [&](std::uint64_t g) {
    return RowAddress{static_cast<std::uint32_t>(g / R), static_cast<std::uint32_t>(g % R)};
  };

  // Probes g -> g+2 and, for even g, g -> g+1 keep the activation sets small
  // (at most six rows), so a same-subarray copy survives restore failures.
  UnionFind uf(G);
  auto probe = [&](std::uint64_t g, std::uint64_t h) {
    if (h >= G) return;
    const double m = (clone_match(engine, addr(g), addr(h), rng) + clone_match(engine, addr(h), addr(g), rng)) / 2.0;
    if (m >= 0.75) uf.unite(g, h);
  };
  for (std::uint64_t g = 0; g < G; ++g) {
    if (g % 2 == 0) probe(g, g + 1);
    probe(g, g + 2);
  }

  std::vector<std::vector<std::uint64_t>> groups;
  std::vector<std::int64_t> index(G, -1);
  for (std::uint64_t g = 0; g < G; ++g) {
    const std::uint64_t root = uf.find(g);
    if (index[root] < 0) {
      index[root] = static_cast<std::int64_t>(groups.size());
      groups.emplace_back();
    }
    groups[index[root]].push_back(g);
  }
  return groups;
}

std::vector<std::uint32_t> infer_row_order(Engine& engine, std::uint32_t subarray, Rng& rng, std::uint32_t episodes) {
  const BankTopology& topo = engine.topology();
  const ChipProfile& p = engine.profile();
  const std::uint32_t R = topo.rows_per_subarray(), C = topo.columns();
  if (subarray >= topo.num_subarrays()) throw Error(ErrorCode::OutOfRange, "subarray out of range");

  std::vector<std::set<std::uint32_t>> adj(R);
  const Bits zeros(C, 0);
  for (std::uint32_t aggressor = 0; aggressor < R; ++aggressor) {
    for (std::uint32_t ep = 0; ep < episodes; ++ep) {
      for (std::uint32_t r = 0; r < R; ++r) engine.poke_row({subarray, r}, zeros);
      for (const BitFlip& f : hammer(topo, p, {subarray, aggressor}, p.rowhammer_threshold, rng))
        engine.set_cell(f.row, f.column, 1.0 - engine.cell(f.row, f.column));
      for (std::uint32_t r = 0; r < R; ++r) {
        if (r == aggressor) continue;
        const Bits now = engine.peek_row({subarray, r});
        if (std::any_of(now.begin(), now.end(), [](std::uint8_t b) { return b != 0; })) {
          adj[aggressor].insert(r);
          adj[r].insert(aggressor);
        }
      }
    }
  }

  std::vector<std::uint32_t> ends;
  for (std::uint32_t r = 0; r < R; ++r) {
    if (adj[r].size() > 2 || adj[r].empty())
      throw Error(ErrorCode::AmbiguousOrder, "row " + std::to_string(r) + " has " + std::to_string(adj[r].size()) +
                                                 " disturbed neighbours");
    if (adj[r].size() == 1) ends.push_back(r);
  }
  if (ends.size() != 2) throw Error(ErrorCode::AmbiguousOrder, "adjacency graph is not a single path");

  std::vector<std::uint32_t> order{ends.front()};
  std::vector<bool> seen(R, false);
  seen[ends.front()] = true;
  while (order.size() < R) {
    std::uint32_t next = R;
    for (std::uint32_t v : adj[order.back()])
      if (!seen[v]) next = v;
    if (next == R) throw Error(ErrorCode::AmbiguousOrder, "adjacency graph is not a single path");
    seen[next] = true;
    order.push_back(next);
  }
  return order;
}

}  // namespace fcdram
