#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "qudit/control_map.hpp"

namespace qudit {

/// Undirected set of allowed transitions between levels 0..d-1 (stored as
/// (low, high) pairs). Level labels are 0-based here; exported files use
/// 1-based labels.
struct EdgeSet {
  int dimension = 0;
  std::set<std::pair<int, int>> edges;
  double threshold = 0.0;  // MHz/mT used to build the set

  /// Inserts (a, b) in canonical order. Throws ValidationError for a
  /// self-edge or an index outside [0, dimension).
  void add(int a, int b);
  bool contains(int a, int b) const;
};

struct ReachabilityResult {
  /// reachable[a][b] is true iff a and b lie in the same component.
  std::vector<std::vector<bool>> reachable;
  /// Components as sorted level lists, ordered by their smallest level.
  std::vector<std::vector<int>> components;
  bool universal = false;
};

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);
  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Edge (n, m) is present iff rate(n, m) > threshold. Throws DomainError for a
/// negative (or NaN) threshold.
EdgeSet allowed_edges(const RabiMap& map, double threshold);

/// Keeps only the edges of `edges` that can be driven selectively: no other
/// edge in the set has a transition frequency within `resolution_mhz`. A
/// zero resolution keeps every edge.
EdgeSet addressable_edges(const RabiMap& map, const EdgeSet& edges, double resolution_mhz);

/// Closure of the edge set under "(n,m) and (n,m') generate (m,m')", which is
/// connectivity. Universal iff a single component covers all levels.
ReachabilityResult graph_closure(const EdgeSet& edges);

/// Default bound on the level count accepted by lie_algebra_rank.
inline constexpr int kLieRankMaxDimension = 16;

/// Dimension of the real Lie algebra generated by the drive generators of
/// each edge, i(|n><m| + |m><n|) and (|n><m| - |m><n|). Throws DomainError
/// when dimension > kLieRankMaxDimension unless `allow_large_dimension`.
int lie_algebra_rank(const EdgeSet& edges, bool allow_large_dimension = false);

}  // namespace qudit
