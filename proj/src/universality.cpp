#include "qudit/universality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "qudit/error.hpp"

namespace qudit {

void EdgeSet::add(int a, int b) {
  if (a == b) throw ValidationError("self-edge on level " + std::to_string(a));
  if (a < 0 || b < 0 || a >= dimension || b >= dimension) {
    throw ValidationError("edge index outside [0, " + std::to_string(dimension) + ")");
  }
  edges.emplace(std::min(a, b), std::max(a, b));
}

bool EdgeSet::contains(int a, int b) const {
  return edges.count({std::min(a, b), std::max(a, b)}) > 0;
}

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

EdgeSet allowed_edges(const RabiMap& map, double threshold) {
  if (!(threshold >= 0.0)) {
    throw DomainError("edge threshold must be non-negative");
  }
  EdgeSet out;
  out.dimension = static_cast<int>(map.dimension());
  out.threshold = threshold;
  for (int n = 0; n < out.dimension; ++n) {
    for (int m = n + 1; m < out.dimension; ++m) {
      if (map.rate(n, m) > threshold) out.edges.emplace(n, m);
    }
  }
  return out;
}

EdgeSet addressable_edges(const RabiMap& map, const EdgeSet& edges, double resolution_mhz) {
  if (!(resolution_mhz >= 0.0)) {
    throw DomainError("addressing resolution must be non-negative");
  }
  EdgeSet out = edges;
  if (resolution_mhz == 0.0 || edges.edges.size() < 2) return out;

  struct Line {
    double freq_mhz;
    std::pair<int, int> edge;
  };
  std::vector<Line> lines;
  lines.reserve(edges.edges.size());
  for (const auto& e : edges.edges) {
    lines.push_back({1e3 * map.freq(e.first, e.second), e});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.freq_mhz < b.freq_mhz || (a.freq_mhz == b.freq_mhz && a.edge < b.edge);
  });
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool crowded_left = i > 0 && lines[i].freq_mhz - lines[i - 1].freq_mhz <= resolution_mhz;
    const bool crowded_right =
        i + 1 < lines.size() && lines[i + 1].freq_mhz - lines[i].freq_mhz <= resolution_mhz;
    if (crowded_left || crowded_right) out.edges.erase(lines[i].edge);
  }
  return out;
}

ReachabilityResult graph_closure(const EdgeSet& edges) {
  const auto d = static_cast<std::size_t>(edges.dimension);
  UnionFind sets(d);
  for (const auto& [a, b] : edges.edges) {
    sets.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }

  ReachabilityResult result;
  std::vector<int> component_of_root(d, -1);
  std::vector<int> component(d);
  for (std::size_t level = 0; level < d; ++level) {
    const std::size_t root = sets.find(level);
    if (component_of_root[root] < 0) {
      component_of_root[root] = static_cast<int>(result.components.size());
      result.components.emplace_back();
    }
    component[level] = component_of_root[root];
    result.components[static_cast<std::size_t>(component[level])].push_back(static_cast<int>(level));
  }

  result.reachable.assign(d, std::vector<bool>(d, false));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      result.reachable[a][b] = component[a] == component[b];
    }
  }
  result.universal = d > 0 && result.components.size() == 1;
  return result;
}

namespace {

// Anti-Hermitian d x d matrices as real vectors: [Re(A) row-major, Im(A) row-major].
class AlgebraBasis {
 public:
  explicit AlgebraBasis(int d) : d_(d) {}

  Eigen::VectorXd flatten(const ComplexMatrix& a) const {
    Eigen::VectorXd v(2 * d_ * d_);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < d_; ++j) {
        v(i * d_ + j) = a(i, j).real();
        v(d_ * d_ + i * d_ + j) = a(i, j).imag();
      }
    }
    return v;
  }

  ComplexMatrix unflatten(const Eigen::VectorXd& v) const {
    ComplexMatrix a(d_, d_);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < d_; ++j) {
        a(i, j) = {v(i * d_ + j), v(d_ * d_ + i * d_ + j)};
      }
    }
    return a;
  }

  // Orthogonalises against the current basis (two passes of modified
  // Gram-Schmidt) and appends if a new direction remains.
  bool try_add(Eigen::VectorXd v) {
    const double original = v.norm();
    if (original < kTiny) return false;
    v /= original;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis_) v -= b.dot(v) * b;
    }
    const double residual = v.norm();
    if (residual < kIndependence) return false;
    basis_.push_back(v / residual);
    return true;
  }

  std::size_t size() const { return basis_.size(); }
  const Eigen::VectorXd& operator[](std::size_t i) const { return basis_[i]; }

 private:
  static constexpr double kTiny = 1e-300;
  static constexpr double kIndependence = 1e-8;
  int d_;
  std::vector<Eigen::VectorXd> basis_;
};

}  // namespace

int lie_algebra_rank(const EdgeSet& edges, bool allow_large_dimension) {
  const int d = edges.dimension;
  if (d > kLieRankMaxDimension && !allow_large_dimension) {
    throw DomainError("lie_algebra_rank limited to dimension " +
                      std::to_string(kLieRankMaxDimension) + " (got " + std::to_string(d) +
                      "); pass allow_large_dimension=true (CLI: --allow-large-rank) to override");
  }
  if (d <= 0) return 0;

  AlgebraBasis basis(d);
  std::vector<ComplexMatrix> generators;
  const std::complex<double> i1(0.0, 1.0);
  for (const auto& [n, m] : edges.edges) {
    ComplexMatrix x = ComplexMatrix::Zero(d, d);
    x(n, m) = i1;
    x(m, n) = i1;
    ComplexMatrix y = ComplexMatrix::Zero(d, d);
    y(n, m) = 1.0;
    y(m, n) = -1.0;
    for (auto* g : {&x, &y}) {
      if (basis.try_add(basis.flatten(*g))) generators.push_back(*g);
    }
  }

  // Right-nested commutators with the generators span the generated algebra.
  std::deque<std::size_t> pending(basis.size());
  std::iota(pending.begin(), pending.end(), std::size_t{0});
  while (!pending.empty()) {
    const ComplexMatrix a = basis.unflatten(basis[pending.front()]);
    pending.pop_front();
    for (const auto& g : generators) {
      const ComplexMatrix c = g * a - a * g;
      if (basis.try_add(basis.flatten(c))) pending.push_back(basis.size() - 1);
    }
  }
  return static_cast<int>(basis.size());
}

}  // namespace qudit
