#include "finsler/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>

#include "finsler/error.hpp"
#include "finsler/io.hpp"

namespace finsler {

namespace {

bool edge_less(const Edge& a, const Edge& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.target < b.target);
}

}  // namespace

ProximityGraph::ProximityGraph(std::vector<std::vector<Edge>> out_edges,
                               std::vector<std::pair<Index, Index>> bridges)
    : out_(std::move(out_edges)), bridges_(std::move(bridges)) {
  const Index n = n_nodes();
  std::vector<Index> seen(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    auto& edges = out_[static_cast<std::size_t>(i)];
    for (const Edge& e : edges) {
      require(e.target >= 0 && e.target < n, ErrorCode::InvalidArgument,
              "edge target out of range at node " + std::to_string(i));
      require(e.target != i, ErrorCode::InvalidArgument, "self edge at node " + std::to_string(i));
      require(std::isfinite(e.distance) && e.distance >= 0.0, ErrorCode::InvalidArgument,
              "edge length must be finite and non-negative");
      auto& mark = seen[static_cast<std::size_t>(e.target)];
      require(mark != i, ErrorCode::InvalidArgument,
              "duplicate edge " + std::to_string(i) + " -> " + std::to_string(e.target));
      mark = i;
    }
    std::sort(edges.begin(), edges.end(), edge_less);
  }
  for (const auto& [a, b] : bridges_) {
    require(a >= 0 && a < n && b >= 0 && b < n, ErrorCode::InvalidArgument, "bridge out of range");
  }
}

Index ProximityGraph::max_out_degree() const {
  Index best = 0;
  for (const auto& edges : out_) best = std::max(best, static_cast<Index>(edges.size()));
  return best;
}

std::size_t ProximityGraph::n_edges() const {
  std::size_t total = 0;
  for (const auto& edges : out_) total += edges.size();
  return total;
}

double ProximityGraph::edge_length(Index i, Index j) const {
  for (const Edge& e : out_edges(i)) {
    if (e.target == j) return e.distance;
  }
  return kUnreachable;
}

ProximityGraph knn_exact(const DataMatrix& data, Index k) {
  const Index n = data.n_points();
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(k < n, ErrorCode::InvalidArgument,
          "k = " + std::to_string(k) + " needs more than k points, got " + std::to_string(n));
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(n));
  std::vector<Edge> cand(static_cast<std::size_t>(n - 1));
  const RowMatrix& x = data.values();
  for (Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[c++] = {j, (x.row(i) - x.row(j)).squaredNorm()};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), edge_less);
    auto& row = out[static_cast<std::size_t>(i)];
    row.assign(cand.begin(), cand.begin() + k);
    for (Edge& e : row) e.distance = std::sqrt(e.distance);
  }
  return ProximityGraph(std::move(out));
}

namespace {

struct Slot {
  double distance;
  Index target;
  bool fresh;
};

/// Bounded max-list of neighbours kept sorted ascending.
bool try_insert(std::vector<Slot>& list, Index k, Index target, double distance) {
  if (static_cast<Index>(list.size()) == k) {
    const Slot& worst = list.back();
    if (distance > worst.distance || (distance == worst.distance && target > worst.target)) {
      return false;
    }
  }
  for (const Slot& s : list) {
    if (s.target == target) return false;
  }
  Slot slot{distance, target, true};
  auto pos = std::upper_bound(list.begin(), list.end(), slot, [](const Slot& a, const Slot& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.target < b.target);
  });
  list.insert(pos, slot);
  if (static_cast<Index>(list.size()) > k) list.pop_back();
  return true;
}

}  // namespace

ProximityGraph knn_descent(const DataMatrix& data, Index k, const NnDescentOptions& options) {
  const Index n = data.n_points();
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(k < n, ErrorCode::InvalidArgument, "k must be below the number of points");
  if (n <= k + 1) return knn_exact(data, k);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  const RowMatrix& x = data.values();
  auto dist = [&](Index a, Index b) { return (x.row(a) - x.row(b)).squaredNorm(); };

  std::vector<std::vector<Slot>> heap(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    auto& list = heap[static_cast<std::size_t>(i)];
    while (static_cast<Index>(list.size()) < k) {
      const Index j = pick(rng);
      if (j != i) try_insert(list, k, j, dist(i, j));
    }
  }
  const auto sample_size = std::max<Index>(1, static_cast<Index>(std::ceil(options.sample_rate * k)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    std::vector<std::vector<Index>> fresh(static_cast<std::size_t>(n)), old(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      auto& list = heap[static_cast<std::size_t>(i)];
      std::vector<std::size_t> fresh_slots;
      for (std::size_t s = 0; s < list.size(); ++s) {
        if (list[s].fresh) fresh_slots.push_back(s);
        else old[static_cast<std::size_t>(i)].push_back(list[s].target);
      }
      std::shuffle(fresh_slots.begin(), fresh_slots.end(), rng);
      if (static_cast<Index>(fresh_slots.size()) > sample_size) fresh_slots.resize(static_cast<std::size_t>(sample_size));
      for (std::size_t s : fresh_slots) {
        fresh[static_cast<std::size_t>(i)].push_back(list[s].target);
        list[s].fresh = false;
      }
    }
    // reverse lists, sampled
    std::vector<std::vector<Index>> fresh_rev(static_cast<std::size_t>(n)), old_rev(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      for (Index j : fresh[static_cast<std::size_t>(i)]) fresh_rev[static_cast<std::size_t>(j)].push_back(i);
      for (Index j : old[static_cast<std::size_t>(i)]) old_rev[static_cast<std::size_t>(j)].push_back(i);
    }
    std::size_t updates = 0;
    for (Index i = 0; i < n; ++i) {
      auto& nf = fresh[static_cast<std::size_t>(i)];
      auto& no = old[static_cast<std::size_t>(i)];
      for (Index j : fresh_rev[static_cast<std::size_t>(i)]) {
        if (unit(rng) < options.sample_rate) nf.push_back(j);
      }
      for (Index j : old_rev[static_cast<std::size_t>(i)]) {
        if (unit(rng) < options.sample_rate) no.push_back(j);
      }
      std::sort(nf.begin(), nf.end());
      nf.erase(std::unique(nf.begin(), nf.end()), nf.end());
      std::sort(no.begin(), no.end());
      no.erase(std::unique(no.begin(), no.end()), no.end());
      for (std::size_t a = 0; a < nf.size(); ++a) {
        for (std::size_t b = a + 1; b < nf.size(); ++b) {
          const Index u = nf[a], v = nf[b];
          const double d = dist(u, v);
          updates += try_insert(heap[static_cast<std::size_t>(u)], k, v, d);
          updates += try_insert(heap[static_cast<std::size_t>(v)], k, u, d);
        }
        for (Index v : no) {
          const Index u = nf[a];
          if (u == v) continue;
          const double d = dist(u, v);
          updates += try_insert(heap[static_cast<std::size_t>(u)], k, v, d);
          updates += try_insert(heap[static_cast<std::size_t>(v)], k, u, d);
        }
      }
    }
    if (static_cast<double>(updates) < options.delta * static_cast<double>(n * k)) break;
  }
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (const Slot& s : heap[static_cast<std::size_t>(i)]) {
      out[static_cast<std::size_t>(i)].push_back({s.target, std::sqrt(s.distance)});
    }
  }
  return ProximityGraph(std::move(out));
}

double knn_recall(const ProximityGraph& approx, const ProximityGraph& exact) {
  require(approx.n_nodes() == exact.n_nodes(), ErrorCode::DimensionMismatch, "graph sizes differ");
  std::size_t hit = 0;
  std::size_t total = 0;
  for (Index i = 0; i < exact.n_nodes(); ++i) {
    std::unordered_set<Index> found;
    for (const Edge& e : approx.out_edges(i)) found.insert(e.target);
    for (const Edge& e : exact.out_edges(i)) hit += found.count(e.target);
    total += exact.out_edges(i).size();
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

namespace {

using QueueItem = std::pair<double, Index>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

void dijkstra(const ProximityGraph& graph, Index source, double* dist) {
  const Index n = graph.n_nodes();
  std::fill(dist, dist + n, kUnreachable);
  dist[source] = 0.0;
  MinQueue queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const Edge& e : graph.out_edges(u)) {
      const double nd = d + e.distance;
      if (nd < dist[e.target]) {
        dist[e.target] = nd;
        queue.push({nd, e.target});
      }
    }
  }
}

}  // namespace

RowMatrix geodesic_full(const ProximityGraph& graph) {
  const Index n = graph.n_nodes();
  RowMatrix out(n, n);
  for (Index i = 0; i < n; ++i) dijkstra(graph, i, out.data() + i * n);
  return out;
}

ProximityGraph geodesic_truncated(const ProximityGraph& graph, Index k_plus) {
  require(k_plus >= 1, ErrorCode::InvalidArgument, "k_plus must be positive");
  const Index n = graph.n_nodes();
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n), kUnreachable);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  std::vector<Index> touched;
  for (Index s = 0; s < n; ++s) {
    std::vector<Edge> settled;
    MinQueue queue;
    dist[static_cast<std::size_t>(s)] = 0.0;
    touched.push_back(s);
    queue.push({0.0, s});
    double cutoff = kUnreachable;
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (done[static_cast<std::size_t>(u)] || d > dist[static_cast<std::size_t>(u)]) continue;
      if (d > cutoff) break;
      done[static_cast<std::size_t>(u)] = 1;
      if (u != s) {
        settled.push_back({u, d});
        if (static_cast<Index>(settled.size()) == k_plus) cutoff = d;
      }
      for (const Edge& e : graph.out_edges(u)) {
        const double nd = d + e.distance;
        auto& cur = dist[static_cast<std::size_t>(e.target)];
        if (nd < cur) {
          if (cur == kUnreachable) touched.push_back(e.target);
          cur = nd;
          queue.push({nd, e.target});
        }
      }
    }
    std::sort(settled.begin(), settled.end(), edge_less);
    if (static_cast<Index>(settled.size()) > k_plus) settled.resize(static_cast<std::size_t>(k_plus));
    out[static_cast<std::size_t>(s)] = std::move(settled);
    for (Index t : touched) {
      dist[static_cast<std::size_t>(t)] = kUnreachable;
      done[static_cast<std::size_t>(t)] = 0;
    }
    touched.clear();
  }
  return ProximityGraph(std::move(out));
}

namespace {

struct DisjointSets {
  std::vector<Index> parent;
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

}  // namespace

std::pair<Index, std::vector<Index>> weak_components(const ProximityGraph& graph) {
  const Index n = graph.n_nodes();
  DisjointSets sets(n);
  for (Index i = 0; i < n; ++i) {
    for (const Edge& e : graph.out_edges(i)) sets.unite(i, e.target);
  }
  std::vector<Index> ids(static_cast<std::size_t>(n), -1);
  std::vector<Index> root_id(static_cast<std::size_t>(n), -1);
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    const Index r = sets.find(i);
    auto& rid = root_id[static_cast<std::size_t>(r)];
    if (rid < 0) rid = count++;
    ids[static_cast<std::size_t>(i)] = rid;
  }
  return {count, std::move(ids)};
}

ProximityGraph connect_components(const ProximityGraph& graph, const DataMatrix& data) {
  require(graph.n_nodes() == data.n_points(), ErrorCode::DimensionMismatch,
          "graph and data sizes differ");
  auto [count, ids] = weak_components(graph);
  if (count <= 1) return graph;
  const Index n = graph.n_nodes();
  // closest pair between every two components, then Kruskal over components
  struct Link {
    double distance;
    Index a;
    Index b;
  };
  const auto c = static_cast<std::size_t>(count);
  std::vector<Link> best(c * c, Link{kUnreachable, -1, -1});
  const RowMatrix& x = data.values();
  for (Index i = 0; i < n; ++i) {
    const auto ci = static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]);
    for (Index j = i + 1; j < n; ++j) {
      const auto cj = static_cast<std::size_t>(ids[static_cast<std::size_t>(j)]);
      if (ci == cj) continue;
      const double d = (x.row(i) - x.row(j)).squaredNorm();
      Link& slot = best[std::min(ci, cj) * c + std::max(ci, cj)];
      if (d < slot.distance) slot = {d, i, j};
    }
  }
  std::vector<Link> links;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = a + 1; b < c; ++b) links.push_back(best[a * c + b]);
  }
  std::sort(links.begin(), links.end(), [](const Link& l, const Link& r) {
    return l.distance < r.distance || (l.distance == r.distance && (l.a < r.a || (l.a == r.a && l.b < r.b)));
  });
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = graph.out_edges(i);
  auto bridges = graph.bridges();
  DisjointSets sets(count);
  for (const Link& l : links) {
    const Index ca = ids[static_cast<std::size_t>(l.a)];
    const Index cb = ids[static_cast<std::size_t>(l.b)];
    if (!sets.unite(ca, cb)) continue;
    const double d = std::sqrt(l.distance);
    out[static_cast<std::size_t>(l.a)].push_back({l.b, d});
    out[static_cast<std::size_t>(l.b)].push_back({l.a, d});
    bridges.emplace_back(l.a, l.b);
    bridges.emplace_back(l.b, l.a);
  }
  return ProximityGraph(std::move(out), std::move(bridges));
}

ProximityGraph with_reverse_edges(const ProximityGraph& graph) {
  const Index n = graph.n_nodes();
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = graph.out_edges(i);
  for (Index i = 0; i < n; ++i) {
    for (const Edge& e : graph.out_edges(i)) {
      if (graph.edge_length(e.target, i) == kUnreachable) out[static_cast<std::size_t>(e.target)].push_back({i, e.distance});
    }
  }
  return ProximityGraph(std::move(out), graph.bridges());
}

void write_edge_list(std::ostream& out, const ProximityGraph& graph) {
  out << "#nodes " << graph.n_nodes() << '\n';
  for (Index i = 0; i < graph.n_nodes(); ++i) {
    for (const Edge& e : graph.out_edges(i)) {
      out << i << '\t' << e.target << '\t' << format_double(e.distance) << '\n';
    }
  }
}

ProximityGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Index n = -1;
  std::vector<std::vector<Edge>> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (n < 0) {
      std::istringstream head(line);
      std::string tag;
      head >> tag >> n;
      if (tag != "#nodes" || head.fail() || n < 0) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected '#nodes N'",
             static_cast<double>(line_no));
      }
      out.resize(static_cast<std::size_t>(n));
      continue;
    }
    std::istringstream row(line);
    Index i = 0, j = 0;
    double d = 0.0;
    std::string rest;
    row >> i >> j >> d;
    if (row.fail() || (row >> rest) || i < 0 || i >= n || j < 0 || j >= n) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": malformed edge",
           static_cast<double>(line_no));
    }
    out[static_cast<std::size_t>(i)].push_back({j, d});
  }
  if (n < 0) fail(ErrorCode::ParseError, "missing '#nodes N' header");
  return ProximityGraph(std::move(out));
}

}  // namespace finsler
