#include "qfn/network.hpp"

#include <algorithm>
#include <climits>
#include <queue>
#include <tuple>

namespace qfn {

TopologyKind topology_from_string(const std::string& s) {
  if (s == "star") return TopologyKind::star;
  if (s == "line") return TopologyKind::line;
  if (s == "ring") return TopologyKind::ring;
  if (s == "tree") return TopologyKind::tree;
  if (s == "mesh") return TopologyKind::mesh;
  if (s == "single_hop") return TopologyKind::single_hop;
  throw ConfigError("unknown topology \"" + s + "\"");
}

std::string to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::star: return "star";
    case TopologyKind::line: return "line";
    case TopologyKind::ring: return "ring";
    case TopologyKind::tree: return "tree";
    case TopologyKind::mesh: return "mesh";
    case TopologyKind::single_hop: return "single_hop";
  }
  return "?";
}

std::string to_string(EprClass c) {
  switch (c) {
    case EprClass::boundary_distribution: return "boundary_distribution";
    case EprClass::result_return: return "result_return";
    case EprClass::reflection_ancilla: return "reflection_ancilla";
    case EprClass::control_distribution: return "control_distribution";
  }
  return "?";
}

NetworkModel::NetworkModel(int num_workers, std::vector<std::array<int, 3>> edges)
    : n_workers_(num_workers), edges_(std::move(edges)) {
  const int n = num_nodes();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (const auto& e : edges_) {
    if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n || e[0] == e[1] || e[2] < 1)
      throw ConfigError("invalid network edge");
    adj[e[0]].push_back({e[1], e[2]});
    adj[e[1]].push_back({e[0], e[2]});
  }
  dist_.assign(static_cast<std::size_t>(n) * n, INT_MAX);
  // Dijkstra from every node; ties resolved toward the lower node id by the queue order
  for (int s = 0; s < n; ++s) {
    using Item = std::pair<int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto d = [&](int v) -> int& { return dist_[static_cast<std::size_t>(s) * n + v]; };
    d(s) = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du != d(u)) continue;
      for (auto [v, w] : adj[u])
        if (du + w < d(v)) {
          d(v) = du + w;
          pq.push({d(v), v});
        }
    }
  }
  for (int v : dist_)
    if (v == INT_MAX) throw ConfigError("network is disconnected");
}

NetworkModel NetworkModel::make(TopologyKind kind, int num_workers, int stretch, bool coordinator_at_end) {
  if (num_workers < 0) throw ConfigError("negative worker count");
  if (stretch < 1) throw ConfigError("stretch must be a positive integer");
  const int n = num_workers + 1;
  std::vector<std::array<int, 3>> e;
  switch (kind) {
    case TopologyKind::star:
      for (int v = 1; v < n; ++v) e.push_back({0, v, stretch});
      break;
    case TopologyKind::line: {
      std::vector<int> order;
      if (coordinator_at_end) {
        for (int v = 0; v < n; ++v) order.push_back(v);
      } else {
        // coordinator in the middle of the path
        int mid = num_workers / 2;
        for (int v = 1; v <= mid; ++v) order.push_back(v);
        order.push_back(0);
        for (int v = mid + 1; v < n; ++v) order.push_back(v);
      }
      for (int i = 0; i + 1 < n; ++i) e.push_back({order[i], order[i + 1], stretch});
      break;
    }
    case TopologyKind::ring:
      for (int v = 0; v + 1 < n; ++v) e.push_back({v, v + 1, stretch});
      if (n > 2) e.push_back({n - 1, 0, stretch});
      break;
    case TopologyKind::tree:
      for (int v = 1; v < n; ++v) e.push_back({(v - 1) / 2, v, stretch});
      break;
    case TopologyKind::mesh: {
      int m = 1;
      while (m * m < n) m += 2;
      const int c = m / 2;
      std::vector<std::tuple<int, int, int>> cells;  // (manhattan, row, col)
      for (int r = 0; r < m; ++r)
        for (int col = 0; col < m; ++col)
          if (r != c || col != c) cells.push_back({std::abs(r - c) + std::abs(col - c), r, col});
      std::sort(cells.begin(), cells.end());
      std::vector<int> at(static_cast<std::size_t>(m) * m, -1);
      at[static_cast<std::size_t>(c) * m + c] = 0;
      for (int v = 1; v < n; ++v) {
        auto [md, r, col] = cells[v - 1];
        at[static_cast<std::size_t>(r) * m + col] = v;
      }
      for (int r = 0; r < m; ++r)
        for (int col = 0; col < m; ++col) {
          int a = at[static_cast<std::size_t>(r) * m + col];
          if (a < 0) continue;
          if (col + 1 < m && at[static_cast<std::size_t>(r) * m + col + 1] >= 0)
            e.push_back({a, at[static_cast<std::size_t>(r) * m + col + 1], stretch});
          if (r + 1 < m && at[static_cast<std::size_t>(r + 1) * m + col] >= 0)
            e.push_back({a, at[static_cast<std::size_t>(r + 1) * m + col], stretch});
        }
      break;
    }
    case TopologyKind::single_hop:
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) e.push_back({a, b, 1});
      break;
  }
  NetworkModel net(num_workers, std::move(e));
  net.kind_name = to_string(kind);
  return net;
}

int NetworkModel::diameter() const {
  int d = 0;
  for (int n = 0; n < n_workers_; ++n) d = std::max(d, dist_to_worker(n));
  return d;
}

std::uint64_t ResourceLedger::epr_total() const {
  std::uint64_t s = 0;
  for (auto v : epr) s += v;
  return s;
}

void ResourceLedger::note_qubits(const std::string& processor, int count) {
  int& p = peak_qubits[processor];
  p = std::max(p, count);
}

void ResourceLedger::add_worker_queries(int n, std::uint64_t q) {
  if (static_cast<int>(worker_queries.size()) <= n) worker_queries.resize(n + 1, 0);
  worker_queries[n] += q;
  leaf_queries += q;
}

void charge_teleport(ResourceLedger& ledger, const NetworkModel& net, int from, int to, int n_qubits, EprClass cls) {
  if (from == to) throw ConfigError("teleport endpoints coincide");
  ledger.epr[static_cast<int>(cls)] += static_cast<std::uint64_t>(n_qubits) * static_cast<std::uint64_t>(net.dist(from, to));
}

std::uint64_t per_worker_epr(int n_p, int t, int local_boundary_size) {
  const std::uint64_t np = static_cast<std::uint64_t>(n_p);
  const std::uint64_t a = (pow2(t + 2) - 2);
  const std::uint64_t r = (pow2(t + 1) - 2);
  return np * a * (2 * static_cast<std::uint64_t>(local_boundary_size) + np) + np * r * 2 +
         np * static_cast<std::uint64_t>(t) * 2;
}

EprTerms closed_form_epr_terms(int n_p, int t, const std::vector<int>& vb, const NetworkModel* net) {
  EprTerms out;
  const std::uint64_t np = static_cast<std::uint64_t>(n_p);
  for (std::size_t n = 0; n < vb.size(); ++n) {
    const std::uint64_t d = net ? static_cast<std::uint64_t>(net->dist_to_worker(static_cast<int>(n))) : 1;
    out.boundary_result += d * np * (pow2(t + 2) - 2) * (2 * static_cast<std::uint64_t>(vb[n]) + np);
    out.reflection += d * np * (pow2(t + 1) - 2) * 2;
    out.control += d * np * static_cast<std::uint64_t>(t) * 2;
  }
  return out;
}

}  // namespace qfn
