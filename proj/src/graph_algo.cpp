#include "glp/graph_algo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "glp/util.hpp"

namespace glp {

SimpleGraph::SimpleGraph(int nodes, const std::vector<std::pair<int, int>>& edges) : n(nodes) {
  adj.resize(static_cast<size_t>(n));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) fail_internal("SimpleGraph: edge endpoint out of range");
    if (a == b) continue;
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

int SimpleGraph::num_edges() const {
  int deg = 0;
  for (const auto& nb : adj) deg += static_cast<int>(nb.size());
  return deg / 2;
}

namespace {

struct Bfs {
  std::vector<int> dist;
  std::vector<std::vector<int>> preds;
  std::vector<double> sigma;      // shortest path counts
  std::vector<int> order;         // visit order (nondecreasing distance)
};

Bfs bfs_paths(const SimpleGraph& g, int s) {
  Bfs r;
  r.dist.assign(static_cast<size_t>(g.n), -1);
  r.preds.assign(static_cast<size_t>(g.n), {});
  r.sigma.assign(static_cast<size_t>(g.n), 0.0);
  r.dist[static_cast<size_t>(s)] = 0;
  r.sigma[static_cast<size_t>(s)] = 1.0;
  std::queue<int> q;
  q.push(s);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    r.order.push_back(v);
    for (int w : g.adj[static_cast<size_t>(v)]) {
      if (r.dist[static_cast<size_t>(w)] < 0) {
        r.dist[static_cast<size_t>(w)] = r.dist[static_cast<size_t>(v)] + 1;
        q.push(w);
      }
      if (r.dist[static_cast<size_t>(w)] == r.dist[static_cast<size_t>(v)] + 1) {
        r.sigma[static_cast<size_t>(w)] += r.sigma[static_cast<size_t>(v)];
        r.preds[static_cast<size_t>(w)].push_back(v);
      }
    }
  }
  return r;
}

}  // namespace

std::vector<CentralityVector> centralities(const SimpleGraph& g) {
  int n = g.n;
  std::vector<CentralityVector> out(static_cast<size_t>(n));
  if (n == 0) return out;
  double pair_norm = n > 2 ? 1.0 / (static_cast<double>(n - 1) * (n - 2)) : 0.0;

  std::vector<double> betw(static_cast<size_t>(n), 0.0);
  std::vector<double> load(static_cast<size_t>(n), 0.0);

  for (int s = 0; s < n; ++s) {
    Bfs r = bfs_paths(g, s);

    int reach = static_cast<int>(r.order.size());  // component size
    double dist_sum = 0, harm = 0;
    for (int v : r.order) {
      if (v == s) continue;
      dist_sum += r.dist[static_cast<size_t>(v)];
      harm += 1.0 / r.dist[static_cast<size_t>(v)];
    }
    auto& c = out[static_cast<size_t>(s)];
    c.degree = n > 1 ? static_cast<double>(g.adj[static_cast<size_t>(s)].size()) / (n - 1) : 0.0;
    c.harmonic = n > 1 ? harm / (n - 1) : 0.0;
    c.closeness = (reach > 1 && dist_sum > 0)
                      ? ((reach - 1) / dist_sum) * (static_cast<double>(reach - 1) / (n - 1))
                      : 0.0;

    // Brandes dependency accumulation
    std::vector<double> delta(static_cast<size_t>(n), 0.0);
    for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
      int w = *it;
      for (int v : r.preds[static_cast<size_t>(w)])
        delta[static_cast<size_t>(v)] += r.sigma[static_cast<size_t>(v)] /
                                         r.sigma[static_cast<size_t>(w)] *
                                         (1.0 + delta[static_cast<size_t>(w)]);
      if (w != s) betw[static_cast<size_t>(w)] += delta[static_cast<size_t>(w)];
    }

    // Newman flow splitting: one unit to every node, split equally over
    // predecessors on the way back; through-flow excludes the terminal unit.
    std::vector<double> amount(static_cast<size_t>(n), 0.0);
    for (int v : r.order) amount[static_cast<size_t>(v)] = 1.0;
    for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
      int w = *it;
      const auto& preds = r.preds[static_cast<size_t>(w)];
      if (preds.empty()) continue;
      double share = amount[static_cast<size_t>(w)] / static_cast<double>(preds.size());
      for (int v : preds) {
        if (v == s) continue;
        amount[static_cast<size_t>(v)] += share;
      }
    }
    for (int v : r.order)
      if (v != s) load[static_cast<size_t>(v)] += amount[static_cast<size_t>(v)] - 1.0;
  }

  for (int v = 0; v < n; ++v) {
    out[static_cast<size_t>(v)].betweenness = betw[static_cast<size_t>(v)] * pair_norm;
    out[static_cast<size_t>(v)].load = load[static_cast<size_t>(v)] * pair_norm;
  }
  return out;
}

std::vector<int> greedy_modularity_communities(const SimpleGraph& g) {
  int n = g.n;
  std::vector<int> comm(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) comm[static_cast<size_t>(v)] = v;
  int m = g.num_edges();
  if (m == 0) return comm;  // no positive-gain merge exists
  double inv_m = 1.0 / m;
  double inv_2m = 1.0 / (2.0 * m);

  // community state: between-community edge counts and degree sums
  std::map<std::pair<int, int>, double> between;  // (a<b) -> edge count
  std::vector<double> deg_sum(static_cast<size_t>(n), 0.0);
  std::vector<bool> alive(static_cast<size_t>(n), true);
  for (int v = 0; v < n; ++v) {
    deg_sum[static_cast<size_t>(v)] = static_cast<double>(g.adj[static_cast<size_t>(v)].size());
    for (int w : g.adj[static_cast<size_t>(v)])
      if (v < w) between[{v, w}] += 1.0;
  }

  while (true) {
    // best positive gain; std::map order makes the smallest pair win ties
    double best_gain = 1e-12;
    std::pair<int, int> best{-1, -1};
    for (const auto& [key, edges] : between) {
      double gain = edges * inv_m - 2.0 * (deg_sum[static_cast<size_t>(key.first)] * inv_2m) *
                                        (deg_sum[static_cast<size_t>(key.second)] * inv_2m);
      if (gain > best_gain) {
        best_gain = gain;
        best = key;
      }
    }
    if (best.first < 0) break;
    int a = best.first, b = best.second;  // merge b into a (a < b)
    for (int v = 0; v < n; ++v)
      if (comm[static_cast<size_t>(v)] == b) comm[static_cast<size_t>(v)] = a;
    deg_sum[static_cast<size_t>(a)] += deg_sum[static_cast<size_t>(b)];
    alive[static_cast<size_t>(b)] = false;
    std::map<std::pair<int, int>, double> next;
    for (const auto& [key, edges] : between) {
      int x = key.first == b ? a : key.first;
      int y = key.second == b ? a : key.second;
      if (x == y) continue;  // internal now
      auto k = std::minmax(x, y);
      next[{k.first, k.second}] += edges;
    }
    between = std::move(next);
  }

  // compact ids: keep representative ids, callers only need a partition
  (void)alive;
  return comm;
}

std::vector<int> label_propagation_communities(const SimpleGraph& g, uint64_t seed, int max_sweeps,
                                               int* sweeps_used) {
  int n = g.n;
  std::vector<int> label(static_cast<size_t>(n));
  // seed permutes the initial label ids; everything else is deterministic
  std::vector<int> init(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) init[static_cast<size_t>(v)] = v;
  Rng rng = make_rng(mix_seed(seed, "lpa-init"));
  shuffle(init, rng);
  for (int v = 0; v < n; ++v) label[static_cast<size_t>(v)] = init[static_cast<size_t>(v)];

  // greedy coloring by node id gives the update schedule
  std::vector<int> color(static_cast<size_t>(n), -1);
  int ncolors = 0;
  for (int v = 0; v < n; ++v) {
    std::vector<bool> used(static_cast<size_t>(ncolors + 1), false);
    for (int w : g.adj[static_cast<size_t>(v)])
      if (color[static_cast<size_t>(w)] >= 0 && color[static_cast<size_t>(w)] <= ncolors)
        used[static_cast<size_t>(color[static_cast<size_t>(w)])] = true;
    int c = 0;
    while (c < static_cast<int>(used.size()) && used[static_cast<size_t>(c)]) ++c;
    color[static_cast<size_t>(v)] = c;
    ncolors = std::max(ncolors, c + 1);
  }

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int c = 0; c < ncolors; ++c) {
      for (int v = 0; v < n; ++v) {
        if (color[static_cast<size_t>(v)] != c) continue;
        const auto& nb = g.adj[static_cast<size_t>(v)];
        if (nb.empty()) continue;
        std::map<int, int> freq;
        for (int w : nb) freq[label[static_cast<size_t>(w)]]++;
        int best_label = label[static_cast<size_t>(v)], best_count = -1;
        for (const auto& [l, cnt] : freq) {
          if (cnt > best_count) {  // map iterates ascending: ties keep smallest label
            best_count = cnt;
            best_label = l;
          }
        }
        if (best_label != label[static_cast<size_t>(v)]) {
          label[static_cast<size_t>(v)] = best_label;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  if (sweeps_used) *sweeps_used = sweep < max_sweeps ? sweep + 1 : max_sweeps;
  return label;
}

double modularity(const SimpleGraph& g, const std::vector<int>& communities) {
  int m = g.num_edges();
  if (m == 0) return 0.0;
  std::map<int, double> intra, deg;
  for (int v = 0; v < g.n; ++v) {
    deg[communities[static_cast<size_t>(v)]] +=
        static_cast<double>(g.adj[static_cast<size_t>(v)].size());
    for (int w : g.adj[static_cast<size_t>(v)])
      if (v < w && communities[static_cast<size_t>(v)] == communities[static_cast<size_t>(w)])
        intra[communities[static_cast<size_t>(v)]] += 1.0;
  }
  double q = 0;
  for (const auto& [c, d] : deg) {
    double l = intra.count(c) ? intra[c] : 0.0;
    q += l / m - (d / (2.0 * m)) * (d / (2.0 * m));
  }
  return q;
}

std::vector<int> community_ordinals(const std::vector<int>& communities, int c_max) {
  std::map<int, std::pair<int, int>> stats;  // id -> (size, min node)
  for (size_t v = 0; v < communities.size(); ++v) {
    auto it = stats.find(communities[v]);
    if (it == stats.end())
      stats[communities[v]] = {1, static_cast<int>(v)};
    else
      it->second.first++;
  }
  std::vector<std::pair<int, int>> order;  // (id) sorted by (size desc, min node asc)
  std::vector<int> ids;
  for (const auto& [id, s] : stats) {
    (void)s;
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end(), [&](int x, int y) {
    const auto& sx = stats[x];
    const auto& sy = stats[y];
    if (sx.first != sy.first) return sx.first > sy.first;
    return sx.second < sy.second;
  });
  std::map<int, int> rank;
  for (size_t r = 0; r < ids.size(); ++r)
    rank[ids[r]] = std::min(static_cast<int>(r), c_max - 1);
  std::vector<int> out(communities.size());
  for (size_t v = 0; v < communities.size(); ++v) out[v] = rank[communities[v]];
  return out;
}

}  // namespace glp
