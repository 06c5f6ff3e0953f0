#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "spacer/instrument/instrument.hpp"

namespace spacer::instrument {

namespace {

using Adj = std::vector<std::vector<uint32_t>>;

// Tarjan over the induced subgraph `nodes`; returns SCCs (each sorted).
std::vector<std::vector<uint32_t>> sccs(const Adj& adj, const std::vector<uint32_t>& nodes) {
  std::vector<int> idx(adj.size(), -1), low(adj.size(), 0);
  std::vector<bool> in(adj.size(), false), on(adj.size(), false);
  for (auto n : nodes) in[n] = true;
  std::vector<uint32_t> stack;
  std::vector<std::vector<uint32_t>> out;
  int counter = 0;
  std::function<void(uint32_t)> visit = [&](uint32_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (auto w : adj[v]) {
      if (!in[w]) continue;
      if (idx[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<uint32_t> comp;
      uint32_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (auto n : nodes)
    if (idx[n] < 0) visit(n);
  return out;
}

struct Builder {
  const Adj& adj;
  uint32_t init, error;
  Wto& w;
  std::vector<Location> stack_heads;

  // Kahn's algorithm over the condensation; ties by smallest member, init first, error last.
  std::vector<std::vector<uint32_t>> order_sccs(std::vector<std::vector<uint32_t>> comps) {
    std::vector<int> comp_of(adj.size(), -1);
    for (size_t i = 0; i < comps.size(); ++i)
      for (auto n : comps[i]) comp_of[n] = static_cast<int>(i);
    std::vector<std::set<size_t>> succ(comps.size());
    std::vector<size_t> indeg(comps.size(), 0);
    for (size_t i = 0; i < comps.size(); ++i)
      for (auto n : comps[i])
        for (auto m : adj[n]) {
          int j = comp_of[m];
          if (j < 0 || static_cast<size_t>(j) == i) continue;
          if (succ[i].insert(j).second) ++indeg[j];
        }
    auto key = [&](size_t i) -> std::pair<int, uint32_t> {
      uint32_t m = comps[i].front();
      if (m == init) return {0, m};
      if (std::find(comps[i].begin(), comps[i].end(), error) != comps[i].end()) return {2, m};
      return {1, m};
    };
    std::set<std::pair<std::pair<int, uint32_t>, size_t>> ready;
    for (size_t i = 0; i < comps.size(); ++i)
      if (indeg[i] == 0) ready.insert({key(i), i});
    std::vector<std::vector<uint32_t>> out;
    while (!ready.empty()) {
      size_t i = ready.begin()->second;
      ready.erase(ready.begin());
      out.push_back(comps[i]);
      for (auto j : succ[i])
        if (--indeg[j] == 0) ready.insert({key(j), j});
    }
    return out;
  }

  void build(const std::vector<uint32_t>& nodes) {
    for (auto& comp : order_sccs(sccs(adj, nodes))) {
      uint32_t head = comp.front();
      bool self = std::find(adj[head].begin(), adj[head].end(), head) != adj[head].end();
      if (comp.size() == 1 && !self) {
        place(head, 0, 0);
        continue;
      }
      stack_heads.push_back(Location{head});
      w.heads.push_back(Location{head});
      place(head, 1, 0);
      std::vector<uint32_t> rest(comp.begin() + 1, comp.end());
      build(rest);
      ++w.close.back();
      stack_heads.pop_back();
    }
  }

  void place(uint32_t n, int open, int close) {
    w.position[n] = w.order.size();
    w.order.push_back(Location{n});
    w.open.push_back(open);
    w.close.push_back(close);
    w.hds[n] = stack_heads;
  }
};

}  // namespace

bool Wto::is_head(Location l) const { return std::find(heads.begin(), heads.end(), l) != heads.end(); }

std::string Wto::render(const Program& p) const {
  std::ostringstream os;
  for (size_t i = 0; i < order.size(); ++i) {
    if (i) os << ' ';
    for (int k = 0; k < open[i]; ++k) os << '(';
    os << p.name(order[i]);
    for (int k = 0; k < close[i]; ++k) os << ')';
  }
  return os.str();
}

Wto compute_wto(const Program& p) {
  size_t n = p.num_locations();
  Adj adj(n);
  for (const auto& [e, f] : p.edges)
    if (!f.is_false()) adj[e.first.index].push_back(e.second.index);
  for (auto& a : adj) std::sort(a.begin(), a.end());
  Wto w;
  w.hds.resize(n);
  w.position.assign(n, 0);
  Builder b{adj, p.init.index, p.error.index, w, {}};
  std::vector<uint32_t> all(n);
  for (uint32_t i = 0; i < n; ++i) all[i] = i;
  b.build(all);
  std::sort(w.heads.begin(), w.heads.end());
  return w;
}

}  // namespace spacer::instrument
