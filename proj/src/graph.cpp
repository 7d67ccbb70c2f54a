#include "subsea/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "subsea/error.hpp"

namespace subsea {

std::optional<CountryId> CountryId::try_parse(std::string_view code) noexcept {
  if (code.size() != 2) return std::nullopt;
  for (char ch : code) {
    if (ch < 'A' || ch > 'Z') return std::nullopt;
  }
  CountryId id;
  id.code_ = {code[0], code[1]};
  return id;
}

CountryId CountryId::parse(std::string_view code) {
  if (auto id = try_parse(code)) return *id;
  throw ParseError("invalid country code '" + std::string(code) + "'");
}

std::string PhysicalGraph::submarine_edge_id(const CountryId& a, const CountryId& b) {
  const auto& [lo, hi] = std::minmax(a, b);
  return "sub:" + lo.str() + "-" + hi.str();
}

std::string PhysicalGraph::land_edge_id(const CountryId& a, const CountryId& b) {
  const auto& [lo, hi] = std::minmax(a, b);
  return "land:" + lo.str() + "-" + hi.str();
}

std::optional<std::size_t> PhysicalGraph::country_index(const CountryId& c) const {
  auto it = country_lookup_.find(c);
  if (it == country_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> PhysicalGraph::edge_index(std::string_view id) const {
  auto it = edge_lookup_.find(std::string(id));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> PhysicalGraph::edges_for_cable(std::string_view cable_id) const {
  auto it = cable_lookup_.find(std::string(cable_id));
  if (it == cable_lookup_.end()) return {};
  return it->second;
}

namespace {

std::pair<CountryId, CountryId> parse_pair(const std::string& a, const std::string& b,
                                           const std::string& what) {
  auto ca = CountryId::try_parse(a);
  auto cb = CountryId::try_parse(b);
  if (!ca || !cb) {
    throw ParseError(what + ": invalid country code in pair (" + a + ", " + b + ")");
  }
  if (*ca == *cb) throw ParseError(what + ": self-loop on " + a);
  return std::minmax(*ca, *cb);
}

}  // namespace

PhysicalGraph build_physical_graph(std::span<const CableRecord> cables,
                                   std::span<const BorderRecord> borders) {
  std::map<std::pair<CountryId, CountryId>, std::set<std::string>> submarine;
  std::set<std::pair<CountryId, CountryId>> land;
  std::set<CountryId> countries;

  for (const auto& rec : cables) {
    auto pair = parse_pair(rec.country_a, rec.country_b, "cable '" + rec.cable_id + "'");
    submarine[pair].insert(rec.cable_id);
    countries.insert(pair.first);
    countries.insert(pair.second);
  }
  for (const auto& rec : borders) {
    auto pair = parse_pair(rec.country_a, rec.country_b, "border");
    land.insert(pair);
    countries.insert(pair.first);
    countries.insert(pair.second);
  }
  if (countries.empty()) throw InputError("physical graph has no countries");

  PhysicalGraph g;
  g.countries_.assign(countries.begin(), countries.end());
  for (std::size_t i = 0; i < g.countries_.size(); ++i) g.country_lookup_[g.countries_[i]] = i;

  for (const auto& [pair, ids] : submarine) {
    PhysicalEdge e;
    e.id = PhysicalGraph::submarine_edge_id(pair.first, pair.second);
    e.a = pair.first;
    e.b = pair.second;
    e.kind = EdgeKind::submarine;
    e.cable_ids.assign(ids.begin(), ids.end());
    g.edges_.push_back(std::move(e));
  }
  for (const auto& pair : land) {
    PhysicalEdge e;
    e.id = PhysicalGraph::land_edge_id(pair.first, pair.second);
    e.a = pair.first;
    e.b = pair.second;
    e.kind = EdgeKind::land;
    g.edges_.push_back(std::move(e));
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const PhysicalEdge& x, const PhysicalEdge& y) { return x.id < y.id; });

  g.adjacency_.resize(g.countries_.size());
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    auto& e = g.edges_[i];
    e.u = g.country_lookup_.at(e.a);
    e.v = g.country_lookup_.at(e.b);
    g.adjacency_[e.u].push_back(i);
    g.adjacency_[e.v].push_back(i);
    g.edge_lookup_[e.id] = i;
    if (e.kind == EdgeKind::submarine) {
      g.submarine_.push_back(i);
      for (const auto& cid : e.cable_ids) g.cable_lookup_[cid].push_back(i);
    }
  }
  return g;
}

std::vector<std::vector<std::size_t>> ComponentPartition::members() const {
  std::vector<std::vector<std::size_t>> out(count);
  for (std::size_t c = 0; c < component_of.size(); ++c) out[component_of[c]].push_back(c);
  return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

void components_into(const PhysicalGraph& graph, std::span<const char> removed_mask,
                     ComponentPartition& out) {
  const std::size_t n = graph.country_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});

  const auto edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.removable() && i < removed_mask.size() && removed_mask[i]) continue;
    auto ru = find_root(parent, e.u);
    auto rv = find_root(parent, e.v);
    if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
  }

  // Roots are always the smallest index in their set, and indices follow
  // CountryId order, so labelling in index order numbers components by
  // their smallest member.
  out.component_of.assign(n, 0);
  std::vector<std::size_t> label(n, n);
  out.count = 0;
  for (std::size_t c = 0; c < n; ++c) {
    auto r = find_root(parent, c);
    if (label[r] == n) label[r] = out.count++;
    out.component_of[c] = label[r];
  }
}

ComponentPartition components(const PhysicalGraph& graph, std::span<const std::string> removed) {
  std::vector<char> mask(graph.edge_count(), 0);
  for (const auto& id : removed) {
    auto idx = graph.edge_index(id);
    if (!idx) throw InputError("unknown edge id '" + id + "'");
    if (!graph.edges()[*idx].removable()) {
      throw InputError("land edge '" + id + "' cannot be removed");
    }
    mask[*idx] = 1;
  }
  ComponentPartition out;
  components_into(graph, mask, out);
  return out;
}

std::size_t main_component(const ComponentPartition& partition,
                           std::span<const std::int64_t> hosting) {
  std::vector<std::int64_t> nodes(partition.count, 0);
  std::vector<std::size_t> sizes(partition.count, 0);
  for (std::size_t c = 0; c < partition.component_of.size(); ++c) {
    const auto comp = partition.component_of[c];
    ++sizes[comp];
    if (c < hosting.size()) nodes[comp] += hosting[c];
  }
  // Component k's smallest member precedes component k+1's, so the lowest
  // component id wins the final tie-break.
  std::size_t best = 0;
  for (std::size_t k = 1; k < partition.count; ++k) {
    if (std::tie(nodes[k], sizes[k]) > std::tie(nodes[best], sizes[best])) best = k;
  }
  return best;
}

std::size_t main_component(const PhysicalGraph& graph, const ComponentPartition& partition,
                           const std::map<CountryId, std::int64_t>& hosting) {
  std::vector<std::int64_t> dense(graph.country_count(), 0);
  for (const auto& [country, count] : hosting) {
    if (auto idx = graph.country_index(country)) dense[*idx] = count;
  }
  return main_component(partition, dense);
}

std::vector<double> edge_betweenness(const PhysicalGraph& graph,
                                     const BetweennessOptions& options) {
  const std::size_t n = graph.country_count();
  const auto edges = graph.edges();
  std::vector<double> score(edges.size(), 0.0);
  if (n < 2) return score;

  auto usable = [&](std::size_t e) {
    if (options.submarine_only && !edges[e].removable()) return false;
    if (edges[e].removable() && e < options.removed_mask.size() && options.removed_mask[e]) {
      return false;
    }
    return true;
  };

  std::vector<long> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::vector<std::size_t>> pred_edges(n);

  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : pred_edges) p.clear();
    order.clear();

    dist[s] = 0;
    sigma[s] = 1.0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const auto v = order[head];
      for (auto e : graph.incident(v)) {
        if (!usable(e)) continue;
        const auto w = edges[e].u == v ? edges[e].v : edges[e].u;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred_edges[w].push_back(e);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto e : pred_edges[w]) {
        const auto v = edges[e].u == w ? edges[e].v : edges[e].u;
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        score[e] += c;
        delta[v] += c;
      }
    }
  }

  const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
  for (auto& x : score) x /= norm;
  return score;
}

std::map<std::string, double> edge_betweenness_by_id(const PhysicalGraph& graph,
                                                     const BetweennessOptions& options) {
  auto scores = edge_betweenness(graph, options);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[graph.edges()[i].id] = scores[i];
  return out;
}

std::vector<int> submarine_degree(const PhysicalGraph& graph) {
  std::vector<int> deg(graph.country_count(), 0);
  for (auto e : graph.submarine_edges()) {
    ++deg[graph.edges()[e].u];
    ++deg[graph.edges()[e].v];
  }
  return deg;
}

}  // namespace subsea
