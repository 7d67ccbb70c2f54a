#include "subsea/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "subsea/error.hpp"

namespace subsea {

std::string_view to_string(AttackStrategy s) noexcept {
  switch (s) {
    case AttackStrategy::random: return "random";
    case AttackStrategy::degree: return "degree";
    case AttackStrategy::betweenness: return "betweenness";
    case AttackStrategy::asn_capacity: return "asn_capacity";
  }
  return "random";
}

std::optional<AttackStrategy> parse_attack_strategy(std::string_view s) noexcept {
  if (s == "random") return AttackStrategy::random;
  if (s == "degree") return AttackStrategy::degree;
  if (s == "betweenness") return AttackStrategy::betweenness;
  if (s == "asn_capacity" || s == "asn") return AttackStrategy::asn_capacity;
  return std::nullopt;
}

namespace {

// Tolerance for p * E landing a hair above an integer, e.g. 0.06 * 50.
constexpr double kPrefixSlack = 1e-9;

// Sort submarine edges by descending score; ties by edge id, which is the
// index order.
std::vector<std::size_t> rank_edges(const PhysicalGraph& graph, const std::vector<double>& score) {
  std::vector<std::size_t> order(graph.submarine_edges().begin(), graph.submarine_edges().end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

std::vector<std::size_t> adaptive_order(const PhysicalGraph& graph, const PlanOptions& options) {
  std::vector<char> removed(graph.edge_count(), 0);
  std::vector<std::size_t> order;
  order.reserve(graph.submarine_count());
  for (std::size_t step = 0; step < graph.submarine_count(); ++step) {
    BetweennessOptions bo;
    bo.submarine_only = options.betweenness_submarine_only;
    bo.removed_mask = removed;
    const auto score = edge_betweenness(graph, bo);
    std::size_t best = graph.edge_count();
    for (auto e : graph.submarine_edges()) {
      if (removed[e]) continue;
      if (best == graph.edge_count() || score[e] > score[best]) best = e;
    }
    removed[best] = 1;
    order.push_back(best);
  }
  return order;
}

void fill_uniform_cumulative(RemovalPlan& plan) {
  const auto e = plan.edges.size();
  plan.cumulative.resize(e);
  for (std::size_t k = 0; k < e; ++k) {
    plan.cumulative[k] = static_cast<double>(k + 1) / static_cast<double>(e);
  }
}

}  // namespace

RemovalPlan removal_plan(AttackStrategy strategy, const PhysicalGraph& graph,
                         const CascadeScope& scope, Rng& rng, const PlanOptions& options) {
  RemovalPlan plan;
  plan.strategy = strategy;

  if (targets_cables(strategy)) {
    if (graph.submarine_count() == 0) {
      throw InputError("cable attack needs at least one submarine edge");
    }
    switch (strategy) {
      case AttackStrategy::random: {
        plan.edges.assign(graph.submarine_edges().begin(), graph.submarine_edges().end());
        rng.shuffle(std::span<std::size_t>(plan.edges));
        break;
      }
      case AttackStrategy::degree: {
        const auto deg = submarine_degree(graph);
        std::vector<double> score(graph.edge_count(), 0.0);
        for (auto e : graph.submarine_edges()) {
          score[e] = deg[graph.edges()[e].u] + deg[graph.edges()[e].v];
        }
        plan.edges = rank_edges(graph, score);
        break;
      }
      case AttackStrategy::betweenness: {
        if (options.adaptive_betweenness) {
          plan.edges = adaptive_order(graph, options);
        } else {
          BetweennessOptions bo;
          bo.submarine_only = options.betweenness_submarine_only;
          plan.edges = rank_edges(graph, edge_betweenness(graph, bo));
        }
        break;
      }
      case AttackStrategy::asn_capacity: break;
    }
    fill_uniform_cumulative(plan);
    return plan;
  }

  std::map<Asn, std::int64_t> hosted;
  for (const auto& n : scope.nodes) {
    if (n.asn) ++hosted[*n.asn];
  }
  if (hosted.empty()) throw InputError("ASN attack needs at least one in-scope node with an ASN");
  std::vector<std::pair<Asn, std::int64_t>> ranked(hosted.begin(), hosted.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::int64_t total = 0;
  for (const auto& [_, n] : ranked) total += n;
  std::int64_t running = 0;
  for (const auto& [asn, n] : ranked) {
    running += n;
    plan.asns.push_back(asn);
    plan.asn_nodes.push_back(n);
    plan.cumulative.push_back(static_cast<double>(running) / static_cast<double>(total));
  }
  return plan;
}

RemovalPlan removal_plan(AttackStrategy strategy, const PhysicalGraph& graph,
                         const CascadeScope& scope, std::uint64_t seed,
                         const PlanOptions& options) {
  Rng rng(seed);
  return removal_plan(strategy, graph, scope, rng, options);
}

std::size_t prefix_length(const RemovalPlan& plan, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("attack fraction must lie in [0, 1]");
  const auto n = plan.size();
  if (targets_cables(plan.strategy)) {
    const double scaled = p * static_cast<double>(n);
    const auto k = static_cast<std::size_t>(std::ceil(scaled - kPrefixSlack * static_cast<double>(n)));
    return std::min(k, n);
  }
  if (p <= 0.0) return 0;
  std::size_t k = 0;
  while (k < n && plan.cumulative[k] < p - kPrefixSlack) ++k;
  return std::min(k + 1, n);
}

Removal apply_plan(const RemovalPlan& plan, const PhysicalGraph& graph, double p) {
  const auto k = prefix_length(plan, p);
  Removal out;
  if (targets_cables(plan.strategy)) {
    for (std::size_t i = 0; i < k; ++i) out.edge_ids.push_back(graph.edges()[plan.edges[i]].id);
  } else {
    out.asns.assign(plan.asns.begin(), plan.asns.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

}  // namespace subsea
