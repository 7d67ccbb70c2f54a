#include "subsea/tor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subsea/error.hpp"

namespace subsea {

std::string_view to_string(TorScenarioKind k) noexcept {
  switch (k) {
    case TorScenarioKind::clearnet_only: return "clearnet_only";
    case TorScenarioKind::proportional: return "proportional";
    case TorScenarioKind::uniform: return "uniform";
    case TorScenarioKind::clustered: return "clustered";
    case TorScenarioKind::worst_case: return "worst_case";
  }
  return "clearnet_only";
}

std::optional<TorScenarioKind> parse_tor_scenario(std::string_view s) noexcept {
  for (auto k : kAllTorScenarios) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<std::pair<CountryId, double>> TorScenario::default_clustered_weights() {
  return {{CountryId::parse("DE"), 0.30},
          {CountryId::parse("US"), 0.15},
          {CountryId::parse("FR"), 0.10},
          {CountryId::parse("NL"), 0.08}};
}

TorPlacer::TorPlacer(TorScenario scenario, const NodeSnapshot& snapshot, const PhysicalGraph& graph)
    : scenario_(std::move(scenario)) {
  const auto clear = cascade_scope(snapshot, ScopeMode::clearnet_only);
  for (const auto& n : clear.nodes) asns_by_country_[*n.country].push_back(*n.asn);
  for (auto& [_, asns] : asns_by_country_) {
    std::sort(asns.begin(), asns.end());
    asns.erase(std::unique(asns.begin(), asns.end()), asns.end());
  }
  for (const auto& n : snapshot.nodes) {
    if (n.network == Network::tor) tor_nodes_.push_back(n.node_id);
  }
  std::sort(tor_nodes_.begin(), tor_nodes_.end());

  switch (scenario_.kind) {
    case TorScenarioKind::clearnet_only: break;
    case TorScenarioKind::proportional:
      for (const auto& [c, count] : clear.hosting) weights_.emplace_back(c, static_cast<double>(count));
      break;
    case TorScenarioKind::uniform:
      for (const auto& [c, _] : clear.hosting) weights_.emplace_back(c, 1.0);
      break;
    case TorScenarioKind::clustered: {
      double listed = 0.0;
      std::set<CountryId> named;
      for (const auto& [c, w] : scenario_.clustered_weights) {
        if (!graph.country_index(c)) {
          throw InputError("clustered scenario names unknown country " + c.str());
        }
        if (!(w >= 0.0)) throw InputError("clustered weight for " + c.str() + " is negative");
        if (!named.insert(c).second) throw InputError("clustered scenario repeats " + c.str());
        listed += w;
        weights_.emplace_back(c, w);
      }
      if (listed > 1.0 + 1e-12) throw InputError("clustered weights sum above 1");
      std::vector<CountryId> rest;
      for (const auto& [c, _] : clear.hosting) {
        if (!named.contains(c)) rest.push_back(c);
      }
      const double remainder = std::max(0.0, 1.0 - listed);
      if (!rest.empty() && remainder > 0.0) {
        const double each = remainder / static_cast<double>(rest.size());
        for (const auto& c : rest) weights_.emplace_back(c, each);
      }
      std::sort(weights_.begin(), weights_.end());
      break;
    }
    case TorScenarioKind::worst_case: {
      const auto deg = submarine_degree(graph);
      std::size_t best = graph.country_count();
      for (std::size_t c = 0; c < deg.size(); ++c) {
        if (deg[c] >= 1 && (best == graph.country_count() || deg[c] < deg[best])) best = c;
      }
      if (best == graph.country_count()) {
        throw InputError("worst-case scenario needs a country with a submarine cable");
      }
      weights_.emplace_back(graph.countries()[best], 1.0);
      break;
    }
  }

  double running = 0.0;
  for (const auto& [_, w] : weights_) {
    running += w;
    cumulative_.push_back(running);
  }
  if (scenario_.kind != TorScenarioKind::clearnet_only && !tor_nodes_.empty() &&
      !(running > 0.0)) {
    throw InputError(std::string("tor scenario '") + std::string(to_string(scenario_.kind)) +
                     "' has no countries to place tor nodes in");
  }
}

std::span<const Asn> TorPlacer::country_asns(const CountryId& c) const {
  auto it = asns_by_country_.find(c);
  if (it == asns_by_country_.end()) return {};
  return it->second;
}

std::vector<Asn> TorPlacer::placement_asns() const {
  std::vector<Asn> out;
  for (const auto& [_, asns] : asns_by_country_) out.insert(out.end(), asns.begin(), asns.end());
  for (const auto& [c, _] : weights_) {
    if (country_asns(c).empty()) out.push_back(synthetic_asn(c));
  }
  return out;
}

TorPlacement TorPlacer::place(const CountryId& c, std::uint64_t pick) const {
  const auto asns = country_asns(c);
  if (asns.empty()) return {c, synthetic_asn(c), true};
  return {c, asns[pick % asns.size()], false};
}

ScenarioAssignment TorPlacer::assign(Rng& rng) const {
  ScenarioAssignment out;
  out.kind = scenario_.kind;
  if (scenario_.kind == TorScenarioKind::clearnet_only || tor_nodes_.empty()) return out;

  auto record = [&](const std::string& node, TorPlacement placed) {
    if (placed.synthetic_asn) ++out.synthetic_asn_count;
    out.placements.emplace(node, placed);
  };

  if (scenario_.apportion) {
    // Largest remainder; leftover seats go to the biggest fractional parts,
    // ties to the earlier country.
    const double total = cumulative_.back();
    const auto n = tor_nodes_.size();
    std::vector<std::size_t> seats(weights_.size());
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t given = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double quota = static_cast<double>(n) * weights_[i].second / total;
      seats[i] = static_cast<std::size_t>(std::floor(quota));
      given += seats[i];
      frac.emplace_back(quota - std::floor(quota), i);
    }
    std::stable_sort(frac.begin(), frac.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; given < n; ++k, ++given) ++seats[frac[k % frac.size()].second];

    std::size_t node = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      for (std::size_t s = 0; s < seats[i]; ++s, ++node) {
        record(tor_nodes_[node], place(weights_[i].first, s));
      }
    }
    return out;
  }

  const double total = cumulative_.back();
  for (const auto& node : tor_nodes_) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    const auto& country = weights_[static_cast<std::size_t>(it - cumulative_.begin())].first;
    const auto asns = country_asns(country);
    const std::uint64_t pick = asns.empty() ? 0 : rng.below(asns.size());
    record(node, place(country, pick));
  }
  return out;
}

ScenarioAssignment assign_tor_scenario(const TorScenario& scenario, const NodeSnapshot& snapshot,
                                       const PhysicalGraph& graph, Rng& rng) {
  return TorPlacer(scenario, snapshot, graph).assign(rng);
}

ScenarioAssignment assign_tor_scenario(const TorScenario& scenario, const NodeSnapshot& snapshot,
                                       const PhysicalGraph& graph, std::uint64_t seed) {
  Rng rng(seed);
  return assign_tor_scenario(scenario, snapshot, graph, rng);
}

ScenarioScope::ScenarioScope(TorScenario scenario, const NodeSnapshot& snapshot,
                             const PhysicalGraph& graph, ScopeMode mode)
    : snapshot_(&snapshot), placer_(std::move(scenario), snapshot, graph), mode_(mode) {}

std::vector<Asn> ScenarioScope::asn_universe() const { return placer_.placement_asns(); }

bool ScenarioScope::stochastic() const {
  return placer_.scenario().kind != TorScenarioKind::clearnet_only && !placer_.scenario().apportion &&
         !placer_.tor_nodes().empty();
}

CascadeScope ScenarioScope::sample(Rng& rng) const {
  const auto assignment = placer_.assign(rng);
  const auto mode = placer_.scenario().kind == TorScenarioKind::clearnet_only &&
                            mode_ == ScopeMode::full
                        ? ScopeMode::clearnet_only
                        : mode_;
  return cascade_scope(*snapshot_, mode, &assignment.placements);
}

std::vector<ScenarioBound> tor_bounds_report(const NodeSnapshot& snapshot,
                                             const PhysicalGraph& graph,
                                             const AsnGraph& asn_graph, const CurveConfig& config,
                                             std::span<const TorScenarioKind> scenarios,
                                             const TorScenario& base) {
  std::vector<ScenarioBound> out;
  for (auto kind : scenarios) {
    TorScenario scenario = base;
    scenario.kind = kind;
    const ScenarioScope scopes(scenario, snapshot, graph, ScopeMode::full);
    auto cfg = config;
    cfg.cascade.scope_mode = kind == TorScenarioKind::clearnet_only ? ScopeMode::clearnet_only
                                                                     : ScopeMode::full;
    const auto curve = percolation_curve(cfg, graph, asn_graph, scopes);
    out.push_back({kind, estimate_pc(curve, cfg.disconnection_threshold, cfg.pc_statistic)});
  }
  return out;
}

double relay_survival(const RelayTable& relays, const std::set<CountryId>& disconnected_countries,
                      const std::set<Asn>& failed_asns) {
  if (!(relays.total_cw() > 0.0)) throw InputError("relay table has zero total consensus weight");
  double up = 0.0;
  for (const auto& r : relays.relays()) {
    if (disconnected_countries.contains(r.country) || failed_asns.contains(r.asn)) continue;
    up += r.consensus_weight;
  }
  return up / relays.total_cw();
}

namespace {

PcEstimate four_layer_pc(const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                         const AsnGraph& asn_graph, const RelayTable& relays, CurveConfig config,
                         double cw_threshold) {
  config.cascade.layers = LayerModel::four_layer;
  config.cascade.cw_failure_threshold = cw_threshold;
  config.cascade.scope_mode = ScopeMode::tor_via_relays;
  const auto scope = cascade_scope(snapshot, ScopeMode::tor_via_relays);
  const auto curve = percolation_curve(config, graph, asn_graph, scope, &relays);
  return estimate_pc(curve, config.disconnection_threshold, config.pc_statistic);
}

}  // namespace

std::vector<SweepRow> cw_threshold_sweep(const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                                         const AsnGraph& asn_graph, const RelayTable& relays,
                                         const CurveConfig& config,
                                         std::span<const double> thresholds) {
  std::vector<SweepRow> out;
  for (double th : thresholds) {
    out.push_back({th, four_layer_pc(snapshot, graph, asn_graph, relays, config, th)});
  }
  return out;
}

LayerComparison compare_layer_models(const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                                     const AsnGraph& asn_graph, const RelayTable& relays,
                                     const CurveConfig& config) {
  LayerComparison out;
  auto three = config;
  three.cascade.layers = LayerModel::three_layer;
  three.cascade.scope_mode = ScopeMode::clearnet_only;
  const auto curve =
      percolation_curve(three, graph, asn_graph, cascade_scope(snapshot, ScopeMode::clearnet_only));
  out.three_layer = estimate_pc(curve, three.disconnection_threshold, three.pc_statistic);
  out.four_layer = four_layer_pc(snapshot, graph, asn_graph, relays, config,
                                 config.cascade.cw_failure_threshold);
  out.tor_share = composition_stats(snapshot).tor_share;
  if (out.three_layer.p_c && out.four_layer.p_c) {
    out.delta = *out.four_layer.p_c - *out.three_layer.p_c;
  }
  return out;
}

}  // namespace subsea
