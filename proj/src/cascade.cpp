#include "subsea/cascade.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "subsea/error.hpp"

namespace subsea {

std::string_view to_string(LayerModel m) noexcept {
  return m == LayerModel::three_layer ? "three_layer" : "four_layer";
}

void CascadeConfig::validate() const {
  if (!(node_failure_fraction > 0.0 && node_failure_fraction <= 1.0)) {
    throw InputError("node failure fraction must lie in (0, 1]");
  }
  if (!(cw_failure_threshold > 0.0 && cw_failure_threshold < 1.0)) {
    throw InputError("consensus-weight failure threshold must lie in (0, 1)");
  }
}

Asn synthetic_asn(const CountryId& country) noexcept {
  const auto code = country.str();
  return 4'200'000'000u + static_cast<Asn>((code[0] - 'A') * 26 + (code[1] - 'A'));
}

CascadeNetwork::CascadeNetwork(const PhysicalGraph& graph, const AsnGraph& asn_graph,
                               std::span<const Asn> asn_universe, const RelayTable* relays)
    : graph_(&graph) {
  slot_asn_.assign(asn_universe.begin(), asn_universe.end());
  if (relays) {
    for (const auto& r : relays->relays()) slot_asn_.push_back(r.asn);
  }
  std::sort(slot_asn_.begin(), slot_asn_.end());
  slot_asn_.erase(std::unique(slot_asn_.begin(), slot_asn_.end()), slot_asn_.end());
  for (std::size_t s = 0; s < slot_asn_.size(); ++s) slot_lookup_[slot_asn_[s]] = s;

  for (std::size_t s = 0; s < slot_asn_.size(); ++s) {
    const Asn a = slot_asn_[s];
    if (!asn_graph.contains(a)) {
      ++isolated_;
      continue;
    }
    for (Asn b : asn_graph.neighbors(a)) {
      if (b <= a) continue;
      auto it = slot_lookup_.find(b);
      if (it != slot_lookup_.end()) routing_edges_.emplace_back(s, it->second);
    }
  }

  if (relays) {
    has_relays_ = true;
    relay_total_ = relays->total_cw();
    relays_.reserve(relays->relays().size());
    for (const auto& r : relays->relays()) {
      Relay cr;
      if (auto idx = graph.country_index(r.country)) cr.country = *idx;
      cr.slot = slot_lookup_.at(r.asn);
      cr.weight = r.consensus_weight;
      relays_.push_back(cr);
    }
  }
}

std::size_t CascadeNetwork::slot_of(Asn asn) const {
  auto it = slot_lookup_.find(asn);
  return it == slot_lookup_.end() ? npos : it->second;
}

CompiledScope::CompiledScope(const CascadeNetwork& network, const CascadeScope& scope)
    : network_(&network) {
  const auto& graph = network.graph();
  hosting_.assign(graph.country_count(), 0);
  std::map<std::tuple<std::size_t, std::size_t, bool>, std::size_t> index;
  node_group_.reserve(scope.nodes.size());

  for (const auto& n : scope.nodes) {
    Group key;
    key.tor = n.network == Network::tor;
    if (n.country) {
      auto idx = graph.country_index(*n.country);
      if (!idx) {
        throw InputError("node '" + n.node_id + "' is hosted in " + n.country->str() +
                         ", which is not in the physical graph");
      }
      key.country = *idx;
      if (!n.asn) throw InputError("node '" + n.node_id + "' has a country but no ASN");
      key.slot = network.slot_of(*n.asn);
      if (key.slot == CascadeNetwork::npos) {
        throw InputError("node '" + n.node_id + "' references AS" + std::to_string(*n.asn) +
                         " outside the cascade ASN universe");
      }
      ++hosting_[key.country];
    } else if (!key.tor) {
      throw InputError("clearnet node '" + n.node_id + "' has no country");
    }

    auto [it, inserted] = index.try_emplace({key.country, key.slot, key.tor}, groups_.size());
    if (inserted) groups_.push_back(key);
    ++groups_[it->second].count;
    node_group_.push_back(it->second);
  }
  node_count_ = static_cast<std::int64_t>(scope.nodes.size());
}

std::vector<std::int64_t> CompiledScope::stage3_failures_all() const {
  std::vector<std::int64_t> out(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) out[g] = groups_[g].count;
  return out;
}

std::vector<std::int64_t> CompiledScope::stage3_failures(double node_failure_fraction,
                                                         std::span<const double> draws) const {
  if (node_failure_fraction >= 1.0) return stage3_failures_all();
  if (draws.size() != node_group_.size()) {
    throw InvariantViolation("relaxed cascade needs one draw per scope node");
  }
  std::vector<std::int64_t> out(groups_.size(), 0);
  for (std::size_t i = 0; i < node_group_.size(); ++i) {
    if (draws[i] < node_failure_fraction) ++out[node_group_[i]];
  }
  return out;
}

namespace {

std::size_t uf_find(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::int64_t CompiledScope::single_pass(std::span<const char> asn_removed,
                                        std::span<const std::int64_t> stage3_fail,
                                        CascadeWorkspace& ws, bool use_survivor_hosting) const {
  const auto& net = *network_;
  constexpr auto npos = CascadeNetwork::npos;
  const std::size_t n_countries = net.graph().country_count();
  const std::size_t n_slots = net.slot_count();

  // Stages 2-3: pick the main component, fail nodes elsewhere.
  std::span<const std::int64_t> hosting = hosting_;
  if (use_survivor_hosting) {
    ws.hosting.assign(n_countries, 0);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (groups_[g].country != npos) ws.hosting[groups_[g].country] += ws.survivors[g];
    }
    hosting = ws.hosting;
  }
  ws.main = main_component(ws.partition, hosting);
  for (std::size_t c = 0; c < n_countries; ++c) {
    if (ws.partition.component_of[c] != ws.main) ws.country_lost[c] = 1;
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& grp = groups_[g];
    if (grp.country != npos && ws.country_lost[grp.country]) {
      ws.survivors[g] = std::min(ws.survivors[g], grp.count - stage3_fail[g]);
    }
  }

  // Stage 4: routing connectivity among ASNs that still host survivors.
  ws.slot_weight.assign(n_slots, 0);
  for (std::size_t s = 0; s < n_slots && s < asn_removed.size(); ++s) {
    if (asn_removed[s]) ws.slot_failed[s] = 1;
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].slot != npos) ws.slot_weight[groups_[g].slot] += ws.survivors[g];
  }
  auto alive = [&](std::size_t s) { return ws.slot_weight[s] > 0 && !ws.slot_failed[s]; };

  ws.parent.resize(n_slots);
  std::iota(ws.parent.begin(), ws.parent.end(), std::size_t{0});
  for (const auto& [a, b] : net.routing_edges_) {
    if (!alive(a) || !alive(b)) continue;
    auto ra = uf_find(ws.parent, a);
    auto rb = uf_find(ws.parent, b);
    if (ra != rb) ws.parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  // Roots are the smallest slot (hence smallest ASN) of their component.
  auto& comp_weight = ws.comp_weight;
  comp_weight.assign(n_slots, 0);
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (alive(s)) comp_weight[uf_find(ws.parent, s)] += ws.slot_weight[s];
  }
  std::size_t winner = npos;
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (!alive(s) || ws.parent[s] != s) continue;
    if (winner == npos || comp_weight[s] > comp_weight[winner]) winner = s;
  }
  for (std::size_t s = 0; s < n_slots; ++s) {
    if (alive(s) && uf_find(ws.parent, s) != winner) ws.slot_failed[s] = 1;
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].slot != npos && ws.slot_failed[groups_[g].slot]) ws.survivors[g] = 0;
  }

  std::int64_t alive_nodes = 0;
  for (auto s : ws.survivors) alive_nodes += s;
  return node_count_ - alive_nodes;
}

std::int64_t CompiledScope::evaluate(std::span<const char> edge_removed,
                                     std::span<const char> asn_removed,
                                     std::span<const std::int64_t> stage3_fail,
                                     const CascadeConfig& config, CascadeWorkspace& ws) const {
  const auto& net = *network_;
  constexpr auto npos = CascadeNetwork::npos;
  const bool four_layer = config.layers == LayerModel::four_layer;
  if (four_layer && (!net.has_relays_ || !(net.relay_total_ > 0.0))) {
    throw InputError("four-layer cascade requires relays with positive total consensus weight");
  }

  components_into(net.graph(), edge_removed, ws.partition);
  ws.country_lost.assign(net.graph().country_count(), 0);
  ws.slot_failed.assign(net.slot_count(), 0);
  ws.survivors.resize(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) ws.survivors[g] = groups_[g].count;
  ws.tor_failed = false;
  ws.surviving_cw_fraction = 1.0;

  std::int64_t lost = 0;
  bool first = true;
  while (true) {
    std::int64_t now = single_pass(asn_removed, stage3_fail, ws, !first);

    if (four_layer && !ws.tor_failed) {
      double up = 0.0;
      for (const auto& r : net.relays_) {
        const bool country_down = r.country != npos && ws.country_lost[r.country];
        const bool asn_down = r.slot != npos && ws.slot_failed[r.slot];
        if (!country_down && !asn_down) up += r.weight;
      }
      ws.surviving_cw_fraction = up / net.relay_total_;
      if (ws.surviving_cw_fraction < config.cw_failure_threshold) {
        ws.tor_failed = true;
        for (std::size_t g = 0; g < groups_.size(); ++g) {
          if (groups_[g].tor) ws.survivors[g] = 0;
        }
        now = node_count_;
        for (auto s : ws.survivors) now -= s;
      }
    }

    const bool changed = first || now != lost;
    lost = now;
    first = false;
    if (!config.iterate_to_fixpoint || !changed) break;
  }
  return lost;
}

CascadeOutcome run_cascade(const PhysicalGraph& graph, const AsnGraph& asn_graph,
                           const CascadeScope& scope, const RelayTable* relays,
                           const Removal& removal, const CascadeConfig& config,
                           Rng& trial_rng) {
  config.validate();
  if (config.layers == LayerModel::four_layer && (!relays || !(relays->total_cw() > 0.0))) {
    throw InputError("four-layer cascade requires relays with positive total consensus weight");
  }

  std::vector<Asn> universe = removal.asns;
  for (const auto& n : scope.nodes) {
    if (n.asn) universe.push_back(*n.asn);
  }
  const CascadeNetwork network(graph, asn_graph, universe, relays);
  const CompiledScope compiled(network, scope);

  std::vector<char> edge_mask(graph.edge_count(), 0);
  for (const auto& id : removal.edge_ids) {
    auto idx = graph.edge_index(id);
    if (!idx) throw InputError("unknown edge id '" + id + "'");
    if (!graph.edges()[*idx].removable()) {
      throw InputError("land edge '" + id + "' cannot be removed");
    }
    edge_mask[*idx] = 1;
  }
  std::vector<char> asn_mask(network.slot_count(), 0);
  for (Asn a : removal.asns) asn_mask[network.slot_of(a)] = 1;

  const double f = config.node_failure_fraction;
  std::vector<double> draws;
  if (f < 1.0) {
    draws.resize(scope.nodes.size());
    for (auto& u : draws) u = trial_rng.uniform();
  }
  const auto stage3 = compiled.stage3_failures(f, draws);

  CascadeWorkspace ws;
  const auto lost = compiled.evaluate(edge_mask, asn_mask, stage3, config, ws);

  CascadeOutcome out;
  const auto countries = graph.countries();
  for (std::size_t c = 0; c < countries.size(); ++c) {
    (ws.country_lost[c] ? out.disconnected_countries : out.surviving_countries)
        .insert(countries[c]);
  }
  for (std::size_t s = 0; s < network.slot_count(); ++s) {
    if (ws.slot_failed[s]) out.failed_asns.insert(network.slot_asn(s));
  }
  const auto groups = compiled.groups();
  const auto node_group = compiled.node_group();
  for (std::size_t i = 0; i < scope.nodes.size(); ++i) {
    const auto& grp = groups[node_group[i]];
    bool failed = false;
    if (grp.country != CascadeNetwork::npos && ws.country_lost[grp.country]) {
      failed = f >= 1.0 || draws[i] < f;
    }
    if (grp.slot != CascadeNetwork::npos && ws.slot_failed[grp.slot]) failed = true;
    if (grp.tor && ws.tor_failed) failed = true;
    (failed ? out.disconnected_nodes : out.surviving_nodes).insert(scope.nodes[i].node_id);
  }
  if (static_cast<std::int64_t>(out.disconnected_nodes.size()) != lost) {
    throw InvariantViolation("node-level cascade outcome disagrees with group counts");
  }
  out.tor_layer_failed = ws.tor_failed;
  out.surviving_cw_fraction = ws.surviving_cw_fraction;
  out.disconnection_fraction =
      scope.nodes.empty() ? 0.0
                          : static_cast<double>(lost) / static_cast<double>(scope.nodes.size());
  return out;
}

}  // namespace subsea
