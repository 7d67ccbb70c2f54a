#include "subsea/snapshot.hpp"

#include <algorithm>

#include "subsea/error.hpp"

namespace subsea {

std::string_view to_string(Network n) noexcept {
  switch (n) {
    case Network::clearnet: return "clearnet";
    case Network::tor: return "tor";
    case Network::other: return "other";
  }
  return "other";
}

std::optional<Network> parse_network(std::string_view s) noexcept {
  if (s == "clearnet") return Network::clearnet;
  if (s == "tor") return Network::tor;
  if (s == "other") return Network::other;
  return std::nullopt;
}

std::string_view to_string(ScopeMode m) noexcept {
  switch (m) {
    case ScopeMode::clearnet_only: return "clearnet_only";
    case ScopeMode::full: return "full";
    case ScopeMode::tor_via_relays: return "tor_via_relays";
  }
  return "clearnet_only";
}

std::optional<ScopeMode> parse_scope_mode(std::string_view s) noexcept {
  if (s == "clearnet_only") return ScopeMode::clearnet_only;
  if (s == "full") return ScopeMode::full;
  if (s == "tor_via_relays") return ScopeMode::tor_via_relays;
  return std::nullopt;
}

CompositionStats composition_stats(const NodeSnapshot& snapshot) {
  CompositionStats s;
  for (const auto& n : snapshot.nodes) {
    ++s.total;
    switch (n.network) {
      case Network::clearnet: ++s.clearnet; break;
      case Network::tor: ++s.tor; break;
      case Network::other: ++s.other; break;
    }
  }
  if (s.total > 0) {
    s.clearnet_share = static_cast<double>(s.clearnet) / static_cast<double>(s.total);
    s.tor_share = static_cast<double>(s.tor) / static_cast<double>(s.total);
  }
  return s;
}

void AsnGraph::add_edge(Asn a, Asn b) {
  if (a == b) {
    add_vertex(a);
    return;
  }
  adjacency_[a].insert(b);
  adjacency_[b].insert(a);
  edges_.emplace(std::min(a, b), std::max(a, b));
}

std::vector<Asn> AsnGraph::vertices() const {
  std::vector<Asn> out;
  out.reserve(adjacency_.size());
  for (const auto& [a, _] : adjacency_) out.push_back(a);
  return out;
}

const std::set<Asn>& AsnGraph::neighbors(Asn a) const {
  static const std::set<Asn> none;
  auto it = adjacency_.find(a);
  return it == adjacency_.end() ? none : it->second;
}

RelayTable::RelayTable(std::vector<TorRelay> relays) : relays_(std::move(relays)) {
  for (const auto& r : relays_) {
    if (!(r.consensus_weight >= 0.0)) {
      throw InputError("relay '" + r.fingerprint + "' has negative consensus weight");
    }
  }
  recompute();
}

void RelayTable::add(TorRelay relay) {
  if (!(relay.consensus_weight >= 0.0)) {
    throw InputError("relay '" + relay.fingerprint + "' has negative consensus weight");
  }
  relays_.push_back(std::move(relay));
  recompute();
}

void RelayTable::recompute() {
  double sum = 0.0;
  for (const auto& r : relays_) sum += r.consensus_weight;
  total_cw_ = sum;
}

std::int64_t CascadeScope::tor_count() const {
  return std::count_if(nodes.begin(), nodes.end(),
                       [](const ScopedNode& n) { return n.network == Network::tor; });
}

CascadeScope cascade_scope(const NodeSnapshot& snapshot, ScopeMode mode,
                           const TorPlacements* placements) {
  CascadeScope scope;
  for (const auto& n : snapshot.nodes) {
    if (n.network == Network::clearnet) {
      if (!n.country || !n.asn) continue;
      scope.nodes.push_back({n.node_id, n.network, n.country, n.asn, false});
      continue;
    }
    if (n.network != Network::tor || mode == ScopeMode::clearnet_only) continue;

    const TorPlacement* placed = nullptr;
    if (placements) {
      auto it = placements->find(n.node_id);
      if (it != placements->end()) placed = &it->second;
    }
    if (placed) {
      scope.nodes.push_back({n.node_id, n.network, placed->country, placed->asn,
                             placed->synthetic_asn});
    } else if (mode == ScopeMode::tor_via_relays) {
      scope.nodes.push_back({n.node_id, n.network, std::nullopt, std::nullopt, false});
    }
  }
  std::sort(scope.nodes.begin(), scope.nodes.end(),
            [](const ScopedNode& a, const ScopedNode& b) { return a.node_id < b.node_id; });
  for (const auto& n : scope.nodes) {
    if (n.country) ++scope.hosting[*n.country];
  }
  return scope;
}

}  // namespace subsea
