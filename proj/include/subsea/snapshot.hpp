#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subsea/graph.hpp"

namespace subsea {

using Asn = std::uint32_t;
using Timestamp = std::chrono::sys_seconds;

enum class Network : std::uint8_t { clearnet, tor, other };

std::string_view to_string(Network n) noexcept;
std::optional<Network> parse_network(std::string_view s) noexcept;

struct P2PNode {
  std::string node_id;
  Network network = Network::clearnet;
  std::optional<CountryId> country;
  std::optional<Asn> asn;

  bool operator==(const P2PNode&) const = default;
};

struct NodeSnapshot {
  Timestamp timestamp{};
  std::vector<P2PNode> nodes;

  bool operator==(const NodeSnapshot&) const = default;
};

struct CompositionStats {
  std::int64_t total = 0;
  std::int64_t clearnet = 0;
  std::int64_t tor = 0;
  std::int64_t other = 0;  // I2P, CJDNS and anything else
  double clearnet_share = 0.0;
  double tor_share = 0.0;
};

CompositionStats composition_stats(const NodeSnapshot& snapshot);

// Undirected AS-level routing graph. Relationship direction is discarded.
class AsnGraph {
 public:
  void add_vertex(Asn a) { adjacency_.try_emplace(a); }
  // Self-loops are ignored; duplicate edges are merged.
  void add_edge(Asn a, Asn b);

  bool contains(Asn a) const { return adjacency_.contains(a); }
  std::size_t vertex_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::set<std::pair<Asn, Asn>>& edges() const noexcept { return edges_; }
  std::vector<Asn> vertices() const;
  const std::set<Asn>& neighbors(Asn a) const;

  bool operator==(const AsnGraph& o) const { return adjacency_ == o.adjacency_; }

 private:
  std::map<Asn, std::set<Asn>> adjacency_;
  std::set<std::pair<Asn, Asn>> edges_;  // (lo, hi)
};

struct TorRelay {
  std::string fingerprint;
  CountryId country;
  Asn asn = 0;
  double consensus_weight = 0.0;

  bool operator==(const TorRelay&) const = default;
};

class RelayTable {
 public:
  RelayTable() = default;
  // Throws InputError on negative weights.
  explicit RelayTable(std::vector<TorRelay> relays);

  void add(TorRelay relay);
  std::span<const TorRelay> relays() const noexcept { return relays_; }
  double total_cw() const noexcept { return total_cw_; }
  bool empty() const noexcept { return relays_.empty(); }

  bool operator==(const RelayTable& o) const { return relays_ == o.relays_; }

 private:
  void recompute();

  std::vector<TorRelay> relays_;
  double total_cw_ = 0.0;
};

// Scenario-chosen location for a tor node. Synthetic ASNs stand in for
// countries with no observed ASN and are not part of any AsnGraph.
struct TorPlacement {
  CountryId country;
  Asn asn = 0;
  bool synthetic_asn = false;

  bool operator==(const TorPlacement&) const = default;
};

using TorPlacements = std::map<std::string, TorPlacement>;

enum class ScopeMode : std::uint8_t {
  clearnet_only,   // clearnet nodes with country and ASN
  full,            // plus tor nodes that carry a placement
  tor_via_relays,  // plus every tor node; unplaced ones depend only on relays
};

std::string_view to_string(ScopeMode m) noexcept;
std::optional<ScopeMode> parse_scope_mode(std::string_view s) noexcept;

struct ScopedNode {
  std::string node_id;
  Network network = Network::clearnet;
  std::optional<CountryId> country;  // empty only for unplaced tor nodes
  std::optional<Asn> asn;
  bool synthetic_asn = false;
};

struct CascadeScope {
  std::vector<ScopedNode> nodes;  // sorted by node_id
  std::map<CountryId, std::int64_t> hosting;

  std::size_t size() const noexcept { return nodes.size(); }
  std::int64_t tor_count() const;
};

CascadeScope cascade_scope(const NodeSnapshot& snapshot, ScopeMode mode,
                           const TorPlacements* placements = nullptr);

}  // namespace subsea
