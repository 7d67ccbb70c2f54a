#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subsea/graph.hpp"
#include "subsea/rng.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

enum class LayerModel : std::uint8_t { three_layer, four_layer };

std::string_view to_string(LayerModel m) noexcept;

struct CascadeConfig {
  // Probability that a node in a disconnected country fails. 1.0 fails all.
  double node_failure_fraction = 1.0;
  LayerModel layers = LayerModel::three_layer;
  // Tor nodes fail when surviving relay weight drops below this share.
  double cw_failure_threshold = 0.5;
  ScopeMode scope_mode = ScopeMode::clearnet_only;
  // Re-run main-component selection and routing on the survivors until
  // nothing changes. Off: one pass through the stages.
  bool iterate_to_fixpoint = false;

  // Throws InputError for out-of-range parameters.
  void validate() const;
};

struct Removal {
  std::vector<std::string> edge_ids;  // submarine edges
  std::vector<Asn> asns;              // ASN vertices deleted before routing
};

struct CascadeOutcome {
  std::set<CountryId> surviving_countries;
  std::set<CountryId> disconnected_countries;
  std::set<std::string> surviving_nodes;
  std::set<std::string> disconnected_nodes;
  std::set<Asn> failed_asns;
  bool tor_layer_failed = false;
  double surviving_cw_fraction = 1.0;
  double disconnection_fraction = 0.0;
};

inline double disconnection_fraction(const CascadeOutcome& outcome) noexcept {
  return outcome.disconnection_fraction;
}

// ASN placeholder for tor nodes placed in a country with no observed ASN.
// Drawn from the private-use range, so it never collides with CAIDA data.
Asn synthetic_asn(const CountryId& country) noexcept;

// Immutable index form of the physical layer, the routing layer restricted
// to an ASN universe, and the relay layer. Shared read-only across trials.
class CascadeNetwork {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // `asn_universe` lists every ASN a scope may reference; relay ASNs are
  // added automatically. Throws InputError when relay weights are invalid.
  CascadeNetwork(const PhysicalGraph& graph, const AsnGraph& asn_graph,
                 std::span<const Asn> asn_universe, const RelayTable* relays);

  const PhysicalGraph& graph() const noexcept { return *graph_; }
  std::size_t slot_count() const noexcept { return slot_asn_.size(); }
  Asn slot_asn(std::size_t slot) const noexcept { return slot_asn_[slot]; }
  std::size_t slot_of(Asn asn) const;  // npos when absent
  bool has_relays() const noexcept { return has_relays_; }
  // Universe ASNs that are missing from the routing graph.
  std::size_t isolated_asn_count() const noexcept { return isolated_; }

 private:
  friend class CompiledScope;

  struct Relay {
    std::size_t country = npos;  // npos: country unknown to the graph
    std::size_t slot = npos;
    double weight = 0.0;
  };

  const PhysicalGraph* graph_;
  std::vector<Asn> slot_asn_;  // ascending
  std::unordered_map<Asn, std::size_t> slot_lookup_;
  std::vector<std::pair<std::size_t, std::size_t>> routing_edges_;  // induced
  std::vector<Relay> relays_;
  double relay_total_ = 0.0;
  bool has_relays_ = false;
  std::size_t isolated_ = 0;
};

// Scratch state for CompiledScope::evaluate; one per worker thread.
struct CascadeWorkspace {
  ComponentPartition partition;
  std::size_t main = 0;
  std::vector<char> country_lost;     // ever outside the main component
  std::vector<char> slot_failed;      // deleted or cut off from routing
  std::vector<std::int64_t> survivors;   // per group
  std::vector<std::int64_t> hosting;     // per country, scratch
  std::vector<std::int64_t> slot_weight; // per slot, scratch
  std::vector<std::int64_t> comp_weight; // per slot root, scratch
  std::vector<std::size_t> parent;       // union-find scratch
  bool tor_failed = false;
  double surviving_cw_fraction = 1.0;
};

// Scope nodes grouped by (country, ASN, network). Nodes within a group
// share every cascade decision except the per-node relaxed-failure draw.
class CompiledScope {
 public:
  struct Group {
    std::size_t country = CascadeNetwork::npos;  // npos: unplaced tor
    std::size_t slot = CascadeNetwork::npos;
    bool tor = false;
    std::int64_t count = 0;
  };

  // Throws InputError when a node references a country missing from the
  // graph or an ASN outside the network's universe.
  CompiledScope(const CascadeNetwork& network, const CascadeScope& scope);

  std::span<const Group> groups() const noexcept { return groups_; }
  std::int64_t node_count() const noexcept { return node_count_; }
  // Group index of each scope node, in scope (node_id) order.
  std::span<const std::size_t> node_group() const noexcept { return node_group_; }

  // Per-group count of nodes that fail when their country is disconnected,
  // given one uniform draw per scope node (in node_id order).
  std::vector<std::int64_t> stage3_failures(double node_failure_fraction,
                                            std::span<const double> draws) const;
  std::vector<std::int64_t> stage3_failures_all() const;

  // Runs the cascade and returns the number of failed scope nodes.
  // edge_removed is indexed by graph edge, asn_removed by network slot
  // (either may be empty for "nothing removed").
  std::int64_t evaluate(std::span<const char> edge_removed, std::span<const char> asn_removed,
                        std::span<const std::int64_t> stage3_fail, const CascadeConfig& config,
                        CascadeWorkspace& ws) const;

 private:
  std::int64_t single_pass(std::span<const char> asn_removed,
                           std::span<const std::int64_t> stage3_fail, CascadeWorkspace& ws,
                           bool use_survivor_hosting) const;

  const CascadeNetwork* network_;
  std::vector<Group> groups_;
  std::vector<std::size_t> node_group_;
  std::vector<std::int64_t> hosting_;  // per country
  std::int64_t node_count_ = 0;
};

// Single cascade on explicit inputs. Draws one uniform per scope node from
// `trial_rng` when node_failure_fraction < 1.
CascadeOutcome run_cascade(const PhysicalGraph& graph, const AsnGraph& asn_graph,
                           const CascadeScope& scope, const RelayTable* relays,
                           const Removal& removal, const CascadeConfig& config, Rng& trial_rng);

}  // namespace subsea
