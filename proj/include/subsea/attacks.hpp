#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subsea/cascade.hpp"
#include "subsea/graph.hpp"
#include "subsea/rng.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

enum class AttackStrategy : std::uint8_t { random, degree, betweenness, asn_capacity };

std::string_view to_string(AttackStrategy s) noexcept;
std::optional<AttackStrategy> parse_attack_strategy(std::string_view s) noexcept;

inline bool targets_cables(AttackStrategy s) noexcept { return s != AttackStrategy::asn_capacity; }

struct PlanOptions {
  // Rank cables by betweenness on the submarine-only graph instead of the
  // combined land + submarine graph.
  bool betweenness_submarine_only = false;
  // Recompute betweenness after each removal (greedy) instead of ranking once.
  bool adaptive_betweenness = false;
};

// Ordered attack targets. Cable strategies fill `edges` (graph edge
// indices); asn_capacity fills `asns`. cumulative[k] is the attack-axis
// fraction reached after removing the first k + 1 targets.
struct RemovalPlan {
  AttackStrategy strategy = AttackStrategy::random;
  std::vector<std::size_t> edges;
  std::vector<Asn> asns;
  std::vector<std::int64_t> asn_nodes;  // in-scope nodes per ASN target
  std::vector<double> cumulative;

  std::size_t size() const noexcept { return targets_cables(strategy) ? edges.size() : asns.size(); }
};

// Throws InputError when the target universe is empty.
RemovalPlan removal_plan(AttackStrategy strategy, const PhysicalGraph& graph,
                         const CascadeScope& scope, Rng& rng, const PlanOptions& options = {});
RemovalPlan removal_plan(AttackStrategy strategy, const PhysicalGraph& graph,
                         const CascadeScope& scope, std::uint64_t seed,
                         const PlanOptions& options = {});

// Number of leading targets removed at attack fraction p.
// Cable plans: ceil(p * E). ASN plans: shortest prefix with cumulative >= p.
// Throws InputError unless 0 <= p <= 1.
std::size_t prefix_length(const RemovalPlan& plan, double p);

Removal apply_plan(const RemovalPlan& plan, const PhysicalGraph& graph, double p);

}  // namespace subsea
