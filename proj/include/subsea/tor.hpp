#pragma once

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
#include "subsea/montecarlo.hpp"
#include "subsea/rng.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

enum class TorScenarioKind : std::uint8_t { clearnet_only, proportional, uniform, clustered, worst_case };

inline constexpr TorScenarioKind kAllTorScenarios[] = {
    TorScenarioKind::clearnet_only, TorScenarioKind::proportional, TorScenarioKind::uniform,
    TorScenarioKind::clustered, TorScenarioKind::worst_case};

std::string_view to_string(TorScenarioKind k) noexcept;
std::optional<TorScenarioKind> parse_tor_scenario(std::string_view s) noexcept;

struct TorScenario {
  TorScenarioKind kind = TorScenarioKind::clearnet_only;
  // Used by `clustered`; the remaining mass is split equally over the other
  // countries that host clearnet nodes.
  std::vector<std::pair<CountryId, double>> clustered_weights = default_clustered_weights();
  // Deterministic largest-remainder apportionment instead of per-node draws.
  bool apportion = false;

  static std::vector<std::pair<CountryId, double>> default_clustered_weights();
};

struct ScenarioAssignment {
  TorScenarioKind kind = TorScenarioKind::clearnet_only;
  TorPlacements placements;
  std::size_t synthetic_asn_count = 0;  // placements on a per-country placeholder ASN
};

// Precomputed clearnet geography of one snapshot, reused across trials.
class TorPlacer {
 public:
  // Throws InputError for an unknown clustered country, clustered weights
  // summing above 1, or a stochastic scenario with no clearnet geography.
  TorPlacer(TorScenario scenario, const NodeSnapshot& snapshot, const PhysicalGraph& graph);

  ScenarioAssignment assign(Rng& rng) const;

  const TorScenario& scenario() const noexcept { return scenario_; }
  // Candidate countries with their weights (empty for clearnet_only).
  std::span<const std::pair<CountryId, double>> weights() const noexcept { return weights_; }
  std::span<const std::string> tor_nodes() const noexcept { return tor_nodes_; }
  // Observed clearnet ASNs of a country, ascending.
  std::span<const Asn> country_asns(const CountryId& c) const;
  // Every ASN an assignment can produce, including placeholders.
  std::vector<Asn> placement_asns() const;

 private:
  TorPlacement place(const CountryId& c, std::uint64_t pick) const;

  TorScenario scenario_;
  std::vector<std::pair<CountryId, double>> weights_;
  std::vector<double> cumulative_;
  std::vector<std::string> tor_nodes_;  // sorted
  std::map<CountryId, std::vector<Asn>> asns_by_country_;
};

ScenarioAssignment assign_tor_scenario(const TorScenario& scenario, const NodeSnapshot& snapshot,
                                       const PhysicalGraph& graph, Rng& rng);
ScenarioAssignment assign_tor_scenario(const TorScenario& scenario, const NodeSnapshot& snapshot,
                                       const PhysicalGraph& graph, std::uint64_t seed);

// Scope sampler that places tor nodes per trial according to a scenario.
class ScenarioScope final : public ScopeSampler {
 public:
  ScenarioScope(TorScenario scenario, const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                ScopeMode mode = ScopeMode::full);

  std::vector<Asn> asn_universe() const override;
  bool stochastic() const override;
  CascadeScope sample(Rng& rng) const override;

 private:
  const NodeSnapshot* snapshot_;
  TorPlacer placer_;
  ScopeMode mode_;
};

struct ScenarioBound {
  TorScenarioKind scenario;
  PcEstimate pc;
};

// p_c under each scenario, all sharing config's strategy and master seed.
std::vector<ScenarioBound> tor_bounds_report(
    const NodeSnapshot& snapshot, const PhysicalGraph& graph, const AsnGraph& asn_graph,
    const CurveConfig& config, std::span<const TorScenarioKind> scenarios = kAllTorScenarios,
    const TorScenario& base = {});

// Share of consensus weight on relays outside `disconnected_countries` and
// off `failed_asns`. Throws InputError when the table's total weight is 0.
double relay_survival(const RelayTable& relays, const std::set<CountryId>& disconnected_countries,
                      const std::set<Asn>& failed_asns);

inline constexpr double kCwSweepThresholds[] = {0.3, 0.5, 0.7};

struct SweepRow {
  double cw_threshold = 0.0;
  PcEstimate pc;
};

// Four-layer curves for each relay threshold with a shared master seed.
std::vector<SweepRow> cw_threshold_sweep(const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                                         const AsnGraph& asn_graph, const RelayTable& relays,
                                         const CurveConfig& config,
                                         std::span<const double> thresholds = kCwSweepThresholds);

struct LayerComparison {
  PcEstimate three_layer;
  PcEstimate four_layer;
  double tor_share = 0.0;
  // four_layer - three_layer; empty unless both thresholds were reached.
  std::optional<double> delta;
};

// Clearnet-only three-layer model against the four-layer model in which
// every tor node depends on the relay layer.
LayerComparison compare_layer_models(const NodeSnapshot& snapshot, const PhysicalGraph& graph,
                                     const AsnGraph& asn_graph, const RelayTable& relays,
                                     const CurveConfig& config);

}  // namespace subsea
