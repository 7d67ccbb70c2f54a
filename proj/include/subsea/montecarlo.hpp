#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subsea/attacks.hpp"
#include "subsea/cascade.hpp"
#include "subsea/graph.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

enum class PcStatistic : std::uint8_t { mean, median };

struct CurveConfig {
  std::vector<double> p_grid = uniform_grid(0.02);
  int trials = 1000;
  std::uint64_t master_seed = 0;
  double disconnection_threshold = 0.10;
  AttackStrategy strategy = AttackStrategy::random;
  CascadeConfig cascade;
  PlanOptions plan;
  PcStatistic pc_statistic = PcStatistic::mean;
  // Worker threads; results do not depend on this.
  unsigned jobs = 1;

  // Grid 0, step, 2*step, ..., 1 with every point computed as k / N so that
  // prefix sizes do not pick up representation error.
  static std::vector<double> uniform_grid(double step);
  // Throws InputError on an invalid grid, trial count or threshold.
  void validate() const;
};

struct CurvePoint {
  double p = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_ = 0.0;
  double median = 0.0;
};

struct PercolationCurve {
  CurveConfig config;
  std::vector<CurvePoint> points;
  // trial_fractions[t][i]: disconnection fraction of trial t at grid point i.
  std::vector<std::vector<double>> trial_fractions;
  std::int64_t scope_size = 0;  // in-scope nodes (first trial for stochastic scopes)
};

struct PcEstimate {
  std::optional<double> p_c;  // empty: threshold never exceeded
  double threshold = 0.0;
  double grid_step = 0.0;

  bool reached() const noexcept { return p_c.has_value(); }
};

// Supplies the in-scope node set for each trial. Stochastic samplers redraw
// tor placements per trial from the trial stream.
class ScopeSampler {
 public:
  virtual ~ScopeSampler() = default;
  // Every ASN a sampled scope may reference.
  virtual std::vector<Asn> asn_universe() const = 0;
  virtual bool stochastic() const = 0;
  virtual CascadeScope sample(Rng& rng) const = 0;
};

class FixedScope final : public ScopeSampler {
 public:
  explicit FixedScope(CascadeScope scope) : scope_(std::move(scope)) {}
  std::vector<Asn> asn_universe() const override;
  bool stochastic() const override { return false; }
  CascadeScope sample(Rng&) const override { return scope_; }
  const CascadeScope& scope() const noexcept { return scope_; }

 private:
  CascadeScope scope_;
};

// Trial t draws from Rng(derive_seed(master_seed, t)): tor placements first
// (stochastic scopes only), then the removal permutation (random strategy),
// then one relaxed-failure uniform per scope node (when f < 1). One removal
// plan per trial is reused across the grid as growing prefixes.
PercolationCurve percolation_curve(const CurveConfig& config, const PhysicalGraph& graph,
                                   const AsnGraph& asn_graph, const ScopeSampler& scopes,
                                   const RelayTable* relays = nullptr);

PercolationCurve percolation_curve(const CurveConfig& config, const PhysicalGraph& graph,
                                   const AsnGraph& asn_graph, const CascadeScope& scope,
                                   const RelayTable* relays = nullptr);

// Smallest grid p whose statistic strictly exceeds `threshold`.
PcEstimate estimate_pc(const PercolationCurve& curve, double threshold,
                       PcStatistic statistic = PcStatistic::mean);

inline constexpr double kSensitivityThresholds[] = {0.05, 0.10, 0.15, 0.20};

std::vector<PcEstimate> threshold_sensitivity(
    const PercolationCurve& curve,
    std::span<const double> thresholds = kSensitivityThresholds,
    PcStatistic statistic = PcStatistic::mean);

struct EvolutionRow {
  std::string label;
  std::int64_t nodes = 0;
  std::int64_t countries = 0;
  std::int64_t asns = 0;
  PcEstimate pc;
  std::string error;  // non-empty when this row failed
};

// One curve and estimate per snapshot under the same strategy and seed.
// Errors from one snapshot are reported in its row; the rest still run.
std::vector<EvolutionRow> pc_evolution(
    const std::vector<std::pair<std::string, NodeSnapshot>>& snapshots,
    const PhysicalGraph& graph, const AsnGraph& asn_graph, const CurveConfig& config,
    const RelayTable* relays = nullptr);

// "0.720000" for a reached estimate, "not_reached" otherwise.
std::string format_pc(const PcEstimate& pc);

}  // namespace subsea
