#include "subsea/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "subsea/error.hpp"

namespace subsea {

std::vector<double> CurveConfig::uniform_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw InputError("grid step must lie in (0, 1]");
  const auto n = static_cast<long>(std::llround(1.0 / step));
  if (n < 1 || std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) {
    throw InputError("grid step must divide 1 evenly");
  }
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
  return grid;
}

void CurveConfig::validate() const {
  if (p_grid.empty()) throw InputError("p grid is empty");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 0.0 && p_grid[i] <= 1.0)) throw InputError("p grid leaves [0, 1]");
    if (i > 0 && !(p_grid[i] > p_grid[i - 1])) {
      throw InputError("p grid must be strictly increasing");
    }
  }
  if (trials < 1) throw InputError("trial count must be at least 1");
  if (!(disconnection_threshold > 0.0 && disconnection_threshold < 1.0)) {
    throw InputError("disconnection threshold must lie in (0, 1)");
  }
  cascade.validate();
}

std::vector<Asn> FixedScope::asn_universe() const {
  std::vector<Asn> out;
  for (const auto& n : scope_.nodes) {
    if (n.asn) out.push_back(*n.asn);
  }
  return out;
}

namespace {

// Neumaier compensated summation in a fixed order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

CurvePoint summarize(double p, std::vector<double>& column) {
  CurvePoint pt;
  pt.p = p;
  const auto n = column.size();
  CompensatedSum sum;
  for (double x : column) sum.add(x);
  pt.mean = sum.value() / static_cast<double>(n);
  if (n > 1) {
    CompensatedSum sq;
    for (double x : column) sq.add((x - pt.mean) * (x - pt.mean));
    pt.stddev = std::sqrt(sq.value() / static_cast<double>(n - 1));
  }
  pt.stderr_ = pt.stddev / std::sqrt(static_cast<double>(n));
  std::sort(column.begin(), column.end());
  pt.median = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  return pt;
}

}  // namespace

PercolationCurve percolation_curve(const CurveConfig& config, const PhysicalGraph& graph,
                                   const AsnGraph& asn_graph, const ScopeSampler& scopes,
                                   const RelayTable* relays) {
  config.validate();
  if (config.cascade.layers == LayerModel::four_layer && (!relays || !(relays->total_cw() > 0.0))) {
    throw InputError("four-layer model requires relays with positive total consensus weight");
  }

  const auto universe = scopes.asn_universe();
  const CascadeNetwork network(graph, asn_graph, universe, relays);
  const bool stochastic = scopes.stochastic();
  const bool relaxed = config.cascade.node_failure_fraction < 1.0;

  std::optional<CascadeScope> shared_scope;
  std::optional<CompiledScope> shared_compiled;
  if (!stochastic) {
    Rng unused(0);
    shared_scope = scopes.sample(unused);
    shared_compiled.emplace(network, *shared_scope);
  }
  std::optional<RemovalPlan> shared_plan;
  if (config.strategy != AttackStrategy::random &&
      (targets_cables(config.strategy) || !stochastic)) {
    Rng unused(0);
    shared_plan = removal_plan(config.strategy, graph,
                               shared_scope ? *shared_scope : CascadeScope{}, unused, config.plan);
  }

  const auto trials = static_cast<std::size_t>(config.trials);
  const auto grid = config.p_grid.size();
  PercolationCurve curve;
  curve.config = config;
  curve.trial_fractions.assign(trials, std::vector<double>(grid, 0.0));

  auto run_trial = [&](std::size_t t, CascadeWorkspace& ws) {
    Rng rng(derive_seed(config.master_seed, t));
    std::optional<CascadeScope> own_scope;
    std::optional<CompiledScope> own_compiled;
    const CascadeScope* scope = shared_scope ? &*shared_scope : nullptr;
    const CompiledScope* compiled = shared_compiled ? &*shared_compiled : nullptr;
    if (stochastic) {
      own_scope = scopes.sample(rng);
      own_compiled.emplace(network, *own_scope);
      scope = &*own_scope;
      compiled = &*own_compiled;
    }
    if (t == 0) curve.scope_size = static_cast<std::int64_t>(scope->size());

    std::optional<RemovalPlan> own_plan;
    const RemovalPlan* plan = shared_plan ? &*shared_plan : nullptr;
    if (!plan) {
      own_plan = removal_plan(config.strategy, graph, *scope, rng, config.plan);
      plan = &*own_plan;
    }

    std::vector<double> draws;
    if (relaxed) {
      draws.resize(scope->size());
      for (auto& u : draws) u = rng.uniform();
    }
    const auto stage3 = compiled->stage3_failures(config.cascade.node_failure_fraction, draws);

    std::vector<char> edge_mask(graph.edge_count(), 0);
    std::vector<char> asn_mask(network.slot_count(), 0);
    std::size_t applied = 0;
    const double n_nodes = static_cast<double>(compiled->node_count());
    auto& row = curve.trial_fractions[t];
    for (std::size_t i = 0; i < grid; ++i) {
      const auto k = prefix_length(*plan, config.p_grid[i]);
      for (; applied < k; ++applied) {
        if (targets_cables(plan->strategy)) {
          edge_mask[plan->edges[applied]] = 1;
        } else {
          asn_mask[network.slot_of(plan->asns[applied])] = 1;
        }
      }
      const auto lost = compiled->evaluate(edge_mask, asn_mask, stage3, config.cascade, ws);
      row[i] = n_nodes > 0 ? static_cast<double>(lost) / n_nodes : 0.0;
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(trials)));
  if (workers == 1) {
    CascadeWorkspace ws;
    for (std::size_t t = 0; t < trials; ++t) run_trial(t, ws);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        CascadeWorkspace ws;
        try {
          for (std::size_t t = next++; t < trials; t = next++) run_trial(t, ws);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = trials;
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> column(trials);
  curve.points.reserve(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = curve.trial_fractions[t][i];
    curve.points.push_back(summarize(config.p_grid[i], column));
  }
  return curve;
}

PercolationCurve percolation_curve(const CurveConfig& config, const PhysicalGraph& graph,
                                   const AsnGraph& asn_graph, const CascadeScope& scope,
                                   const RelayTable* relays) {
  return percolation_curve(config, graph, asn_graph, FixedScope(scope), relays);
}

PcEstimate estimate_pc(const PercolationCurve& curve, double threshold, PcStatistic statistic) {
  PcEstimate est;
  est.threshold = threshold;
  const auto& grid = curve.config.p_grid;
  est.grid_step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  for (const auto& pt : curve.points) {
    const double value = statistic == PcStatistic::mean ? pt.mean : pt.median;
    if (value > threshold) {
      est.p_c = pt.p;
      break;
    }
  }
  return est;
}

std::vector<PcEstimate> threshold_sensitivity(const PercolationCurve& curve,
                                              std::span<const double> thresholds,
                                              PcStatistic statistic) {
  std::vector<PcEstimate> out;
  out.reserve(thresholds.size());
  for (double th : thresholds) out.push_back(estimate_pc(curve, th, statistic));
  return out;
}

std::vector<EvolutionRow> pc_evolution(
    const std::vector<std::pair<std::string, NodeSnapshot>>& snapshots,
    const PhysicalGraph& graph, const AsnGraph& asn_graph, const CurveConfig& config,
    const RelayTable* relays) {
  if (snapshots.empty()) throw InputError("pc evolution needs at least one snapshot");
  std::vector<EvolutionRow> rows;
  for (const auto& [label, snapshot] : snapshots) {
    EvolutionRow row;
    row.label = label;
    try {
      auto scope = cascade_scope(snapshot, config.cascade.scope_mode);
      row.nodes = static_cast<std::int64_t>(scope.size());
      row.countries = static_cast<std::int64_t>(scope.hosting.size());
      std::set<Asn> asns;
      for (const auto& n : scope.nodes) {
        if (n.asn) asns.insert(*n.asn);
      }
      row.asns = static_cast<std::int64_t>(asns.size());
      const auto curve = percolation_curve(config, graph, asn_graph, scope, relays);
      row.pc = estimate_pc(curve, config.disconnection_threshold, config.pc_statistic);
    } catch (const InputError& e) {
      row.error = e.what();
      row.pc.threshold = config.disconnection_threshold;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_pc(const PcEstimate& pc) {
  if (!pc.p_c) return "not_reached";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *pc.p_c);
  return buf;
}

}  // namespace subsea
