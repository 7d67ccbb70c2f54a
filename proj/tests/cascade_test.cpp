#include <gtest/gtest.h>

#include <algorithm>

#include "subsea/cascade.hpp"
#include "subsea/error.hpp"
#include "support/oracles.hpp"
#include "support/random_multiplex.hpp"

using namespace subsea;

namespace {

CountryId C(const char* s) { return CountryId::parse(s); }

void add_nodes(NodeSnapshot& s, const std::string& prefix, int count, Network net,
               const char* country, std::optional<Asn> asn) {
  for (int i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", i);
    P2PNode n;
    n.node_id = prefix + buf;
    n.network = net;
    if (country) n.country = C(country);
    n.asn = asn;
    s.nodes.push_back(std::move(n));
  }
}

struct PathCase {
  PhysicalGraph graph;
  AsnGraph asns;
  CascadeScope scope;

  PathCase() {
    std::vector<CableRecord> cables{{"1", "AA", "BB"}, {"2", "BB", "CC"}};
    graph = build_physical_graph(cables, {});
    asns.add_edge(1, 2);
    NodeSnapshot s;
    add_nodes(s, "a", 10, Network::clearnet, "AA", 1);
    add_nodes(s, "c", 10, Network::clearnet, "CC", 2);
    scope = cascade_scope(s, ScopeMode::clearnet_only);
  }

  CascadeOutcome run(std::vector<std::string> cut, CascadeConfig cfg = {}, std::uint64_t seed = 1) const {
    Rng rng(seed);
    return run_cascade(graph, asns, scope, nullptr, {std::move(cut), {}}, cfg, rng);
  }
};

// 40 clearnet nodes behind BB/CC, 60 tor nodes, all relay weight in AA.
struct RelayCase {
  PhysicalGraph graph;
  AsnGraph asns;
  NodeSnapshot snapshot;
  RelayTable relays{{{"r1", C("AA"), 9, 60.0}, {"r2", C("AA"), 9, 40.0}}};

  RelayCase() {
    std::vector<CableRecord> cables{{"1", "AA", "BB"}};
    std::vector<BorderRecord> borders{{"BB", "CC"}};
    graph = build_physical_graph(cables, borders);
    asns.add_edge(1, 2);
    asns.add_edge(2, 9);
    add_nodes(snapshot, "b", 20, Network::clearnet, "BB", 1);
    add_nodes(snapshot, "c", 20, Network::clearnet, "CC", 2);
    add_nodes(snapshot, "t", 60, Network::tor, nullptr, std::nullopt);
  }
};

std::size_t count_tor(const CascadeScope& s, const std::set<std::string>& ids) {
  std::size_t n = 0;
  for (const auto& node : s.nodes)
    if (node.network == Network::tor && ids.contains(node.node_id)) ++n;
  return n;
}

}  // namespace

TEST(Cascade, NothingRemoved) {
  PathCase c;
  const auto out = c.run({});
  EXPECT_EQ(out.disconnection_fraction, 0.0);
  EXPECT_EQ(out.surviving_nodes.size(), 20u);
  EXPECT_TRUE(out.disconnected_countries.empty());
  EXPECT_FALSE(out.tor_layer_failed);
  EXPECT_EQ(out.surviving_cw_fraction, 1.0);
}

TEST(Cascade, PathTieGoesToSmallestCountry) {
  PathCase c;
  const auto out = c.run({"sub:AA-BB", "sub:BB-CC"});
  EXPECT_EQ(out.disconnection_fraction, 0.5);
  EXPECT_EQ(out.surviving_countries, (std::set<CountryId>{C("AA")}));
  EXPECT_TRUE(out.disconnected_nodes.contains("c000"));
  EXPECT_EQ(disconnection_fraction(out), 0.5);
}

TEST(Cascade, OutcomePartitionsScope) {
  PathCase c;
  const auto out = c.run({"sub:BB-CC"});
  EXPECT_EQ(out.surviving_nodes.size() + out.disconnected_nodes.size(), c.scope.size());
  for (const auto& id : out.surviving_nodes) EXPECT_FALSE(out.disconnected_nodes.contains(id));
}

TEST(Cascade, RelayLossTakesDownTor) {
  RelayCase c;
  const auto scope = cascade_scope(c.snapshot, ScopeMode::tor_via_relays);
  CascadeConfig cfg;
  cfg.layers = LayerModel::four_layer;
  cfg.scope_mode = ScopeMode::tor_via_relays;
  Rng rng(1);
  const auto out = run_cascade(c.graph, c.asns, scope, &c.relays, {{"sub:AA-BB"}, {}}, cfg, rng);
  EXPECT_EQ(out.surviving_cw_fraction, 0.0);
  EXPECT_TRUE(out.tor_layer_failed);
  EXPECT_DOUBLE_EQ(out.disconnection_fraction, 0.6);
  EXPECT_EQ(count_tor(scope, out.disconnected_nodes), 60u);

  // Placed tor nodes fail the same way regardless of where they sit.
  TorPlacements placed;
  for (const auto& n : c.snapshot.nodes)
    if (n.network == Network::tor) placed[n.node_id] = {C("CC"), 2, false};
  const auto full = cascade_scope(c.snapshot, ScopeMode::full, &placed);
  cfg.scope_mode = ScopeMode::full;
  Rng rng2(1);
  const auto out2 = run_cascade(c.graph, c.asns, full, &c.relays, {{"sub:AA-BB"}, {}}, cfg, rng2);
  EXPECT_DOUBLE_EQ(out2.disconnection_fraction, 0.6);
}

TEST(Cascade, ThreeLayerIgnoresRelays) {
  RelayCase c;
  const auto scope = cascade_scope(c.snapshot, ScopeMode::tor_via_relays);
  Rng rng(1);
  const auto out = run_cascade(c.graph, c.asns, scope, &c.relays, {{"sub:AA-BB"}, {}}, {}, rng);
  EXPECT_FALSE(out.tor_layer_failed);
  EXPECT_EQ(out.surviving_cw_fraction, 1.0);
  EXPECT_EQ(out.disconnection_fraction, 0.0);
}

TEST(Cascade, FourLayerNeedsRelays) {
  PathCase c;
  CascadeConfig cfg;
  cfg.layers = LayerModel::four_layer;
  Rng rng(1);
  EXPECT_THROW(run_cascade(c.graph, c.asns, c.scope, nullptr, {}, cfg, rng), InputError);
  RelayTable empty({{"z", C("AA"), 1, 0.0}});
  EXPECT_THROW(run_cascade(c.graph, c.asns, c.scope, &empty, {}, cfg, rng), InputError);
}

TEST(Cascade, RejectsLandAndUnknownEdges) {
  RelayCase c;
  const auto scope = cascade_scope(c.snapshot, ScopeMode::clearnet_only);
  Rng rng(1);
  EXPECT_THROW(run_cascade(c.graph, c.asns, scope, nullptr, {{"land:BB-CC"}, {}}, {}, rng), InputError);
  EXPECT_THROW(run_cascade(c.graph, c.asns, scope, nullptr, {{"sub:XX-YY"}, {}}, {}, rng), InputError);
}

TEST(Cascade, ConfigValidation) {
  CascadeConfig cfg;
  cfg.node_failure_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg.node_failure_fraction = 1.0;
  cfg.cw_failure_threshold = 1.0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Cascade, AsnMissingFromRoutingGraphIsIsolated) {
  std::vector<BorderRecord> borders{{"AA", "BB"}};
  const auto g = build_physical_graph({}, borders);
  AsnGraph asns;
  asns.add_edge(1, 2);
  NodeSnapshot s;
  add_nodes(s, "x", 3, Network::clearnet, "AA", 1);
  add_nodes(s, "y", 3, Network::clearnet, "BB", 2);
  add_nodes(s, "z", 2, Network::clearnet, "BB", 77);
  const auto scope = cascade_scope(s, ScopeMode::clearnet_only);
  Rng rng(1);
  const auto out = run_cascade(g, asns, scope, nullptr, {}, {}, rng);
  EXPECT_EQ(out.failed_asns, (std::set<Asn>{77}));
  EXPECT_DOUBLE_EQ(out.disconnection_fraction, 2.0 / 8.0);
}

TEST(Cascade, AsnWinnerTieGoesToSmallestAsn) {
  std::vector<BorderRecord> borders{{"AA", "BB"}};
  const auto g = build_physical_graph({}, borders);
  AsnGraph asns;
  asns.add_vertex(5);
  asns.add_vertex(3);
  NodeSnapshot s;
  add_nodes(s, "x", 4, Network::clearnet, "AA", 5);
  add_nodes(s, "y", 4, Network::clearnet, "BB", 3);
  const auto scope = cascade_scope(s, ScopeMode::clearnet_only);
  Rng rng(1);
  const auto out = run_cascade(g, asns, scope, nullptr, {}, {}, rng);
  EXPECT_EQ(out.failed_asns, (std::set<Asn>{5}));
}

TEST(Cascade, DeletedAsnsFailTheirNodes) {
  PathCase c;
  Rng rng(1);
  const auto out = run_cascade(c.graph, c.asns, c.scope, nullptr, {{}, {2}}, {}, rng);
  EXPECT_DOUBLE_EQ(out.disconnection_fraction, 0.5);
  EXPECT_TRUE(out.failed_asns.contains(2));
}

TEST(Cascade, EmptyScopeIsZero) {
  PathCase c;
  Rng rng(1);
  const auto out = run_cascade(c.graph, c.asns, CascadeScope{}, nullptr, {{"sub:AA-BB"}, {}}, {}, rng);
  EXPECT_EQ(out.disconnection_fraction, 0.0);
}

TEST(CascadeOracle, RandomMultiplexesMatch) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto m = support::random_multiplex(rng, i % 2 == 1);
    Rng trial(static_cast<std::uint64_t>(i));
    const auto got = run_cascade(m.graph, m.asn_graph, m.scope, m.relays ? &*m.relays : nullptr,
                                 m.removal, m.config, trial);
    const auto want = support::oracle_cascade(m.oracle_input());
    ASSERT_EQ(got.disconnected_nodes, want.disconnected) << "case " << i;
    EXPECT_EQ(got.disconnected_countries, want.lost_countries) << "case " << i;
    EXPECT_EQ(got.tor_layer_failed, want.tor_failed) << "case " << i;
    EXPECT_DOUBLE_EQ(got.surviving_cw_fraction, want.surviving_cw_fraction) << "case " << i;
  }
}

// Stage 3 alone is monotone: the main component's hosting can only shrink as
// components refine. The full fraction is monotone while the stage-3
// survivors stay nested and, with relays, while the surviving countries
// shrink and the failed ASNs grow. A switch of main component can lower it.
TEST(CascadeProperty, MonotoneInRemovedSet) {
  Rng rng(31);
  int nested_steps = 0;
  for (int i = 0; i < 200; ++i) {
    auto m = support::random_multiplex(rng, i % 2 == 0);
    std::vector<std::string> all;
    for (auto idx : m.graph.submarine_edges()) all.push_back(m.graph.edges()[idx].id);
    rng.shuffle(std::span(all));
    double prev = -1.0, prev_geo = -1.0;
    std::set<std::string> prev_alive_geo;
    std::set<CountryId> prev_countries;
    std::set<Asn> prev_failed;
    bool first = true;
    for (std::size_t k = 0; k <= all.size(); ++k) {
      Removal r{{all.begin(), all.begin() + static_cast<long>(k)}, m.removal.asns};
      Rng trial(1);
      const auto out = run_cascade(m.graph, m.asn_graph, m.scope, m.relays ? &*m.relays : nullptr,
                                   r, m.config, trial);
      std::set<std::string> alive_geo;
      for (const auto& n : m.scope.nodes)
        if (!n.country || !out.disconnected_countries.contains(*n.country)) alive_geo.insert(n.node_id);
      const double geo = m.scope.size() ? 1.0 - static_cast<double>(alive_geo.size()) / m.scope.size() : 0.0;
      EXPECT_GE(geo, prev_geo) << "case " << i << " k " << k;
      auto within = [](const auto& big, const auto& small) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
      };
      bool nested = first || within(prev_alive_geo, alive_geo);
      if (m.config.layers == LayerModel::four_layer)
        nested = nested && (first || (within(prev_countries, out.surviving_countries) &&
                                      within(out.failed_asns, prev_failed)));
      if (nested) {
        EXPECT_GE(out.disconnection_fraction, prev) << "case " << i << " k " << k;
        ++nested_steps;
      }
      first = false;
      prev = out.disconnection_fraction;
      prev_geo = geo;
      prev_alive_geo = std::move(alive_geo);
      prev_countries = out.surviving_countries;
      prev_failed = out.failed_asns;
    }
  }
  EXPECT_GT(nested_steps, 500);
}

TEST(CascadeProperty, MainComponentSwitchCanLowerFraction) {
  // AA(5, AS5) - BB(3, AS10) - CC(3, AS20), no ASN links.
  std::vector<CableRecord> cables{{"1", "AA", "BB"}, {"2", "BB", "CC"}};
  const auto g = build_physical_graph(cables, {});
  AsnGraph asns;
  NodeSnapshot s;
  add_nodes(s, "a", 5, Network::clearnet, "AA", 5);
  add_nodes(s, "b", 3, Network::clearnet, "BB", 10);
  add_nodes(s, "c", 3, Network::clearnet, "CC", 20);
  const auto scope = cascade_scope(s, ScopeMode::clearnet_only);
  Rng rng(1);
  // {BB,CC} is main; AS10 beats AS20 on the tie, so CC's nodes fail too.
  const auto one = run_cascade(g, asns, scope, nullptr, {{"sub:AA-BB"}, {}}, {}, rng);
  EXPECT_DOUBLE_EQ(one.disconnection_fraction, 8.0 / 11.0);
  // AA alone is now main and all its nodes share one ASN.
  const auto two = run_cascade(g, asns, scope, nullptr, {{"sub:AA-BB", "sub:BB-CC"}, {}}, {}, rng);
  EXPECT_DOUBLE_EQ(two.disconnection_fraction, 6.0 / 11.0);
}

TEST(CascadeProperty, LaterStagesNeverResurrect) {
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const auto m = support::random_multiplex(rng, true);
    Rng t(1);
    const auto out = run_cascade(m.graph, m.asn_graph, m.scope, &*m.relays, m.removal, m.config, t);
    for (const auto& n : m.scope.nodes) {
      if (n.country && out.disconnected_countries.contains(*n.country)) {
        EXPECT_TRUE(out.disconnected_nodes.contains(n.node_id));
      }
      if (n.asn && out.failed_asns.contains(*n.asn)) {
        EXPECT_TRUE(out.disconnected_nodes.contains(n.node_id));
      }
    }
    // The four-layer run loses a superset of the three-layer run.
    auto cfg = m.config;
    cfg.layers = LayerModel::three_layer;
    Rng t2(1);
    const auto three = run_cascade(m.graph, m.asn_graph, m.scope, &*m.relays, m.removal, cfg, t2);
    for (const auto& id : three.disconnected_nodes) EXPECT_TRUE(out.disconnected_nodes.contains(id));
  }
}

TEST(CascadeProperty, RelaysInsideMainComponentChangeNothing) {
  Rng rng(33);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    const auto m = support::random_multiplex(rng, false);
    Rng t(1);
    const auto three = run_cascade(m.graph, m.asn_graph, m.scope, nullptr, m.removal, m.config, t);
    if (three.surviving_countries.empty()) continue;
    // Relays on a surviving country and a surviving ASN of the run.
    std::optional<Asn> good;
    for (const auto& n : m.scope.nodes)
      if (n.asn && three.surviving_nodes.contains(n.node_id)) good = n.asn;
    if (!good) continue;
    RelayTable relays({{"r", *three.surviving_countries.begin(), *good, 10.0}});
    auto cfg = m.config;
    cfg.layers = LayerModel::four_layer;
    Rng t2(1);
    const auto four = run_cascade(m.graph, m.asn_graph, m.scope, &relays, m.removal, cfg, t2);
    EXPECT_EQ(four.disconnected_nodes, three.disconnected_nodes);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(CascadeProperty, RelaxedNeverWorseOnAverage) {
  Rng rng(34);
  for (int i = 0; i < 30; ++i) {
    const auto m = support::random_multiplex(rng, false);
    double full = 0.0, relaxed = 0.0;
    auto half = m.config;
    half.node_failure_fraction = 0.5;
    for (int t = 0; t < 200; ++t) {
      Rng a(static_cast<std::uint64_t>(t)), b(static_cast<std::uint64_t>(t));
      full += run_cascade(m.graph, m.asn_graph, m.scope, nullptr, m.removal, m.config, a).disconnection_fraction;
      relaxed += run_cascade(m.graph, m.asn_graph, m.scope, nullptr, m.removal, half, b).disconnection_fraction;
    }
    EXPECT_LE(relaxed, full + 1e-9) << "case " << i;
  }
}

TEST(CascadeProperty, FixpointLosesAtLeastSinglePass) {
  Rng rng(35);
  for (int i = 0; i < 200; ++i) {
    const auto m = support::random_multiplex(rng, i % 2 == 0);
    auto fix = m.config;
    fix.iterate_to_fixpoint = true;
    Rng a(1), b(1);
    const auto* relays = m.relays ? &*m.relays : nullptr;
    const auto once = run_cascade(m.graph, m.asn_graph, m.scope, relays, m.removal, m.config, a);
    const auto iter = run_cascade(m.graph, m.asn_graph, m.scope, relays, m.removal, fix, b);
    EXPECT_GE(iter.disconnection_fraction, once.disconnection_fraction);
  }
}
