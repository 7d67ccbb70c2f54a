#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "subsea/error.hpp"
#include "subsea/fixture.hpp"
#include "subsea/montecarlo.hpp"
#include "subsea/validation.hpp"

using namespace subsea;
namespace fs = std::filesystem;

namespace {

const FixtureBundle& standard() {
  static const FixtureBundle b = generate_fixture(FixtureSpec{});
  return b;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("subsea_fixture_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Fixture, DocumentedCounts) {
  const auto& b = standard();
  const auto g = build_physical_graph(b.cables, b.borders);
  EXPECT_EQ(g.country_count(), 225u);
  EXPECT_EQ(g.submarine_count(), 354u);
  EXPECT_EQ(g.edge_count() - g.submarine_count(), 325u);
  EXPECT_EQ(b.core.size(), 20u);
  EXPECT_GT(b.cables.size(), g.submarine_count());
  EXPECT_EQ(b.events.size(), 68u);
  EXPECT_EQ(b.relays.relays().size(), 600u);
}

TEST(Fixture, HeadlineComposition) {
  const auto& b = standard();
  const auto c = composition_stats(b.snapshot);
  EXPECT_NEAR(c.tor_share, 0.64, 0.005);
  EXPECT_GT(c.other, 0);
  const auto scope = cascade_scope(b.snapshot, ScopeMode::clearnet_only);
  EXPECT_LT(static_cast<std::int64_t>(scope.size()), c.clearnet);
  // Every country hosts clearnet nodes.
  EXPECT_EQ(scope.hosting.size(), 225u);
  EXPECT_EQ(b.evolution.back(), b.snapshot);
}

TEST(Fixture, CoreHoldsMostNodesAndRelayWeight) {
  const auto& b = standard();
  const auto scope = cascade_scope(b.snapshot, ScopeMode::clearnet_only);
  std::int64_t core_nodes = 0;
  for (const auto& c : b.core) core_nodes += scope.hosting.at(c);
  EXPECT_GT(core_nodes, static_cast<std::int64_t>(scope.size()) / 2);

  std::map<CountryId, double> cw;
  for (const auto& r : b.relays.relays()) cw[r.country] += r.consensus_weight;
  const double top3 = cw[CountryId::parse("DE")] + cw[CountryId::parse("FR")] + cw[CountryId::parse("NL")];
  EXPECT_GT(top3 / b.relays.total_cw(), 0.5);
}

TEST(Fixture, WorstCaseCountryHasOneCable) {
  const auto& b = standard();
  const auto g = build_physical_graph(b.cables, b.borders);
  const auto deg = submarine_degree(g);
  EXPECT_EQ(deg[*g.country_index(b.worst_case_country)], 1);
}

TEST(Fixture, TopAsnsHoldHalfTheNodes) {
  const auto m = concentration_metrics(standard().snapshot);
  EXPECT_GE(m.top5_share, 0.5);
}

TEST(Fixture, SameSeedSameFiles) {
  const auto a = scratch("a"), b = scratch("b");
  const auto pa = write_fixture(generate_fixture(FixtureSpec{}), a);
  const auto pb = write_fixture(generate_fixture(FixtureSpec{}), b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].filename(), pb[i].filename());
    EXPECT_EQ(slurp(pa[i]), slurp(pb[i])) << pa[i];
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Fixture, SeedChangesOutput) {
  FixtureSpec s;
  s.seed = 8;
  const auto other = generate_fixture(s);
  EXPECT_NE(other.snapshot, standard().snapshot);
}

TEST(Fixture, WrittenFilesParseBack) {
  const auto dir = scratch("parse");
  const auto& b = standard();
  write_fixture(b, dir);
  std::ifstream cables(dir / fixture_files::cables), borders(dir / fixture_files::borders),
      asrel(dir / fixture_files::asn_graph), snap(dir / fixture_files::snapshot),
      relays(dir / fixture_files::relays), events(dir / fixture_files::events),
      price(dir / fixture_files::price), evo(dir / fixture_files::evolution),
      series(dir / fixture_files::series);
  EXPECT_EQ(parse_cables(cables).value.size(), b.cables.size());
  EXPECT_EQ(parse_borders(borders).value.size(), b.borders.size());
  EXPECT_EQ(parse_caida(asrel).value.edge_count(), b.asn_graph.edge_count());
  const auto snaps = parse_snapshots(snap).value;
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0], b.snapshot);
  EXPECT_EQ(parse_relays(relays).value, b.relays);
  EXPECT_EQ(parse_events(events).value, b.events);
  EXPECT_EQ(parse_price(price).value, b.price);
  EXPECT_EQ(parse_snapshots(evo).value, b.evolution);
  EXPECT_EQ(parse_snapshots(series).value.size(), b.series.size());
  EXPECT_TRUE(fs::exists(dir / fixture_files::summary));
  fs::remove_all(dir);
}

TEST(Fixture, MinimalProfile) {
  const auto b = generate_fixture(FixtureSpec::named("minimal"));
  const auto g = build_physical_graph(b.cables, b.borders);
  EXPECT_EQ(g.country_count(), 2u);
  EXPECT_EQ(g.submarine_count(), 1u);
  EXPECT_EQ(g.edge_count(), 1u);
  const auto scope = cascade_scope(b.snapshot, ScopeMode::clearnet_only);
  EXPECT_GT(scope.size(), 0u);
  CurveConfig cfg;
  cfg.p_grid = {0.0, 1.0};
  cfg.trials = 5;
  const auto curve = percolation_curve(cfg, g, b.asn_graph, scope);
  EXPECT_EQ(curve.points[0].mean, 0.0);
  EXPECT_GT(curve.points[1].mean, 0.0);
}

TEST(Fixture, Validation) {
  EXPECT_THROW(FixtureSpec::named("nope"), InputError);
  FixtureSpec s;
  s.tor_share = 1.2;
  EXPECT_THROW(s.validate(), InputError);
  s = FixtureSpec{};
  s.land_edges = 2000;
  EXPECT_THROW(generate_fixture(s), InputError);
}

TEST(Fixture, RelayPolicies) {
  EXPECT_EQ(parse_relay_policy("leaf"), RelayPolicy::leaf);
  EXPECT_FALSE(parse_relay_policy("everywhere"));
  FixtureSpec s;
  s.relay_policy = RelayPolicy::leaf;
  const auto b = generate_fixture(s);
  for (const auto& r : b.relays.relays()) EXPECT_EQ(r.country, b.worst_case_country);
}
