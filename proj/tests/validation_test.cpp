#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "subsea/error.hpp"
#include "subsea/rng.hpp"
#include "subsea/validation.hpp"

using namespace subsea;

namespace {

Timestamp day(int d) {
  using namespace std::chrono;
  return sys_days{year{2024} / 1 / 1} + days{d};
}

NodeSnapshot crawl(int d, int de, int fr) {
  NodeSnapshot s;
  s.timestamp = day(d);
  for (int i = 0; i < de + fr; ++i) {
    P2PNode n;
    n.node_id = "n" + std::to_string(i);
    n.country = CountryId::parse(i < de ? "DE" : "FR");
    n.asn = 1;
    s.nodes.push_back(n);
  }
  return s;
}

CableEvent event(const std::string& id, int d, std::vector<const char*> countries = {}) {
  CableEvent e;
  e.event_id = id;
  e.date = day(d);
  for (auto c : countries) e.countries.push_back(CountryId::parse(c));
  return e;
}

}  // namespace

TEST(Match, WindowExamples) {
  std::vector<NodeSnapshot> snaps{crawl(5, 50, 50), crawl(12, 40, 50)};
  std::vector<CableEvent> events{event("e", 10, {"DE"})};
  const auto seven = match_events(events, snaps, 7);
  ASSERT_EQ(seven.matched.size(), 1u);
  EXPECT_EQ(seven.matched[0].before, day(5));
  EXPECT_EQ(seven.matched[0].after, day(12));
  EXPECT_DOUBLE_EQ(*seven.matched[0].global_impact, -0.1);
  EXPECT_DOUBLE_EQ(*seven.matched[0].regional_impact, -0.2);
  const auto three = match_events(events, snaps, 3);
  EXPECT_TRUE(three.matched.empty());
  EXPECT_EQ(three.unmatched, 1u);
  EXPECT_THROW(match_events(events, snaps, 0), InputError);
}

TEST(Match, SameDaySnapshotIsBeforeNotAfter) {
  std::vector<NodeSnapshot> snaps{crawl(10, 10, 0), crawl(11, 9, 0)};
  std::vector<CableEvent> events{event("e", 10)};
  const auto r = match_events(events, snaps, 7);
  ASSERT_EQ(r.matched.size(), 1u);
  EXPECT_EQ(r.matched[0].before, day(10));
  EXPECT_EQ(r.matched[0].after, day(11));
}

TEST(Match, UndefinedImpactWhenNoBaseline) {
  std::vector<NodeSnapshot> snaps{crawl(1, 10, 0), crawl(3, 12, 0)};
  std::vector<CableEvent> events{event("e", 2, {"FR"})};
  const auto r = match_events(events, snaps, 7);
  ASSERT_EQ(r.matched.size(), 1u);
  EXPECT_FALSE(r.matched[0].regional_impact);
  EXPECT_TRUE(r.matched[0].global_impact);
}

TEST(Match, UnknownCablesWarn) {
  std::vector<CableRecord> cables{{"WACS", "NG", "ZA"}};
  const auto g = build_physical_graph(cables, {});
  std::vector<NodeSnapshot> snaps{crawl(1, 10, 0), crawl(3, 12, 0)};
  auto e = event("e", 2);
  e.cable_ids = {"WACS", "GHOST"};
  std::vector<CableEvent> events{e};
  const auto r = match_events(events, snaps, 7, &g);
  EXPECT_EQ(r.matched.size(), 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("GHOST"), std::string::npos);
}

TEST(Match, WindowContainment) {
  Rng rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<NodeSnapshot> snaps;
    for (int d = 0; d < 90; d += 1 + static_cast<int>(rng.below(9)))
      snaps.push_back(crawl(d, 10 + static_cast<int>(rng.below(20)), 5));
    std::vector<CableEvent> events;
    for (int i = 0; i < 15; ++i) events.push_back(event("e" + std::to_string(i), static_cast<int>(rng.below(90))));
    std::map<std::string, std::pair<Timestamp, Timestamp>> first;
    std::size_t last = 0;
    for (int w : {3, 7, 14}) {
      const auto r = match_events(events, snaps, w);
      EXPECT_GE(r.matched.size(), last);
      last = r.matched.size();
      for (const auto& m : r.matched) {
        auto [it, fresh] = first.try_emplace(m.event.event_id, m.before, m.after);
        if (!fresh) {
          EXPECT_EQ(it->second.first, m.before);
          EXPECT_EQ(it->second.second, m.after);
        }
        EXPECT_LE(m.event.date - m.before, std::chrono::days{w});
        EXPECT_LE(m.after - m.event.date, std::chrono::days{w});
      }
    }
  }
}

TEST(Impact, ArithmeticExamples) {
  const std::vector<double> xs{-0.01, -0.004, -0.30};
  const auto s = impact_stats(xs);
  EXPECT_DOUBLE_EQ(s.share_below_5pct, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.median, -0.01);
  EXPECT_DOUBLE_EQ(s.min, -0.30);
  EXPECT_DOUBLE_EQ(s.max, -0.004);
  const std::vector<double> one{-0.025};
  const auto t = impact_stats(one);
  EXPECT_EQ(t.share_below_5pct, 1.0);
  EXPECT_DOUBLE_EQ(t.mean, -0.025);
  EXPECT_DOUBLE_EQ(t.median, -0.025);
  EXPECT_THROW(impact_stats(std::vector<double>{}), InputError);
  EXPECT_THROW(impact_stats(std::vector<MatchedEvent>{}), InputError);
}

TEST(Correlation, PerfectLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 0.3);
    y.push_back(2 * x.back() + 1);
  }
  const auto s = pearson(x, y);
  EXPECT_NEAR(s.r, 1.0, 1e-12);
  EXPECT_LE(s.ci_low, s.r);
  EXPECT_GE(s.ci_high, s.r - 1e-12);
}

TEST(Correlation, Errors) {
  const std::vector<double> x{1, 2, 3, 4, 5}, flat{2, 2, 2, 2, 2}, shorter{1, 2, 3, 4};
  EXPECT_THROW(pearson(x, flat), InputError);
  EXPECT_THROW(pearson(x, shorter), InputError);
  const std::vector<double> three{1, 2, 3};
  EXPECT_THROW(pearson(three, three), InputError);
}

TEST(Correlation, FisherExample) {
  const auto s = correlation_stats(-0.02, 68);
  const double half = 1.96 / std::sqrt(65.0);
  EXPECT_NEAR(half, 0.2431, 1e-4);
  EXPECT_NEAR(std::atanh(s.ci_high) - std::atanh(s.r), half, 1e-12);
  EXPECT_NEAR(s.ci_low, -0.257, 1e-3);
  EXPECT_NEAR(s.ci_high, 0.219, 1e-3);
  EXPECT_NEAR(s.p_value, 0.8715, 1e-3);
}

TEST(Correlation, Bounds) {
  Rng rng(82);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x, y;
    const int n = 4 + static_cast<int>(rng.below(60));
    for (int k = 0; k < n; ++k) {
      x.push_back(rng.uniform());
      y.push_back(rng.uniform() + (i % 3) * x.back());
    }
    const auto s = pearson(x, y);
    EXPECT_GE(s.r, -1.0);
    EXPECT_LE(s.r, 1.0);
    EXPECT_GE(s.p_value, 0.0);
    EXPECT_LE(s.p_value, 1.0);
    EXPECT_LE(s.ci_low, s.r);
    EXPECT_GE(s.ci_high, s.r);
  }
}

TEST(Correlation, PriceHorizon) {
  std::vector<PricePoint> prices;
  for (int d = 0; d < 40; ++d) prices.push_back({day(d), 100.0 + d * d});
  std::vector<MatchedEvent> matched;
  for (int d = 1; d < 30; d += 4) {
    MatchedEvent m;
    m.event = event("e" + std::to_string(d), d);
    m.global_impact = -0.001 * d;
    matched.push_back(m);
  }
  MatchedEvent late;
  late.event = event("late", 39);
  late.global_impact = 0.0;
  matched.push_back(late);
  const auto r = price_correlation(matched, prices, 1);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.stats.n, matched.size() - 1);
  EXPECT_LT(r.stats.r, 0.0);
  EXPECT_THROW(price_correlation(matched, prices, 0), InputError);
  EXPECT_THROW(price_correlation(std::span(matched).first(3), prices, 1), InputError);
}

TEST(Concentration, HhiExamples) {
  EXPECT_EQ(concentration_from_counts({{"AS1", 7}}).hhi, 10000.0);
  EXPECT_EQ(concentration_from_counts({{"AS1", 7}}).top5_share, 1.0);
  std::map<std::string, std::int64_t> ten;
  for (int i = 0; i < 10; ++i) ten["AS" + std::to_string(i)] = 3;
  EXPECT_NEAR(concentration_from_counts(ten).hhi, 1000.0, 1e-9);
  EXPECT_NEAR(concentration_from_counts(ten).top5_share, 0.5, 1e-12);
  const auto two = concentration_from_counts({{"AS1", 60}, {"AS2", 40}});
  EXPECT_NEAR(two.hhi, 5200.0, 1e-9);
  EXPECT_EQ(two.shares.front().first, "AS1");
  auto with_zero = concentration_from_counts({{"AS1", 60}, {"AS2", 40}, {"AS3", 0}});
  EXPECT_EQ(with_zero.hhi, two.hhi);
  EXPECT_THROW(concentration_from_counts({}), InputError);
}

TEST(Concentration, TorBucket) {
  auto s = crawl(0, 3, 1);
  P2PNode t;
  t.node_id = "t";
  t.network = Network::tor;
  s.nodes.push_back(t);
  EXPECT_EQ(concentration_metrics(s).hhi, 10000.0);
  const auto with = concentration_metrics(s, true);
  EXPECT_EQ(with.total, 5);
  EXPECT_NEAR(with.hhi, 80.0 * 80.0 + 20.0 * 20.0, 1e-9);
}

TEST(Report, MatchedCsv) {
  std::vector<NodeSnapshot> snaps{crawl(5, 50, 50), crawl(12, 40, 50)};
  std::vector<CableEvent> events{event("e,1", 10, {"JP"})};
  const auto r = match_events(events, snaps, 7);
  std::ostringstream out;
  write_matched_csv(out, r.matched);
  EXPECT_EQ(out.str(),
            "event_id,date,before_count,after_count,global_impact,regional_impact\n"
            "\"e,1\",2024-01-11,100,90,-0.100000,\n");
}
