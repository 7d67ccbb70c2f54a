#include <gtest/gtest.h>

#include <sstream>

#include "subsea/error.hpp"
#include "subsea/ingest.hpp"
#include "subsea/rng.hpp"

using namespace subsea;

namespace {

template <typename Fn>
auto parse(Fn fn, const std::string& text) {
  std::istringstream in(text);
  return fn(in);
}

template <typename Fn>
std::string parse_error(Fn fn, const std::string& text) {
  try {
    parse(fn, text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

Timestamp day(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / d};
}

}  // namespace

TEST(Caida, CommentsAndEdges) {
  const auto p = parse(parse_caida, "# comment\n1|2|0\n2|3|-1\n");
  EXPECT_EQ(p.value.vertex_count(), 3u);
  EXPECT_EQ(p.value.edges(), (std::set<std::pair<Asn, Asn>>{{1, 2}, {2, 3}}));
}

TEST(Caida, DuplicateDirectionsMerge) {
  const auto p = parse(parse_caida, "1|2|0\n2|1|-1\n");
  EXPECT_EQ(p.value.edge_count(), 1u);
}

TEST(Caida, EmptyInputWarns) {
  const auto p = parse(parse_caida, "");
  EXPECT_EQ(p.value.vertex_count(), 0u);
  EXPECT_FALSE(p.report.warnings.empty());
}

TEST(Caida, SerialTwoSourceColumnAndOtherRelations) {
  const auto p = parse(parse_caida, "1|2|0|bgp\n3|4|2\n5|5|0\n");
  EXPECT_EQ(p.value.edge_count(), 1u);
  EXPECT_EQ(p.report.skipped, 2u);
}

TEST(Caida, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error(parse_caida, "1|2|0\nx|2|0\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error(parse_caida, "# c\n1|2\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error(parse_caida, "1|2|zero\n").find("line 1"), std::string::npos);
}

TEST(Timestamps, ShortAndLongForms) {
  EXPECT_EQ(parse_timestamp("2024-01-01"), day(2024, 1, 1));
  EXPECT_EQ(parse_timestamp("2024-01-01T00:00:00Z"), day(2024, 1, 1));
  EXPECT_EQ(format_timestamp(parse_timestamp("2024-02-29T13:05:09Z")), "2024-02-29T13:05:09Z");
  EXPECT_EQ(format_date(parse_timestamp("2024-02-29T13:05:09Z")), "2024-02-29");
  EXPECT_THROW(parse_timestamp("2023-02-29"), ParseError);
  EXPECT_THROW(parse_timestamp("2024-13-01"), ParseError);
  EXPECT_THROW(parse_timestamp("yesterday"), ParseError);
  EXPECT_THROW(parse_timestamp("2024-01-01T25:00:00Z"), ParseError);
}

TEST(Cables, HeaderAndRows) {
  const auto p = parse(parse_cables, "cable_id,country_a,country_b\nc1,DE,US\nc2,FR,FR\n");
  ASSERT_EQ(p.value.size(), 1u);
  EXPECT_EQ(p.value[0].cable_id, "c1");
  EXPECT_EQ(p.report.skipped, 1u);
  EXPECT_NE(parse_error(parse_cables, "id,a,b\nc1,DE,US\n").find("header"), std::string::npos);
  EXPECT_NE(parse_error(parse_cables, "cable_id,country_a,country_b\nc1,DE,usa\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(parse_error(parse_cables, "cable_id,country_a,country_b\nc1,DE\n").find("line 2"),
            std::string::npos);
}

TEST(Cables, QuotedFieldsAndBom) {
  const auto p = parse(parse_cables, "\xEF\xBB\xBF" "cable_id,country_a,country_b\r\n\"SEA-ME-WE, 5\",SG,FR\r\n");
  ASSERT_EQ(p.value.size(), 1u);
  EXPECT_EQ(p.value[0].cable_id, "SEA-ME-WE, 5");
}

TEST(Borders, Rows) {
  const auto p = parse(parse_borders, "country_a,country_b\nDE,FR\nDE,DE\n");
  EXPECT_EQ(p.value.size(), 1u);
  EXPECT_EQ(p.report.skipped, 1u);
}

TEST(Snapshots, InScopeRow) {
  const auto p = parse(parse_snapshots, "timestamp,node_id,network,asn,country\n"
                                        "2024-01-01T00:00:00Z,n1,clearnet,24940,DE\n");
  ASSERT_EQ(p.value.size(), 1u);
  const auto& n = p.value[0].nodes.at(0);
  EXPECT_EQ(n.network, Network::clearnet);
  EXPECT_EQ(*n.asn, 24940u);
  EXPECT_EQ(n.country->str(), "DE");
  EXPECT_EQ(cascade_scope(p.value[0], ScopeMode::clearnet_only).size(), 1u);
}

TEST(Snapshots, TolerantRows) {
  const auto p = parse(parse_snapshots,
                       "timestamp,node_id,network,asn,country\n"
                       "2024-01-02,a,clearnet,,DE\n"
                       "2024-01-02,b,tor,,\n"
                       "2024-01-02,b,tor,,\n"
                       "2024-01-02,c,i2p,,\n"
                       "2024-01-01,d,clearnet,AS3320,de\n"
                       "2024-01-01,e,other,,\n");
  ASSERT_EQ(p.value.size(), 2u);
  EXPECT_EQ(p.value[0].timestamp, day(2024, 1, 1));
  EXPECT_EQ(p.value[0].nodes.size(), 2u);
  EXPECT_EQ(*p.value[0].nodes[0].asn, 3320u);
  EXPECT_FALSE(p.value[0].nodes[0].country);
  EXPECT_EQ(p.value[1].nodes.size(), 2u);
  EXPECT_EQ(p.report.skipped, 2u);
  EXPECT_GE(p.report.warnings.size(), 4u);
}

TEST(Snapshots, MalformedDateNamesLine) {
  EXPECT_NE(parse_error(parse_snapshots, "timestamp,node_id,network,asn,country\n"
                                         "2024-01-01,a,tor,,\n2024-1-x,b,tor,,\n")
                .find("line 3"),
            std::string::npos);
}

TEST(Relays, ParsesAndValidates) {
  const auto p = parse(parse_relays, R"([
    {"fingerprint": "AA", "country": "de", "asn": 24940, "consensus_weight": 100},
    {"fingerprint": "BB", "country": "FR", "asn": "AS16276", "consensus_weight": 0},
    {"fingerprint": "CC", "country": "XYZ", "asn": 1, "consensus_weight": 5}
  ])");
  ASSERT_EQ(p.value.relays().size(), 2u);
  EXPECT_EQ(p.value.total_cw(), 100.0);
  EXPECT_EQ(p.value.relays()[0].country.str(), "DE");
  EXPECT_EQ(p.value.relays()[1].asn, 16276u);
  EXPECT_EQ(p.report.skipped, 1u);
  EXPECT_THROW(parse(parse_relays, R"([{"fingerprint":"A","country":"DE","asn":1,"consensus_weight":-1}])"),
               ParseError);
  EXPECT_THROW(parse(parse_relays, R"({"fingerprint":"A"})"), ParseError);
  EXPECT_THROW(parse(parse_relays, R"([{"fingerprint":"A","country":"DE"}])"), ParseError);
  EXPECT_THROW(parse(parse_relays, "[{"), ParseError);
}

TEST(Events, ListsAndUnknownCountries) {
  const auto p = parse(parse_events, "event_id,date,cable_ids,countries\n"
                                     "EV-1,2024-03-14,WACS;MainOne,NG;ZA;zz9\n"
                                     "EV-2,2024-05-01,,\n");
  ASSERT_EQ(p.value.size(), 2u);
  EXPECT_EQ(p.value[0].cable_ids, (std::vector<std::string>{"WACS", "MainOne"}));
  EXPECT_EQ(p.value[0].countries.size(), 2u);
  EXPECT_FALSE(p.report.warnings.empty());
  EXPECT_TRUE(p.value[1].cable_ids.empty());
}

TEST(Price, SortedAndValidated) {
  const auto p = parse(parse_price, "date,close\n2024-01-02,101.5\n2024-01-01,100\n2024-01-03,0\n");
  ASSERT_EQ(p.value.size(), 2u);
  EXPECT_EQ(p.value[0].date, day(2024, 1, 1));
  EXPECT_EQ(p.report.skipped, 1u);
  EXPECT_NE(parse_error(parse_price, "date,close\n2024-01-01,abc\n").find("line 2"), std::string::npos);
}

TEST(Garbage, ValidHeaderGarbageBodyFailsWithLine) {
  const std::string junk = "\x01\x02,,,;;||\"\"\"\n";
  EXPECT_NE(parse_error(parse_cables, "cable_id,country_a,country_b\n" + junk).find("line"), std::string::npos);
  EXPECT_NE(parse_error(parse_borders, "country_a,country_b\n" + junk).find("line"), std::string::npos);
  EXPECT_NE(parse_error(parse_snapshots, "timestamp,node_id,network,asn,country\n" + junk).find("line"),
            std::string::npos);
  EXPECT_NE(parse_error(parse_events, "event_id,date,cable_ids,countries\n" + junk).find("line"),
            std::string::npos);
  EXPECT_NE(parse_error(parse_price, "date,close\n" + junk).find("line"), std::string::npos);
  EXPECT_NE(parse_error(parse_caida, junk).find("line"), std::string::npos);
}

// Round trips on randomised records.
class RoundTrip : public ::testing::Test {
 protected:
  Rng rng{71};
  std::string pick(std::initializer_list<const char*> xs) {
    return *(xs.begin() + rng.below(xs.size()));
  }
  std::string code() { return pick({"DE", "FR", "US", "TO", "NL", "BR"}); }
};

TEST_F(RoundTrip, Caida) {
  AsnGraph g;
  for (int i = 0; i < 40; ++i) g.add_edge(static_cast<Asn>(rng.below(30)), static_cast<Asn>(rng.below(30)));
  std::ostringstream out;
  write_caida(out, g);
  auto back = parse(parse_caida, out.str()).value;
  // Isolated vertices have no line in the relationship format.
  AsnGraph edges_only;
  for (const auto& [a, b] : g.edges()) edges_only.add_edge(a, b);
  EXPECT_EQ(back, edges_only);
}

TEST_F(RoundTrip, CablesAndBorders) {
  std::vector<CableRecord> cables;
  std::vector<BorderRecord> borders;
  for (int i = 0; i < 30; ++i) {
    auto a = code(), b = code();
    if (a == b) continue;
    cables.push_back({pick({"c", "x,y", "q\"t"}) + std::to_string(i), a, b});
    borders.push_back({b, a});
  }
  std::ostringstream oc, ob;
  write_cables(oc, cables);
  write_borders(ob, borders);
  const auto c2 = parse(parse_cables, oc.str()).value;
  const auto b2 = parse(parse_borders, ob.str()).value;
  ASSERT_EQ(c2.size(), cables.size());
  for (std::size_t i = 0; i < cables.size(); ++i) {
    EXPECT_EQ(c2[i].cable_id, cables[i].cable_id);
    EXPECT_EQ(c2[i].country_a, cables[i].country_a);
    EXPECT_EQ(c2[i].country_b, cables[i].country_b);
    EXPECT_EQ(b2[i].country_a, borders[i].country_a);
  }
}

TEST_F(RoundTrip, Snapshots) {
  std::vector<NodeSnapshot> snaps(3);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    snaps[s].timestamp = day(2024, 1, 1) + std::chrono::hours(30 * s) + std::chrono::seconds(7 * s);
    for (int i = 0; i < 25; ++i) {
      P2PNode n;
      n.node_id = "n" + std::to_string(i);
      n.network = static_cast<Network>(rng.below(3));
      if (rng.below(4)) n.country = CountryId::parse(code());
      if (rng.below(4)) n.asn = static_cast<Asn>(rng.below(400000));
      snaps[s].nodes.push_back(n);
    }
  }
  std::ostringstream out;
  write_snapshots(out, snaps);
  EXPECT_EQ(parse(parse_snapshots, out.str()).value, snaps);
}

TEST_F(RoundTrip, Relays) {
  std::vector<TorRelay> relays;
  for (int i = 0; i < 20; ++i) {
    const double w = rng.below(2) ? static_cast<double>(rng.below(1000000)) : rng.uniform() * 50;
    relays.push_back({"FP" + std::to_string(i), CountryId::parse(code()), static_cast<Asn>(rng.below(70000)), w});
  }
  const RelayTable t(relays);
  std::ostringstream out;
  write_relays(out, t);
  const auto back = parse(parse_relays, out.str()).value;
  EXPECT_EQ(back, t);
  EXPECT_EQ(back.total_cw(), t.total_cw());
}

TEST_F(RoundTrip, EventsAndPrice) {
  std::vector<CableEvent> events;
  std::vector<PricePoint> prices;
  for (int i = 0; i < 20; ++i) {
    CableEvent e;
    e.event_id = "EV-" + std::to_string(i);
    e.date = day(2024, 6, 1) + std::chrono::days(i * 3) + std::chrono::hours(i % 2 ? 0 : 5);
    for (std::uint64_t k = 0, n = rng.below(3); k < n; ++k) e.cable_ids.push_back("C" + std::to_string(rng.below(99)));
    for (std::uint64_t k = 0, n = rng.below(3); k < n; ++k) e.countries.push_back(CountryId::parse(code()));
    events.push_back(e);
    prices.push_back({day(2024, 6, 1) + std::chrono::days(i), 60000.0 + rng.uniform() * 1000});
  }
  std::ostringstream oe, op;
  write_events(oe, events);
  write_price(op, prices);
  EXPECT_EQ(parse(parse_events, oe.str()).value, events);
  EXPECT_EQ(parse(parse_price, op.str()).value, prices);
}
