#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subsea/graph.hpp"
#include "subsea/ingest.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

enum class RelayPolicy : std::uint8_t {
  core3,   // consensus weight concentrated in DE, FR, NL
  leaf,    // every relay in the worst-case leaf country
  spread,  // split between two leaves and the core
};

std::string_view to_string(RelayPolicy p) noexcept;
std::optional<RelayPolicy> parse_relay_policy(std::string_view s) noexcept;

// Desk-scale synthetic inputs with a core-periphery cable topology.
struct FixtureSpec {
  std::string profile = "core-periphery-225";
  int countries = 225;
  int core_size = 20;
  int submarine_edges = 354;
  int land_edges = 325;

  // Periphery degree profile, as shares of the periphery.
  double attached_share = 0.12;  // land-attached to the core block
  double region_share = 0.61;    // land regions reached by 3 to 7 cables
  double leaf_share = 0.40;      // of the remaining islands: single-cable leaves

  int clearnet_nodes = 7500;
  double core_node_share = 0.80;
  double tor_share = 0.64;         // of all nodes in the headline snapshot
  double other_share = 0.005;      // I2P/CJDNS
  double unlocated_share = 0.003;  // clearnet rows without ASN or country

  RelayPolicy relay_policy = RelayPolicy::core3;
  int relays = 600;

  int events = 68;
  int series_nodes = 2000;
  int series_step_days = 4;

  std::uint64_t seed = 7;

  // "core-periphery-225" or "minimal" (2 countries, 1 cable). Throws InputError.
  static FixtureSpec named(std::string_view profile);
  void validate() const;
};

struct FixtureBundle {
  FixtureSpec spec;
  std::vector<CountryId> core;
  std::vector<CableRecord> cables;
  std::vector<BorderRecord> borders;
  AsnGraph asn_graph;
  NodeSnapshot snapshot;               // headline snapshot
  std::vector<NodeSnapshot> evolution; // yearly snapshots, last equals `snapshot`
  std::vector<NodeSnapshot> series;    // clearnet crawl series for event matching
  RelayTable relays;
  std::vector<CableEvent> events;
  std::vector<PricePoint> price;
  CountryId worst_case_country;
};

// Deterministic in spec (including seed). Throws InputError when the
// requested edge counts cannot be met by the topology.
FixtureBundle generate_fixture(const FixtureSpec& spec);

// File names inside a bundle directory.
namespace fixture_files {
inline constexpr const char* cables = "cables.csv";
inline constexpr const char* borders = "borders.csv";
inline constexpr const char* asn_graph = "as-rel.txt";
inline constexpr const char* snapshot = "snapshot.csv";
inline constexpr const char* evolution = "evolution.csv";
inline constexpr const char* series = "series.csv";
inline constexpr const char* relays = "relays.json";
inline constexpr const char* events = "events.csv";
inline constexpr const char* price = "price.csv";
inline constexpr const char* summary = "fixture.json";
}  // namespace fixture_files

// Writes every bundle file into `dir` (created if needed) and returns the
// paths written, in a fixed order.
std::vector<std::filesystem::path> write_fixture(const FixtureBundle& bundle,
                                                 const std::filesystem::path& dir);

}  // namespace subsea
