#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "subsea/graph.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

// Rows that failed validation are skipped and described here; structural
// problems throw ParseError instead.
struct ParseReport {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;

  void warn(std::size_t line, std::string message);
};

template <typename T>
struct Parsed {
  T value;
  ParseReport report;
};

struct CableEvent {
  std::string event_id;
  Timestamp date{};
  std::vector<std::string> cable_ids;
  std::vector<CountryId> countries;

  bool operator==(const CableEvent&) const = default;
};

struct PricePoint {
  Timestamp date{};
  double close = 0.0;

  bool operator==(const PricePoint&) const = default;
};

// "YYYY-MM-DD" (midnight UTC) or "YYYY-MM-DDTHH:MM:SSZ". Throws ParseError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);  // always the long form
std::string format_date(Timestamp t);       // "YYYY-MM-DD"

// CAIDA serial-1 `asn1|asn2|rel` (a trailing serial-2 source column is
// tolerated). Only rel -1 and 0 become edges.
Parsed<AsnGraph> parse_caida(std::istream& in);
Parsed<std::vector<CableRecord>> parse_cables(std::istream& in);
Parsed<std::vector<BorderRecord>> parse_borders(std::istream& in);
// Rows grouped into one snapshot per distinct timestamp, ascending.
Parsed<std::vector<NodeSnapshot>> parse_snapshots(std::istream& in);
Parsed<RelayTable> parse_relays(std::istream& in);
Parsed<std::vector<CableEvent>> parse_events(std::istream& in);
// Sorted by date.
Parsed<std::vector<PricePoint>> parse_price(std::istream& in);

void write_caida(std::ostream& out, const AsnGraph& graph);
void write_cables(std::ostream& out, std::span<const CableRecord> cables);
void write_borders(std::ostream& out, std::span<const BorderRecord> borders);
void write_snapshots(std::ostream& out, std::span<const NodeSnapshot> snapshots);
void write_relays(std::ostream& out, const RelayTable& relays);
void write_events(std::ostream& out, std::span<const CableEvent> events);
void write_price(std::ostream& out, std::span<const PricePoint> prices);

// Splits one CSV line; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

}  // namespace subsea
