#include "subsea/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include "json.hpp"
#include <set>

#include "subsea/error.hpp"

namespace subsea {

void ParseReport::warn(std::size_t line, std::string message) {
  warnings.push_back("line " + std::to_string(line) + ": " + std::move(message));
}

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// ASN written as "24940" or "AS24940".
bool parse_asn(std::string_view s, Asn& out) {
  s = trim(s);
  if (s.size() > 2 && (s[0] == 'A' || s[0] == 'a') && (s[1] == 'S' || s[1] == 's')) s.remove_prefix(2);
  return parse_int(s, out);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string located(std::string_view what, std::size_t line, const std::string& msg) {
  return std::string(what) + " line " + std::to_string(line) + ": " + msg;
}

// Reads a CSV stream, checks the header, and calls `row` for each data line
// with (line number, fields).
template <typename Fn>
void read_csv(std::istream& in, std::string_view expected_header, std::string_view what, Fn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim(view);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != expected_header) {
        throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                         ": expected header '" + std::string(expected_header) + "', found '" +
                         std::string(view) + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(view);
    } catch (const ParseError& e) {
      throw ParseError(located(what, line_no, e.what()));
    }
    const auto expected = static_cast<std::size_t>(
        std::count(expected_header.begin(), expected_header.end(), ',') + 1);
    if (fields.size() != expected) {
      throw ParseError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " fields, found " +
                       std::to_string(fields.size()));
    }
    row(line_no, fields);
  }
  if (!header_seen) {
    throw ParseError(std::string(what) + ": missing header '" + std::string(expected_header) + "'");
  }
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  out.emplace_back(trim(cur));
  return out;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  auto fail = [&]() -> ParseError {
    return ParseError("malformed date '" + std::string(text) + "'");
  };
  if (text.size() != 10 && !(text.size() == 20 && text[10] == 'T' && text[19] == 'Z')) throw fail();
  if (text[4] != '-' || text[7] != '-') throw fail();
  int y = 0;
  unsigned mo = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d)) {
    throw fail();
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) throw fail();
  long hh = 0, mm = 0, ss = 0;
  if (text.size() == 20) {
    if (text[13] != ':' || text[16] != ':') throw fail();
    if (!parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
        !parse_int(text.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60) {
      throw fail();
    }
  }
  return time_point_cast<seconds>(sys_days{ymd}) + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_date(Timestamp t) {
  const year_month_day ymd{floor<days>(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  const auto day_start = floor<days>(t);
  const hh_mm_ss<seconds> tod{t - day_start};
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02ld:%02ld:%02ldZ", static_cast<long>(tod.hours().count()),
                static_cast<long>(tod.minutes().count()), static_cast<long>(tod.seconds().count()));
  return format_date(t) + buf;
}

Parsed<AsnGraph> parse_caida(std::istream& in) {
  Parsed<AsnGraph> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view, '|');
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError("CAIDA line " + std::to_string(line_no) + ": expected 3 fields, found " +
                       std::to_string(fields.size()));
    }
    Asn a = 0, b = 0;
    int rel = 0;
    if (!parse_asn(fields[0], a) || !parse_asn(fields[1], b)) {
      throw ParseError("CAIDA line " + std::to_string(line_no) + ": non-integer ASN");
    }
    if (!parse_int(fields[2], rel)) {
      throw ParseError("CAIDA line " + std::to_string(line_no) + ": non-integer relationship");
    }
    if (rel != -1 && rel != 0) {
      ++out.report.skipped;
      out.report.warn(line_no, "relationship " + std::to_string(rel) + " ignored");
      continue;
    }
    if (a == b) {
      ++out.report.skipped;
      out.report.warn(line_no, "self-loop on AS" + std::to_string(a) + " ignored");
      continue;
    }
    out.value.add_edge(a, b);
    ++out.report.records;
  }
  if (out.report.records == 0) out.report.warnings.push_back("CAIDA input has no edges");
  return out;
}

Parsed<std::vector<CableRecord>> parse_cables(std::istream& in) {
  Parsed<std::vector<CableRecord>> out;
  read_csv(in, "cable_id,country_a,country_b", "cables", [&](std::size_t line, auto& f) {
    if (f[0].empty()) throw ParseError(located("cables", line, "empty cable_id"));
    if (!CountryId::try_parse(f[1]) || !CountryId::try_parse(f[2])) {
      throw ParseError(located("cables", line,
                               "cable '" + f[0] + "' has invalid country code"));
    }
    if (f[1] == f[2]) {
      ++out.report.skipped;
      out.report.warn(line, "cable '" + f[0] + "' lands twice in " + f[1] + "; skipped");
      return;
    }
    out.value.push_back({f[0], f[1], f[2]});
    ++out.report.records;
  });
  return out;
}

Parsed<std::vector<BorderRecord>> parse_borders(std::istream& in) {
  Parsed<std::vector<BorderRecord>> out;
  read_csv(in, "country_a,country_b", "borders", [&](std::size_t line, auto& f) {
    if (!CountryId::try_parse(f[0]) || !CountryId::try_parse(f[1])) {
      throw ParseError(located("borders", line, "invalid country code"));
    }
    if (f[0] == f[1]) {
      ++out.report.skipped;
      out.report.warn(line, "border of " + f[0] + " with itself skipped");
      return;
    }
    out.value.push_back({f[0], f[1]});
    ++out.report.records;
  });
  return out;
}

Parsed<std::vector<NodeSnapshot>> parse_snapshots(std::istream& in) {
  Parsed<std::vector<NodeSnapshot>> out;
  std::map<Timestamp, NodeSnapshot> by_time;
  std::map<Timestamp, std::set<std::string>> seen;
  read_csv(in, "timestamp,node_id,network,asn,country", "snapshot", [&](std::size_t line, auto& f) {
    Timestamp ts;
    try {
      ts = parse_timestamp(f[0]);
    } catch (const ParseError& e) {
      throw ParseError(located("snapshot", line, e.what()));
    }
    if (f[1].empty()) throw ParseError(located("snapshot", line, "empty node_id"));
    auto network = parse_network(f[2]);
    if (!network) {
      ++out.report.skipped;
      out.report.warn(line, "unknown network '" + f[2] + "'; row skipped");
      return;
    }
    if (!seen[ts].insert(f[1]).second) {
      ++out.report.skipped;
      out.report.warn(line, "duplicate node_id '" + f[1] + "'; row skipped");
      return;
    }
    P2PNode node;
    node.node_id = f[1];
    node.network = *network;
    if (!f[3].empty()) {
      Asn asn = 0;
      if (parse_asn(f[3], asn)) {
        node.asn = asn;
      } else {
        out.report.warn(line, "unparseable ASN '" + f[3] + "'; node kept without ASN");
      }
    }
    if (!f[4].empty()) {
      node.country = CountryId::try_parse(f[4]);
      if (!node.country) {
        out.report.warn(line, "invalid country '" + f[4] + "'; node kept without country");
      }
    }
    if (node.network == Network::clearnet && (!node.asn || !node.country)) {
      out.report.warn(line, "clearnet node '" + node.node_id + "' lacks ASN or country; excluded from cascades");
    }
    auto& snap = by_time[ts];
    snap.timestamp = ts;
    snap.nodes.push_back(std::move(node));
    ++out.report.records;
  });
  for (auto& [_, snap] : by_time) out.value.push_back(std::move(snap));
  return out;
}

Parsed<RelayTable> parse_relays(std::istream& in) {
  Parsed<RelayTable> out;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("relays: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("relays: expected a JSON array");
  std::vector<TorRelay> relays;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    const auto where = "relays[" + std::to_string(i) + "]";
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (const char* key : {"fingerprint", "country", "asn", "consensus_weight"}) {
      if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    }
    if (!obj["fingerprint"].is_string()) throw ParseError(where + ": fingerprint must be a string");
    if (!obj["consensus_weight"].is_number()) {
      throw ParseError(where + ": consensus_weight must be a number");
    }
    const double cw = obj["consensus_weight"].get<double>();
    if (!(cw >= 0.0) || !std::isfinite(cw)) throw ParseError(where + ": negative consensus_weight");

    TorRelay r;
    r.fingerprint = obj["fingerprint"].get<std::string>();
    r.consensus_weight = cw;

    std::string country = obj["country"].is_string() ? obj["country"].get<std::string>() : "";
    std::transform(country.begin(), country.end(), country.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    auto cid = CountryId::try_parse(country);
    bool asn_ok = false;
    if (obj["asn"].is_number_unsigned()) {
      r.asn = obj["asn"].get<Asn>();
      asn_ok = true;
    } else if (obj["asn"].is_string()) {
      asn_ok = parse_asn(obj["asn"].get<std::string>(), r.asn);
    }
    if (!cid || !asn_ok) {
      ++out.report.skipped;
      out.report.warnings.push_back(where + ": relay '" + r.fingerprint +
                                    "' lacks a valid country or ASN; skipped");
      continue;
    }
    r.country = *cid;
    relays.push_back(std::move(r));
    ++out.report.records;
  }
  out.value = RelayTable(std::move(relays));
  return out;
}

Parsed<std::vector<CableEvent>> parse_events(std::istream& in) {
  Parsed<std::vector<CableEvent>> out;
  read_csv(in, "event_id,date,cable_ids,countries", "events", [&](std::size_t line, auto& f) {
    CableEvent ev;
    ev.event_id = f[0];
    if (ev.event_id.empty()) throw ParseError(located("events", line, "empty event_id"));
    try {
      ev.date = parse_timestamp(f[1]);
    } catch (const ParseError& e) {
      throw ParseError(located("events", line, e.what()));
    }
    for (auto& id : split(f[2], ';')) {
      if (!id.empty()) ev.cable_ids.push_back(id);
    }
    for (auto& code : split(f[3], ';')) {
      if (code.empty()) continue;
      if (auto c = CountryId::try_parse(code)) {
        ev.countries.push_back(*c);
      } else {
        out.report.warn(line, "event '" + ev.event_id + "' lists invalid country '" + code + "'");
      }
    }
    out.value.push_back(std::move(ev));
    ++out.report.records;
  });
  return out;
}

Parsed<std::vector<PricePoint>> parse_price(std::istream& in) {
  Parsed<std::vector<PricePoint>> out;
  read_csv(in, "date,close", "price", [&](std::size_t line, auto& f) {
    PricePoint pt;
    try {
      pt.date = parse_timestamp(f[0]);
    } catch (const ParseError& e) {
      throw ParseError(located("price", line, e.what()));
    }
    if (!parse_double(f[1], pt.close)) {
      throw ParseError(located("price", line, "non-numeric close '" + f[1] + "'"));
    }
    if (!(pt.close > 0.0)) {
      ++out.report.skipped;
      out.report.warn(line, "non-positive close skipped");
      return;
    }
    out.value.push_back(pt);
    ++out.report.records;
  });
  std::stable_sort(out.value.begin(), out.value.end(),
                   [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
  return out;
}

void write_caida(std::ostream& out, const AsnGraph& graph) {
  out << "# undirected AS relationships, rel 0 = peer\n";
  for (const auto& [a, b] : graph.edges()) out << a << '|' << b << "|0\n";
}

void write_cables(std::ostream& out, std::span<const CableRecord> cables) {
  out << "cable_id,country_a,country_b\n";
  for (const auto& c : cables) {
    out << csv_field(c.cable_id) << ',' << c.country_a << ',' << c.country_b << '\n';
  }
}

void write_borders(std::ostream& out, std::span<const BorderRecord> borders) {
  out << "country_a,country_b\n";
  for (const auto& b : borders) out << b.country_a << ',' << b.country_b << '\n';
}

void write_snapshots(std::ostream& out, std::span<const NodeSnapshot> snapshots) {
  out << "timestamp,node_id,network,asn,country\n";
  for (const auto& snap : snapshots) {
    const auto ts = format_timestamp(snap.timestamp);
    for (const auto& n : snap.nodes) {
      out << ts << ',' << csv_field(n.node_id) << ',' << to_string(n.network) << ',';
      if (n.asn) out << *n.asn;
      out << ',';
      if (n.country) out << n.country->str();
      out << '\n';
    }
  }
}

void write_relays(std::ostream& out, const RelayTable& relays) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : relays.relays()) {
    nlohmann::ordered_json obj;
    obj["fingerprint"] = r.fingerprint;
    obj["country"] = r.country.str();
    obj["asn"] = r.asn;
    if (r.consensus_weight == std::floor(r.consensus_weight) && r.consensus_weight < 0x1p53) {
      obj["consensus_weight"] = static_cast<std::uint64_t>(r.consensus_weight);
    } else {
      obj["consensus_weight"] = r.consensus_weight;
    }
    doc.push_back(std::move(obj));
  }
  out << doc.dump(2) << '\n';
}

void write_events(std::ostream& out, std::span<const CableEvent> events) {
  out << "event_id,date,cable_ids,countries\n";
  for (const auto& ev : events) {
    std::string cables, countries;
    for (const auto& id : ev.cable_ids) cables += (cables.empty() ? "" : ";") + id;
    for (const auto& c : ev.countries) countries += (countries.empty() ? "" : ";") + c.str();
    const auto day = std::chrono::floor<std::chrono::days>(ev.date);
    const auto date = ev.date == day ? format_date(ev.date) : format_timestamp(ev.date);
    out << csv_field(ev.event_id) << ',' << date << ',' << csv_field(cables) << ','
        << countries << '\n';
  }
}

void write_price(std::ostream& out, std::span<const PricePoint> prices) {
  out << "date,close\n";
  for (const auto& p : prices) {
    const auto day = std::chrono::floor<std::chrono::days>(p.date);
    out << (p.date == day ? format_date(p.date) : format_timestamp(p.date)) << ','
        << format_double(p.close) << '\n';
  }
}

}  // namespace subsea
