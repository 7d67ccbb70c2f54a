#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace subsea {

// ISO-3166 alpha-2 code, two uppercase ASCII letters.
class CountryId {
 public:
  CountryId() = default;

  // Throws ParseError unless `code` is exactly two letters A-Z.
  static CountryId parse(std::string_view code);
  static std::optional<CountryId> try_parse(std::string_view code) noexcept;

  std::string str() const { return std::string(code_.data(), 2); }

  auto operator<=>(const CountryId&) const = default;
  bool operator==(const CountryId&) const = default;

 private:
  std::array<char, 2> code_{'?', '?'};
};

struct CountryIdHash {
  std::size_t operator()(const CountryId& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};

enum class EdgeKind : std::uint8_t { submarine, land };

struct PhysicalEdge {
  std::string id;
  CountryId a;  // a < b
  CountryId b;
  std::size_t u = 0;  // country index of a
  std::size_t v = 0;  // country index of b
  EdgeKind kind = EdgeKind::submarine;
  std::vector<std::string> cable_ids;  // sorted; empty for land edges

  bool removable() const noexcept { return kind == EdgeKind::submarine; }
};

struct CableRecord {
  std::string cable_id;
  std::string country_a;
  std::string country_b;
};

struct BorderRecord {
  std::string country_a;
  std::string country_b;
};

// Country-level physical layer. Countries and edges are kept in sorted
// order so that indices are deterministic for a given input set.
class PhysicalGraph {
 public:
  std::span<const CountryId> countries() const noexcept { return countries_; }
  std::span<const PhysicalEdge> edges() const noexcept { return edges_; }
  std::size_t country_count() const noexcept { return countries_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t submarine_count() const noexcept { return submarine_.size(); }

  // Indices of submarine edges, ascending (therefore sorted by edge id).
  std::span<const std::size_t> submarine_edges() const noexcept { return submarine_; }

  // Edge indices incident to a country.
  std::span<const std::size_t> incident(std::size_t country) const noexcept {
    return adjacency_[country];
  }

  std::optional<std::size_t> country_index(const CountryId& c) const;
  std::optional<std::size_t> edge_index(std::string_view id) const;

  // Submarine edges carrying a given raw cable (empty for unknown cables).
  std::vector<std::size_t> edges_for_cable(std::string_view cable_id) const;

  static std::string submarine_edge_id(const CountryId& a, const CountryId& b);
  static std::string land_edge_id(const CountryId& a, const CountryId& b);

 private:
  friend PhysicalGraph build_physical_graph(std::span<const CableRecord>,
                                            std::span<const BorderRecord>);

  std::vector<CountryId> countries_;
  std::vector<PhysicalEdge> edges_;
  std::vector<std::size_t> submarine_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::unordered_map<CountryId, std::size_t, CountryIdHash> country_lookup_;
  std::unordered_map<std::string, std::size_t> edge_lookup_;
  std::unordered_map<std::string, std::vector<std::size_t>> cable_lookup_;
};

// Collapses raw cable records into one submarine edge per country pair and
// adds deduplicated land edges. Throws ParseError on malformed codes or
// self-loops, InputError when the result has no countries.
PhysicalGraph build_physical_graph(std::span<const CableRecord> cables,
                                   std::span<const BorderRecord> borders);

struct ComponentPartition {
  std::vector<std::size_t> component_of;  // per country index
  std::size_t count = 0;

  std::vector<std::vector<std::size_t>> members() const;
};

// Components after deleting `removed` edge ids. Components are numbered in
// order of their smallest member. Throws InputError for land or unknown ids.
ComponentPartition components(const PhysicalGraph& graph,
                              std::span<const std::string> removed);

// Mask form used by the simulation loop; removed_mask[i] != 0 deletes edge i.
// Land edges are never deleted regardless of the mask.
void components_into(const PhysicalGraph& graph, std::span<const char> removed_mask,
                     ComponentPartition& out);

// Component with the most hosted nodes; ties go to the component with more
// countries, then to the one holding the smallest CountryId.
// `hosting` is indexed by country; missing entries count as zero.
std::size_t main_component(const ComponentPartition& partition,
                           std::span<const std::int64_t> hosting);

std::size_t main_component(const PhysicalGraph& graph, const ComponentPartition& partition,
                           const std::map<CountryId, std::int64_t>& hosting);

struct BetweennessOptions {
  bool submarine_only = false;             // ignore land edges when routing
  std::span<const char> removed_mask = {};  // edges to treat as absent
};

// Normalised shortest-path edge betweenness with unit weights, one score per
// edge index. Each ordered country pair contributes 1 / n(n-1), split evenly
// over all its shortest paths (parallel edges yield distinct paths).
std::vector<double> edge_betweenness(const PhysicalGraph& graph,
                                     const BetweennessOptions& options = {});

std::map<std::string, double> edge_betweenness_by_id(const PhysicalGraph& graph,
                                                     const BetweennessOptions& options = {});

// Incident submarine edges per country index.
std::vector<int> submarine_degree(const PhysicalGraph& graph);

}  // namespace subsea
