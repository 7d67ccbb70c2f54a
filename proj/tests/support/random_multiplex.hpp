#pragma once

// Small random multiplexes for oracle comparisons.

#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "subsea/cascade.hpp"
#include "subsea/graph.hpp"
#include "subsea/rng.hpp"
#include "subsea/snapshot.hpp"

namespace subsea::support {

struct MultiplexLimits {
  std::size_t max_countries = 8;
  std::size_t max_edges = 12;  // after collapsing parallel cables
  std::size_t max_asns = 6;
  std::size_t max_nodes = 20;
};

struct RandomMultiplex {
  std::vector<CableRecord> cables;
  std::vector<BorderRecord> borders;
  PhysicalGraph graph;
  AsnGraph asn_graph;
  NodeSnapshot snapshot;
  TorPlacements placements;
  CascadeScope scope;
  std::optional<RelayTable> relays;
  Removal removal;
  CascadeConfig config;

  OracleCascadeInput oracle_input() const;
};

RandomMultiplex random_multiplex(Rng& rng, bool with_relays, const MultiplexLimits& limits = {});

// Connected or not, at most `max_vertices` countries, with land and submarine
// edges mixed. Used for betweenness checks.
PhysicalGraph random_physical_graph(Rng& rng, std::size_t max_vertices, std::size_t max_pairs);

}  // namespace subsea::support
