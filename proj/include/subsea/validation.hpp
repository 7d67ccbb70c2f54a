#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subsea/graph.hpp"
#include "subsea/ingest.hpp"
#include "subsea/snapshot.hpp"

namespace subsea {

struct MatchedEvent {
  CableEvent event;
  Timestamp before{};
  Timestamp after{};
  std::int64_t before_count = 0;  // in-scope clearnet nodes
  std::int64_t after_count = 0;
  std::int64_t regional_before = 0;  // in the event's listed countries
  std::int64_t regional_after = 0;
  std::optional<double> global_impact;    // empty when before_count == 0
  std::optional<double> regional_impact;  // empty when regional_before == 0
};

struct MatchResult {
  std::vector<MatchedEvent> matched;
  std::size_t unmatched = 0;
  std::vector<std::string> warnings;
};

// Latest snapshot at or before the event and earliest one after it, both
// within the window. Cable ids unknown to `graph` (when given) only warn.
MatchResult match_events(std::span<const CableEvent> events, std::span<const NodeSnapshot> snapshots,
                         int window_days = 7, const PhysicalGraph* graph = nullptr);

struct ImpactStats {
  std::size_t count = 0;
  double share_below_5pct = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Over defined global impacts. Throws InputError when there are none.
ImpactStats impact_stats(std::span<const MatchedEvent> matched);
ImpactStats impact_stats(std::span<const double> impacts);

struct CorrelationStats {
  std::size_t n = 0;
  double r = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Pearson r with a two-sided t-test p-value and a Fisher-z 95% interval.
// Throws InputError for n < 4, mismatched lengths or zero variance.
CorrelationStats pearson(std::span<const double> x, std::span<const double> y);
// The p-value and interval for a given r and sample size.
CorrelationStats correlation_stats(double r, std::size_t n);

struct PriceCorrelation {
  CorrelationStats stats;
  int horizon_days = 1;
  std::size_t skipped = 0;  // matched events without price coverage
};

// Global node impact against the close-to-close return over
// [event day, event day + horizon].
PriceCorrelation price_correlation(std::span<const MatchedEvent> matched,
                                   std::span<const PricePoint> prices, int horizon_days = 1);

struct ConcentrationMetrics {
  std::int64_t total = 0;
  double hhi = 0.0;  // 0 to 10,000
  double top5_share = 0.0;
  std::vector<std::pair<std::string, double>> shares;  // descending share, then label
};

inline constexpr const char* kTorBucket = "tor";

// Clearnet nodes by ASN; with include_tor, tor nodes form one extra bucket.
ConcentrationMetrics concentration_metrics(const NodeSnapshot& snapshot, bool include_tor = false);
ConcentrationMetrics concentration_from_counts(const std::map<std::string, std::int64_t>& counts);

// Per-event CSV: event_id,date,before_count,after_count,global_impact,regional_impact
void write_matched_csv(std::ostream& out, std::span<const MatchedEvent> matched);

}  // namespace subsea
