#include "subsea/validation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <set>

#include "subsea/error.hpp"

namespace subsea {

namespace {

using namespace std::chrono;

struct Counted {
  Timestamp when;
  std::int64_t total = 0;
  std::map<CountryId, std::int64_t> by_country;
};

Counted count_snapshot(const NodeSnapshot& snap) {
  Counted c;
  c.when = snap.timestamp;
  const auto scope = cascade_scope(snap, ScopeMode::clearnet_only);
  c.total = static_cast<std::int64_t>(scope.size());
  c.by_country = scope.hosting;
  return c;
}

std::int64_t regional(const Counted& c, std::span<const CountryId> countries) {
  std::int64_t sum = 0;
  for (const auto& country : std::set<CountryId>(countries.begin(), countries.end())) {
    if (auto it = c.by_country.find(country); it != c.by_country.end()) sum += it->second;
  }
  return sum;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

MatchResult match_events(std::span<const CableEvent> events, std::span<const NodeSnapshot> snapshots,
                         int window_days, const PhysicalGraph* graph) {
  if (window_days <= 0) throw InputError("match window must be positive");
  std::vector<Counted> counted;
  counted.reserve(snapshots.size());
  for (const auto& s : snapshots) counted.push_back(count_snapshot(s));
  std::stable_sort(counted.begin(), counted.end(), [](auto& a, auto& b) { return a.when < b.when; });
  const seconds window = days{window_days};

  MatchResult out;
  for (const auto& ev : events) {
    if (graph) {
      for (const auto& id : ev.cable_ids) {
        if (graph->edges_for_cable(id).empty()) {
          out.warnings.push_back("event " + ev.event_id + ": unknown cable '" + id + "'");
        }
      }
    }
    auto after_it = std::lower_bound(counted.begin(), counted.end(), ev.date,
                                     [](const Counted& c, Timestamp t) { return c.when < t; });
    auto before_it = std::upper_bound(counted.begin(), counted.end(), ev.date,
                                      [](Timestamp t, const Counted& c) { return t < c.when; });
    const Counted* before = nullptr;
    if (before_it != counted.begin()) {
      const auto& cand = *std::prev(before_it);
      if (ev.date - cand.when <= window) before = &cand;
    }
    const Counted* after = nullptr;
    if (after_it != counted.end() && &*after_it == before) ++after_it;
    if (after_it != counted.end() && after_it->when - ev.date <= window) after = &*after_it;
    if (!before || !after) {
      ++out.unmatched;
      continue;
    }
    MatchedEvent m;
    m.event = ev;
    m.before = before->when;
    m.after = after->when;
    m.before_count = before->total;
    m.after_count = after->total;
    m.regional_before = regional(*before, ev.countries);
    m.regional_after = regional(*after, ev.countries);
    if (m.before_count > 0) {
      m.global_impact = static_cast<double>(m.after_count - m.before_count) / static_cast<double>(m.before_count);
    }
    if (m.regional_before > 0) {
      m.regional_impact =
          static_cast<double>(m.regional_after - m.regional_before) / static_cast<double>(m.regional_before);
    }
    out.matched.push_back(std::move(m));
  }
  return out;
}

ImpactStats impact_stats(std::span<const double> impacts) {
  if (impacts.empty()) throw InputError("impact statistics need at least one defined impact");
  std::vector<double> v(impacts.begin(), impacts.end());
  std::sort(v.begin(), v.end());
  ImpactStats s;
  s.count = v.size();
  s.share_below_5pct =
      static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return std::abs(x) < 0.05; })) /
      static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const auto n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.min = v.front();
  s.max = v.back();
  return s;
}

ImpactStats impact_stats(std::span<const MatchedEvent> matched) {
  std::vector<double> impacts;
  for (const auto& m : matched) {
    if (m.global_impact) impacts.push_back(*m.global_impact);
  }
  return impact_stats(impacts);
}

CorrelationStats correlation_stats(double r, std::size_t n) {
  if (n < 4) throw InputError("correlation needs at least 4 observations");
  CorrelationStats s;
  s.n = n;
  s.r = std::clamp(r, -1.0, 1.0);
  if (std::abs(s.r) >= 1.0) {
    s.p_value = 0.0;
    s.ci_low = s.ci_high = s.r;
    return s;
  }
  const double df = static_cast<double>(n - 2);
  const double t = s.r * std::sqrt(df / (1.0 - s.r * s.r));
  const boost::math::students_t dist(df);
  s.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  const double z = std::atanh(s.r);
  const double half = 1.96 / std::sqrt(static_cast<double>(n) - 3.0);
  s.ci_low = std::tanh(z - half);
  s.ci_high = std::tanh(z + half);
  return s;
}

CorrelationStats pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("correlation inputs differ in length");
  const auto n = x.size();
  if (n < 4) throw InputError("correlation needs at least 4 observations");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InputError("correlation input has zero variance");
  return correlation_stats(sxy / std::sqrt(sxx * syy), n);
}

PriceCorrelation price_correlation(std::span<const MatchedEvent> matched, std::span<const PricePoint> prices,
                                   int horizon_days) {
  if (horizon_days < 1) throw InputError("price horizon must be at least one day");
  std::map<sys_days, double> close;
  for (const auto& p : prices) close[floor<days>(p.date)] = p.close;
  PriceCorrelation out;
  out.horizon_days = horizon_days;
  std::vector<double> impact, ret;
  for (const auto& m : matched) {
    if (!m.global_impact) continue;
    const auto d0 = floor<days>(m.event.date);
    const auto a = close.find(d0);
    const auto b = close.find(d0 + days{horizon_days});
    if (a == close.end() || b == close.end()) {
      ++out.skipped;
      continue;
    }
    impact.push_back(*m.global_impact);
    ret.push_back((b->second - a->second) / a->second);
  }
  if (impact.size() < 4) {
    throw InputError("price correlation needs at least 4 matched events with price coverage, found " +
                     std::to_string(impact.size()));
  }
  out.stats = pearson(impact, ret);
  return out;
}

ConcentrationMetrics concentration_from_counts(const std::map<std::string, std::int64_t>& counts) {
  ConcentrationMetrics m;
  for (const auto& [_, c] : counts) {
    if (c < 0) throw InputError("negative provider count");
    m.total += c;
  }
  if (m.total <= 0) throw InputError("concentration needs at least one node");
  for (const auto& [label, c] : counts) {
    if (c == 0) continue;
    const double share = static_cast<double>(c) / static_cast<double>(m.total);
    m.shares.emplace_back(label, share);
  }
  std::stable_sort(m.shares.begin(), m.shares.end(), [](auto& a, auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < m.shares.size(); ++i) {
    const double pct = m.shares[i].second * 100.0;
    m.hhi += pct * pct;
    if (i < 5) m.top5_share += m.shares[i].second;
  }
  return m;
}

ConcentrationMetrics concentration_metrics(const NodeSnapshot& snapshot, bool include_tor) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& n : snapshot.nodes) {
    if (n.network == Network::clearnet && n.asn) {
      ++counts["AS" + std::to_string(*n.asn)];
    } else if (include_tor && n.network == Network::tor) {
      ++counts[kTorBucket];
    }
  }
  return concentration_from_counts(counts);
}

void write_matched_csv(std::ostream& out, std::span<const MatchedEvent> matched) {
  out << "event_id,date,before_count,after_count,global_impact,regional_impact\n";
  for (const auto& m : matched) {
    out << csv_field(m.event.event_id) << ',' << format_date(m.event.date) << ',' << m.before_count << ','
        << m.after_count << ',' << (m.global_impact ? fixed6(*m.global_impact) : "") << ','
        << (m.regional_impact ? fixed6(*m.regional_impact) : "") << '\n';
  }
}

}  // namespace subsea
