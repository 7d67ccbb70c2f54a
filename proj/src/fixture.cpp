#include "subsea/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "subsea/error.hpp"
#include "subsea/rng.hpp"

namespace subsea {

std::string_view to_string(RelayPolicy p) noexcept {
  switch (p) {
    case RelayPolicy::core3: return "core3";
    case RelayPolicy::leaf: return "leaf";
    case RelayPolicy::spread: return "spread";
  }
  return "core3";
}

std::optional<RelayPolicy> parse_relay_policy(std::string_view s) noexcept {
  for (auto p : {RelayPolicy::core3, RelayPolicy::leaf, RelayPolicy::spread}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

FixtureSpec FixtureSpec::named(std::string_view profile) {
  FixtureSpec spec;
  if (profile == "core-periphery-225") return spec;
  if (profile == "minimal") {
    spec.profile = "minimal";
    spec.countries = 2;
    spec.core_size = 2;
    spec.submarine_edges = 1;
    spec.land_edges = 0;
    spec.clearnet_nodes = 40;
    spec.tor_share = 0.25;
    spec.other_share = 0.0;
    spec.unlocated_share = 0.0;
    spec.relays = 4;
    spec.events = 2;
    spec.series_nodes = 40;
    return spec;
  }
  throw InputError("unknown fixture profile '" + std::string(profile) + "'");
}

void FixtureSpec::validate() const {
  auto share = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0, 1]");
  };
  if (countries < 2) throw InputError("fixture needs at least 2 countries");
  if (core_size < 1 || core_size > countries) throw InputError("core size must lie in [1, countries]");
  if (submarine_edges < 1) throw InputError("fixture needs at least one submarine edge");
  if (land_edges < 0) throw InputError("land edge count is negative");
  if (clearnet_nodes < 2 * countries) {
    throw InputError("fixture needs at least two clearnet nodes per country");
  }
  if (relays < 1) throw InputError("fixture needs at least one relay");
  if (events < 0) throw InputError("event count is negative");
  if (series_nodes < 1) throw InputError("series population must be positive");
  if (series_step_days < 1) throw InputError("series step must be at least one day");
  share(attached_share, "attached share");
  share(region_share, "region share");
  share(leaf_share, "leaf share");
  share(core_node_share, "core node share");
  share(tor_share, "tor share");
  share(other_share, "other share");
  share(unlocated_share, "unlocated share");
  if (attached_share + region_share > 1.0) throw InputError("periphery shares sum above 1");
  if (tor_share + other_share >= 1.0) throw InputError("tor and other shares leave no clearnet");
}

namespace {

using namespace std::chrono;

constexpr const char* kIsoCodes[] = {
    "AD", "AE", "AF", "AG", "AI", "AL", "AM", "AO", "AQ", "AR", "AS", "AT", "AU", "AW", "AX", "AZ",
    "BA", "BB", "BD", "BE", "BF", "BG", "BH", "BI", "BJ", "BL", "BM", "BN", "BO", "BQ", "BR", "BS",
    "BT", "BV", "BW", "BY", "BZ", "CA", "CC", "CD", "CF", "CG", "CH", "CI", "CK", "CL", "CM", "CN",
    "CO", "CR", "CU", "CV", "CW", "CX", "CY", "CZ", "DE", "DJ", "DK", "DM", "DO", "DZ", "EC", "EE",
    "EG", "EH", "ER", "ES", "ET", "FI", "FJ", "FK", "FM", "FO", "FR", "GA", "GB", "GD", "GE", "GF",
    "GG", "GH", "GI", "GL", "GM", "GN", "GP", "GQ", "GR", "GS", "GT", "GU", "GW", "GY", "HK", "HM",
    "HN", "HR", "HT", "HU", "ID", "IE", "IL", "IM", "IN", "IO", "IQ", "IR", "IS", "IT", "JE", "JM",
    "JO", "JP", "KE", "KG", "KH", "KI", "KM", "KN", "KP", "KR", "KW", "KY", "KZ", "LA", "LB", "LC",
    "LI", "LK", "LR", "LS", "LT", "LU", "LV", "LY", "MA", "MC", "MD", "ME", "MF", "MG", "MH", "MK",
    "ML", "MM", "MN", "MO", "MP", "MQ", "MR", "MS", "MT", "MU", "MV", "MW", "MX", "MY", "MZ", "NA",
    "NC", "NE", "NF", "NG", "NI", "NL", "NO", "NP", "NR", "NU", "NZ", "OM", "PA", "PE", "PF", "PG",
    "PH", "PK", "PL", "PM", "PN", "PR", "PS", "PT", "PW", "PY", "QA", "RE", "RO", "RS", "RU", "RW",
    "SA", "SB", "SC", "SD", "SE", "SG", "SH", "SI", "SJ", "SK", "SL", "SM", "SN", "SO", "SR", "SS",
    "ST", "SV", "SX", "SY", "SZ", "TC", "TD", "TF", "TG", "TH", "TJ", "TK", "TL", "TM", "TN", "TO",
    "TR", "TT", "TV", "TW", "TZ", "UA", "UG", "UM", "US", "UY", "UZ", "VA", "VC", "VE", "VG", "VI",
    "VN", "VU", "WF", "WS", "YE", "YT", "ZA", "ZM", "ZW"};

// Core countries in priority order with their share of core clearnet nodes.
constexpr std::pair<const char*, double> kCore[] = {
    {"DE", 0.17}, {"FR", 0.08}, {"NL", 0.07},  {"BE", 0.02},  {"CH", 0.025}, {"AT", 0.015},
    {"IT", 0.03}, {"ES", 0.03}, {"PT", 0.01},  {"PL", 0.02},  {"DK", 0.015}, {"SE", 0.025},
    {"NO", 0.015}, {"FI", 0.02}, {"IE", 0.015}, {"GB", 0.07}, {"US", 0.21},  {"CA", 0.04},
    {"JP", 0.04}, {"SG", 0.03}};

constexpr std::pair<const char*, const char*> kCoreLand[] = {
    {"DE", "FR"}, {"DE", "NL"}, {"DE", "BE"}, {"DE", "CH"}, {"DE", "AT"}, {"DE", "PL"},
    {"DE", "DK"}, {"FR", "BE"}, {"FR", "CH"}, {"FR", "IT"}, {"FR", "ES"}, {"ES", "PT"},
    {"NL", "BE"}, {"CH", "AT"}, {"CH", "IT"}, {"AT", "IT"}, {"SE", "NO"}, {"SE", "FI"},
    {"NO", "FI"}, {"IE", "GB"}, {"US", "CA"}};

constexpr const char* kContinental[] = {"DE", "FR", "NL", "BE", "CH", "AT", "IT", "ES", "PT", "PL", "DK"};
constexpr const char* kAttachPoints[] = {"PL", "AT", "IT", "ES", "DE", "FR"};
constexpr const char* kLandlocked[] = {"CH", "AT"};

constexpr std::pair<const char*, double> kCoreRelayShares[] = {
    {"DE", 0.40}, {"FR", 0.20}, {"NL", 0.15}, {"BE", 0.04}, {"CH", 0.04}, {"AT", 0.03},
    {"IT", 0.03}, {"ES", 0.02}, {"PL", 0.02}, {"DK", 0.02}, {"SE", 0.02}, {"US", 0.03}};

// Shared hosting providers and the countries where they are strong.
constexpr Asn kHetzner = 24940, kOvh = 16276, kComcast = 7922, kAmazon = 16509, kGoogle = 15169;
constexpr Asn kBig[] = {kHetzner, kOvh, kComcast, kAmazon, kGoogle};
constexpr Asn kTransit[] = {3356, 1299, 174, 2914, 6939};

enum class Role : std::uint8_t { continental, core, attached, region, island, chain, leaf };

bool in(std::string_view code, std::span<const char* const> list) {
  return std::any_of(list.begin(), list.end(), [&](const char* c) { return code == c; });
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> seats(weights.size(), 0);
  if (weights.empty() || !(sum > 0.0)) return seats;
  std::vector<std::pair<double, std::size_t>> frac;
  std::size_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * weights[i] / sum;
    seats[i] = static_cast<std::size_t>(std::floor(quota));
    given += seats[i];
    frac.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(frac.begin(), frac.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total; ++k, ++given) ++seats[frac[k % frac.size()].second];
  return seats;
}

std::size_t pick_weighted(Rng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

double normal(Rng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Timestamp day_at(int y, unsigned m, unsigned d) {
  return time_point_cast<seconds>(sys_days{year{y} / month{m} / day{d}});
}

class Builder {
 public:
  explicit Builder(const FixtureSpec& spec) : spec_(spec), rng_(derive_seed(spec.seed, 0)) {}

  FixtureBundle build() {
    spec_.validate();
    choose_countries();
    build_land();
    build_submarine();
    FixtureBundle out;
    out.spec = spec_;
    for (std::size_t i = 0; i < core_count_; ++i) out.core.push_back(codes_[i]);
    std::sort(out.core.begin(), out.core.end());
    emit_cables(out);
    build_nodes(out);
    build_asn_graph(out);
    out.worst_case_country = worst_case();
    build_relays(out);
    build_events_and_series(out);
    build_price(out);
    build_evolution(out);
    check(out);
    return out;
  }

 private:
  using Pair = std::pair<std::size_t, std::size_t>;

  static Pair key(std::size_t a, std::size_t b) { return a < b ? Pair{a, b} : Pair{b, a}; }
  std::string code(std::size_t i) const { return codes_[i].str(); }
  std::size_t index(std::string_view c) const {
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (codes_[i].str() == c) return i;
    }
    return codes_.size();
  }

  void choose_countries() {
    const auto n = static_cast<std::size_t>(spec_.countries);
    core_count_ = static_cast<std::size_t>(spec_.core_size);
    if (n > std::size(kIsoCodes)) {
      throw InputError("fixture supports at most " + std::to_string(std::size(kIsoCodes)) +
                       " countries");
    }
    std::set<std::string> used;
    for (std::size_t i = 0; i < core_count_ && i < std::size(kCore); ++i) {
      codes_.push_back(CountryId::parse(kCore[i].first));
      used.insert(kCore[i].first);
    }
    std::vector<std::string> rest;
    for (const char* c : kIsoCodes) {
      if (!used.contains(c)) rest.push_back(c);
    }
    rng_.shuffle(std::span<std::string>(rest));
    for (std::size_t i = 0; codes_.size() < n; ++i) codes_.push_back(CountryId::parse(rest[i]));

    roles_.assign(n, Role::core);
    group_.assign(n, -1);
    for (std::size_t i = 0; i < core_count_; ++i) {
      if (in(code(i), kContinental)) {
        roles_[i] = Role::continental;
        group_[i] = 0;
      }
    }
    const std::size_t periphery = n - core_count_;
    const auto attached = static_cast<std::size_t>(std::lround(spec_.attached_share * periphery));
    const auto regional = static_cast<std::size_t>(std::lround(spec_.region_share * periphery));
    std::size_t next = core_count_;
    for (std::size_t k = 0; k < attached && next < n; ++k, ++next) {
      roles_[next] = Role::attached;
      group_[next] = 0;
    }
    std::size_t remaining = std::min(regional, n - next);
    std::size_t size = 22;
    while (remaining > 0) {
      std::size_t take = std::min(size, remaining);
      if (remaining - take > 0 && remaining - take < 3) take = remaining;
      regions_.emplace_back();
      for (std::size_t k = 0; k < take; ++k, ++next) {
        roles_[next] = Role::region;
        group_[next] = static_cast<int>(regions_.size());
        regions_.back().push_back(next);
      }
      remaining -= take;
      size = std::max<std::size_t>(3, size - 2);
    }
    const std::size_t islands = n - next;
    const auto leaves = static_cast<std::size_t>(std::lround(spec_.leaf_share * islands));
    const std::size_t chains = (islands - leaves) / 6;
    for (std::size_t k = 0; k < leaves; ++k, ++next) roles_[next] = Role::leaf;
    for (std::size_t k = 0; k < chains; ++k) {
      chains_.push_back({next, next + 1, next + 2});
      for (int j = 0; j < 3; ++j) roles_[next++] = Role::chain;
    }
    for (; next < n; ++next) roles_[next] = Role::island;
  }

  void add_land(std::size_t a, std::size_t b) { land_.insert(key(a, b)); }

  void build_land() {
    const auto budget = static_cast<std::size_t>(spec_.land_edges);
    for (const auto& [a, b] : kCoreLand) {
      const auto ia = index(a), ib = index(b);
      if (ia < core_count_ && ib < core_count_ && land_.size() < budget) add_land(ia, ib);
    }
    std::vector<std::size_t> anchors;
    for (const char* c : kAttachPoints) {
      if (auto i = index(c); i < core_count_) anchors.push_back(i);
    }
    if (anchors.empty()) anchors.push_back(0);
    std::vector<std::size_t> attached;
    for (std::size_t i = core_count_; i < codes_.size(); ++i) {
      if (roles_[i] != Role::attached) continue;
      if (attached.empty() || rng_.below(3) == 0) {
        add_land(i, anchors[attached.size() % anchors.size()]);
      } else {
        add_land(i, attached[rng_.below(attached.size())]);
      }
      attached.push_back(i);
    }
    for (const auto& region : regions_) {
      for (std::size_t k = 1; k < region.size(); ++k) add_land(region[k], region[rng_.below(k)]);
    }
    if (land_.size() > budget) {
      throw InputError("infeasible degree profile: periphery needs " + std::to_string(land_.size()) +
                       " land edges, budget is " + std::to_string(budget));
    }
    // Chords inside each land group.
    std::vector<Pair> candidates;
    std::vector<std::vector<std::size_t>> groups(regions_.size() + 1);
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (group_[i] >= 0 && roles_[i] != Role::core) groups[static_cast<std::size_t>(group_[i])].push_back(i);
    }
    for (const auto& g : groups) {
      for (std::size_t x = 0; x < g.size(); ++x) {
        for (std::size_t y = x + 1; y < g.size(); ++y) {
          if (roles_[g[x]] == Role::continental && roles_[g[y]] == Role::continental) continue;
          if (!land_.contains(key(g[x], g[y]))) candidates.push_back(key(g[x], g[y]));
        }
      }
    }
    rng_.shuffle(std::span<Pair>(candidates));
    const std::size_t needed = budget - land_.size();
    if (candidates.size() < needed) {
      throw InputError("infeasible degree profile: only " +
                       std::to_string(land_.size() + candidates.size()) +
                       " land edges fit the periphery, " + std::to_string(budget) + " requested");
    }
    for (std::size_t k = 0; k < needed; ++k) land_.insert(candidates[k]);
  }

  bool add_sub(std::size_t a, std::size_t b, std::size_t cable) {
    if (a == b || sub_.contains(key(a, b))) return false;
    sub_.emplace(key(a, b), cable);
    ++sub_degree_[a];
    ++sub_degree_[b];
    return true;
  }

  std::size_t new_cable() { return cable_count_++; }

  // Core coastal countries and existing region ports.
  std::size_t pick_hub(int exclude_group) {
    std::vector<std::size_t> ports;
    for (std::size_t p : ports_) {
      if (group_[p] != exclude_group) ports.push_back(p);
    }
    if (!ports.empty() && rng_.below(10) < 3) return ports[rng_.below(ports.size())];
    return coastal_[rng_.below(coastal_.size())];
  }

  void build_submarine() {
    sub_degree_.assign(codes_.size(), 0);
    for (std::size_t i = 0; i < core_count_; ++i) {
      if (!in(code(i), kLandlocked)) coastal_.push_back(i);
    }
    if (coastal_.empty()) coastal_.push_back(0);
    const auto budget = static_cast<std::size_t>(spec_.submarine_edges);

    // Regions: ports carry at least two connectors each.
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      const auto& region = regions_[r];
      const std::size_t k = 3 + (r * 2) % 6;
      const std::size_t port_count = std::max<std::size_t>(1, std::min(region.size(), k / 2));
      std::vector<std::size_t> ports(region.begin(), region.end());
      rng_.shuffle(std::span<std::size_t>(ports));
      ports.resize(port_count);
      for (std::size_t c = 0; c < k; ++c) {
        const auto port = ports[c % port_count];
        for (int attempt = 0; attempt < 50; ++attempt) {
          if (add_sub(port, pick_hub(group_[port]), new_cable())) break;
          --cable_count_;
        }
      }
      ports_.insert(ports_.end(), ports.begin(), ports.end());
    }
    for (std::size_t i = core_count_; i < codes_.size(); ++i) {
      std::size_t cables = 0;
      if (roles_[i] == Role::leaf) cables = 1;
      if (roles_[i] == Role::island) cables = 2 + (i % 3 == 0 ? 1 : 0);
      for (std::size_t c = 0; c < cables; ++c) {
        for (int attempt = 0; attempt < 50; ++attempt) {
          if (add_sub(i, pick_hub(-3), new_cable())) break;
          --cable_count_;
        }
      }
    }
    for (const auto& chain : chains_) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        if (add_sub(chain[0], pick_hub(-3), new_cable())) break;
        --cable_count_;
      }
      const auto festoon = new_cable();
      add_sub(chain[0], chain[1], festoon);
      add_sub(chain[1], chain[2], festoon);
    }
    const std::size_t forced = sub_.size();

    // Core mesh: a spanning path, then random pairs.
    std::vector<Pair> core_pairs;
    for (std::size_t x = 0; x < coastal_.size(); ++x) {
      for (std::size_t y = x + 1; y < coastal_.size(); ++y) core_pairs.push_back({coastal_[x], coastal_[y]});
    }
    const std::size_t spanning = coastal_.size() - 1;
    std::size_t mesh = std::min(core_pairs.size(),
                                std::max(spanning, static_cast<std::size_t>(std::lround(0.30 * budget))));
    if (forced + spanning > budget) {
      throw InputError("infeasible degree profile: periphery needs " + std::to_string(forced + spanning) +
                       " submarine edges, budget is " + std::to_string(budget));
    }
    mesh = std::min(mesh, budget - forced);
    std::size_t placed = 0;
    for (std::size_t x = 1; x < coastal_.size(); ++x, ++placed) {
      add_sub(coastal_[x - 1], coastal_[x], new_cable());
    }
    rng_.shuffle(std::span<Pair>(core_pairs));
    for (std::size_t k = 0; k < core_pairs.size() && placed < mesh; ++k) {
      if (add_sub(core_pairs[k].first, core_pairs[k].second, new_cable())) ++placed;
    }

    // Fillers that never leave a land-group country at submarine degree 1.
    std::vector<std::vector<std::size_t>> triangles_from;
    for (const auto& region : regions_) {
      if (region.size() >= 3) triangles_from.push_back(region);
    }
    std::vector<std::size_t> attached;
    for (std::size_t i = core_count_; i < codes_.size(); ++i) {
      if (roles_[i] == Role::attached) attached.push_back(i);
    }
    if (attached.size() >= 3) triangles_from.push_back(attached);

    int stall = 0;
    while (sub_.size() < budget) {
      const std::size_t left = budget - sub_.size();
      const auto roll = rng_.below(100);
      bool progressed = false;
      if (roll < 60 && left >= 3 && !triangles_from.empty()) {
        const auto& pool = triangles_from[rng_.below(triangles_from.size())];
        std::size_t a = pool[rng_.below(pool.size())], b = pool[rng_.below(pool.size())],
                    c = pool[rng_.below(pool.size())];
        if (a != b && b != c && a != c) {
          const auto festoon = new_cable();
          progressed |= add_sub(a, b, festoon);
          progressed |= add_sub(b, c, festoon);
          progressed |= add_sub(a, c, festoon);
          if (!progressed) --cable_count_;
        }
      } else if (roll < 88) {
        const auto a = coastal_[rng_.below(coastal_.size())];
        const auto b = coastal_[rng_.below(coastal_.size())];
        progressed = add_sub(a, b, cable_count_);
        if (progressed) new_cable();
      } else if (!ports_.empty()) {
        const auto a = ports_[rng_.below(ports_.size())];
        const auto b = coastal_[rng_.below(coastal_.size())];
        progressed = add_sub(a, b, cable_count_);
        if (progressed) new_cable();
      }
      stall = progressed ? 0 : stall + 1;
      if (stall > 10000) {
        // Dense corner: any new pair between countries already at degree >= 2.
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < codes_.size(); ++i) {
          if (sub_degree_[i] >= 2 && roles_[i] != Role::leaf && roles_[i] != Role::chain) eligible.push_back(i);
        }
        bool any = false;
        for (std::size_t x = 0; x < eligible.size() && !any; ++x) {
          for (std::size_t y = x + 1; y < eligible.size() && !any; ++y) {
            if (add_sub(eligible[x], eligible[y], cable_count_)) {
              new_cable();
              any = true;
            }
          }
        }
        if (!any) throw InputError("infeasible degree profile: submarine budget cannot be placed");
        stall = 0;
      }
    }
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      const bool exposed = roles_[i] == Role::leaf || roles_[i] == Role::chain || roles_[i] == Role::island;
      if (!exposed && sub_degree_[i] == 1 && codes_.size() > 2) {
        throw InvariantViolation("fixture left land-connected " + code(i) + " at submarine degree 1");
      }
    }
  }

  void emit_cables(FixtureBundle& out) {
    std::map<std::size_t, std::vector<Pair>> by_cable;
    for (const auto& [pair, cable] : sub_) by_cable[cable].push_back(pair);
    std::size_t serial = 0;
    std::map<std::size_t, std::string> names;
    for (const auto& [cable, _] : by_cable) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "C%04zu", ++serial);
      names[cable] = buf;
    }
    for (const auto& [cable, pairs] : by_cable) {
      for (const auto& [a, b] : pairs) out.cables.push_back({names[cable], code(a), code(b)});
    }
    // Some core routes carry a second, parallel system.
    std::vector<Pair> core_routes;
    for (const auto& [pair, _] : sub_) {
      if (pair.first < core_count_ && pair.second < core_count_) core_routes.push_back(pair);
    }
    for (const auto& [a, b] : core_routes) {
      if (rng_.below(100) < 15) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "C%04zu", ++serial);
        out.cables.push_back({buf, code(a), code(b)});
      }
    }
    for (const auto& [a, b] : land_) {
      auto x = code(a), y = code(b);
      if (y < x) std::swap(x, y);
      out.borders.push_back({x, y});
    }
    std::sort(out.borders.begin(), out.borders.end(),
              [](auto& l, auto& r) { return std::tie(l.country_a, l.country_b) < std::tie(r.country_a, r.country_b); });
  }

  double big_weight(Asn asn, std::string_view c, bool core) const {
    switch (asn) {
      case kHetzner: return c == "DE" ? 3.0 : c == "FI" ? 2.0 : 0.0;
      case kOvh: return c == "FR" ? 3.0 : (c == "CA" || c == "DE" || c == "GB" || c == "PL" || c == "ES" ||
                                          c == "IT" || c == "NL" || c == "BE") ? 1.0 : 0.0;
      case kComcast: return c == "US" ? 2.5 : 0.0;
      case kAmazon: return core ? 1.0 : 0.6;
      case kGoogle: return core ? 0.8 : 0.6;
    }
    return 0.0;
  }

  void build_nodes(FixtureBundle& out) {
    const std::size_t n = codes_.size();
    std::vector<double> weight(n, 0.0);
    for (std::size_t i = 0; i < core_count_; ++i) {
      weight[i] = i < std::size(kCore) ? kCore[i].second : 0.01;
    }
    const double core_sum = std::accumulate(weight.begin(), weight.begin() + core_count_, 0.0);
    const double periphery_share = n > core_count_ ? 1.0 - spec_.core_node_share : 0.0;
    const double core_share = 1.0 - periphery_share;
    for (std::size_t i = 0; i < core_count_; ++i) weight[i] *= core_share / core_sum;
    // Periphery: attached 22%, regions 70%, islands 8% of the periphery share.
    std::map<int, double> group_share = {{0, 0.22}, {1, 0.70}, {2, 0.08}};
    std::map<int, double> group_raw;
    auto bucket = [&](std::size_t i) {
      return roles_[i] == Role::attached ? 0 : roles_[i] == Role::region ? 1 : 2;
    };
    for (std::size_t i = core_count_; i < n; ++i) {
      const double u = rng_.uniform();
      weight[i] = 0.2 + u * u * u * 3.0;
      group_raw[bucket(i)] += weight[i];
    }
    double present = 0.0;
    for (auto& [g, raw] : group_raw) present += group_share[g];
    for (std::size_t i = core_count_; i < n; ++i) {
      const int g = bucket(i);
      weight[i] *= periphery_share * group_share[g] / present / group_raw[g];
    }

    const auto total = static_cast<std::size_t>(spec_.clearnet_nodes);
    const auto extra = apportion(total - 2 * n, weight);
    node_counts_.resize(n);
    for (std::size_t i = 0; i < n; ++i) node_counts_[i] = 2 + extra[i];

    auto& nodes = out.snapshot.nodes;
    out.snapshot.timestamp = day_at(2025, 6, 1);
    std::size_t serial = 0;
    auto next_id = [&](char prefix) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%c%06zu", prefix, ++serial);
      return std::string(buf);
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = code(i);
      const bool core = i < core_count_;
      const std::size_t count = node_counts_[i];
      const std::size_t locals = std::min<std::size_t>(std::clamp<std::size_t>(1 + count / 150, 1, 8), count - 1);
      std::vector<Asn> local_asns;
      for (std::size_t j = 0; j < locals; ++j) local_asns.push_back(static_cast<Asn>(100000 + i * 10 + j));
      local_asns_.push_back(local_asns);
      std::vector<double> big_w;
      for (Asn b : kBig) big_w.push_back(big_weight(b, c, core));
      std::vector<double> local_w;
      for (std::size_t j = 0; j < locals; ++j) local_w.push_back(1.0 / static_cast<double>(j + 1));
      const double p_big = core ? 0.62 : 0.30;
      for (std::size_t k = 0; k < count; ++k) {
        P2PNode node;
        node.node_id = next_id('c');
        node.country = codes_[i];
        if (k < locals) {
          node.asn = local_asns[k];
        } else if (rng_.uniform() < p_big) {
          node.asn = kBig[pick_weighted(rng_, big_w)];
        } else {
          node.asn = local_asns[pick_weighted(rng_, local_w)];
        }
        nodes.push_back(std::move(node));
      }
    }
    const auto unlocated = static_cast<std::size_t>(std::lround(spec_.unlocated_share * total));
    for (std::size_t k = 0; k < unlocated; ++k) {
      P2PNode node;
      node.node_id = next_id('c');
      if (k % 2 == 0) {
        node.country = codes_[rng_.below(n)];
      } else {
        node.asn = kBig[rng_.below(std::size(kBig))];
      }
      nodes.push_back(std::move(node));
    }
    const double clear = static_cast<double>(nodes.size());
    const double all = clear / (1.0 - spec_.tor_share - spec_.other_share);
    const auto tor = static_cast<std::size_t>(std::lround(all * spec_.tor_share));
    const auto other = static_cast<std::size_t>(std::lround(all * spec_.other_share));
    serial = 0;
    for (std::size_t k = 0; k < tor; ++k) nodes.push_back({next_id('t'), Network::tor, {}, {}});
    serial = 0;
    for (std::size_t k = 0; k < other; ++k) nodes.push_back({next_id('o'), Network::other, {}, {}});
  }

  void build_asn_graph(FixtureBundle& out) {
    auto& g = out.asn_graph;
    for (std::size_t x = 0; x < std::size(kBig); ++x) {
      for (std::size_t y = x + 1; y < std::size(kBig); ++y) g.add_edge(kBig[x], kBig[y]);
    }
    for (std::size_t x = 0; x < std::size(kTransit); ++x) {
      for (std::size_t y = x + 1; y < std::size(kTransit); ++y) g.add_edge(kTransit[x], kTransit[y]);
      for (Asn b : kBig) g.add_edge(kTransit[x], b);
    }
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      const auto c = code(i);
      std::vector<double> w;
      for (Asn b : kBig) w.push_back(big_weight(b, c, i < core_count_));
      const auto& locals = local_asns_[i];
      for (std::size_t j = 0; j < locals.size(); ++j) {
        g.add_edge(locals[j], kBig[pick_weighted(rng_, w)]);
        if (rng_.below(2) == 0) g.add_edge(locals[j], kBig[pick_weighted(rng_, w)]);
        if (rng_.below(10) < 3) g.add_edge(locals[j], kTransit[rng_.below(std::size(kTransit))]);
        if (j > 0 && rng_.below(10) < 2) g.add_edge(locals[j], locals[rng_.below(j)]);
      }
    }
  }

  CountryId worst_case() const {
    std::size_t best = codes_.size();
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (sub_degree_[i] < 1) continue;
      if (best == codes_.size() || sub_degree_[i] < sub_degree_[best] ||
          (sub_degree_[i] == sub_degree_[best] && codes_[i] < codes_[best])) {
        best = i;
      }
    }
    return codes_[best];
  }

  void build_relays(FixtureBundle& out) {
    std::vector<std::pair<std::size_t, double>> shares;
    auto add_code = [&](std::string_view c, double s) {
      if (auto i = index(c); i < codes_.size()) shares.emplace_back(i, s);
    };
    switch (spec_.relay_policy) {
      case RelayPolicy::core3:
        for (const auto& [c, s] : kCoreRelayShares) add_code(c, s);
        break;
      case RelayPolicy::leaf:
        add_code(out.worst_case_country.str(), 1.0);
        break;
      case RelayPolicy::spread: {
        std::vector<std::size_t> leaves;
        for (std::size_t i = 0; i < codes_.size(); ++i) {
          if (sub_degree_[i] == 1 && roles_[i] == Role::leaf) leaves.push_back(i);
        }
        std::sort(leaves.begin(), leaves.end(), [&](auto a, auto b) { return codes_[a] < codes_[b]; });
        if (leaves.size() < 2) throw InputError("spread relay policy needs two single-cable leaves");
        shares = {{leaves[0], 0.40}, {leaves[1], 0.30}, {0, 0.30}};
        break;
      }
    }
    if (shares.empty()) shares.emplace_back(0, 1.0);
    std::vector<double> w;
    for (auto& [_, s] : shares) w.push_back(s);
    const auto counts = apportion(static_cast<std::size_t>(spec_.relays), w);

    std::map<std::size_t, std::map<Asn, double>> asn_mix;
    for (const auto& node : out.snapshot.nodes) {
      if (node.network == Network::clearnet && node.country && node.asn) {
        asn_mix[index(node.country->str())][*node.asn] += 1.0;
      }
    }
    const double scale = 1e7;
    std::vector<TorRelay> relays;
    for (std::size_t s = 0; s < shares.size(); ++s) {
      const auto [country, share] = shares[s];
      if (counts[s] == 0) continue;
      std::vector<Asn> asns;
      std::vector<double> asn_w;
      for (const auto& [a, cnt] : asn_mix[country]) {
        asns.push_back(a);
        asn_w.push_back(cnt);
      }
      std::vector<double> raw(counts[s]);
      for (auto& r : raw) r = 0.05 + std::pow(rng_.uniform(), 2.0);
      const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
      for (std::size_t k = 0; k < counts[s]; ++k) {
        TorRelay relay;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%016llX%016llX%08llX",
                      static_cast<unsigned long long>(rng_.next()),
                      static_cast<unsigned long long>(rng_.next()),
                      static_cast<unsigned long long>(rng_.next() >> 32));
        relay.fingerprint = buf;
        relay.country = codes_[country];
        relay.asn = asns[pick_weighted(rng_, asn_w)];
        relay.consensus_weight = std::max(1.0, std::round(scale * share * raw[k] / raw_sum));
        relays.push_back(std::move(relay));
      }
    }
    std::sort(relays.begin(), relays.end(), [](auto& a, auto& b) { return a.fingerprint < b.fingerprint; });
    out.relays = RelayTable(std::move(relays));
  }

  void build_events_and_series(FixtureBundle& out) {
    const auto start = day_at(2024, 6, 1);
    const int span_days = 365;
    std::vector<Timestamp> stamps;
    for (int d = 0; d <= span_days; d += spec_.series_step_days) stamps.push_back(start + days{d});

    std::vector<std::size_t> peripheral, any;
    for (std::size_t k = 0; k < out.cables.size(); ++k) {
      any.push_back(k);
      const auto a = index(out.cables[k].country_a), b = index(out.cables[k].country_b);
      if (a >= core_count_ || b >= core_count_) peripheral.push_back(k);
    }
    struct Outage {
      std::set<CountryId> countries;
      Timestamp from, to;
      double severity;
    };
    std::vector<Outage> outages;
    for (int e = 0; e < spec_.events; ++e) {
      CableEvent ev;
      const int offset = 8 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(span_days - 16)));
      ev.date = start + days{offset};
      const std::size_t picks = rng_.below(100) < 85 ? 1 : 2;
      std::set<std::string> ids;
      std::set<CountryId> countries;
      for (std::size_t p = 0; p < picks; ++p) {
        const auto& pool = !peripheral.empty() && rng_.below(10) < 7 ? peripheral : any;
        const auto& rec = out.cables[pool[rng_.below(pool.size())]];
        ids.insert(rec.cable_id);
        for (const auto& r : out.cables) {
          if (r.cable_id == rec.cable_id) {
            countries.insert(CountryId::parse(r.country_a));
            countries.insert(CountryId::parse(r.country_b));
          }
        }
      }
      ev.cable_ids.assign(ids.begin(), ids.end());
      ev.countries.assign(countries.begin(), countries.end());
      const double severity = rng_.below(100) < 80 ? 0.08 * rng_.uniform() : 0.3 + 0.55 * rng_.uniform();
      outages.push_back({countries, ev.date, ev.date + days{6}, severity});
      out.events.push_back(std::move(ev));
    }
    std::vector<std::size_t> order(out.events.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return out.events[a].date < out.events[b].date; });
    std::vector<CableEvent> sorted;
    for (std::size_t k = 0; k < order.size(); ++k) {
      sorted.push_back(out.events[order[k]]);
      char buf[16];
      std::snprintf(buf, sizeof buf, "EV-%03zu", k + 1);
      sorted.back().event_id = buf;
    }
    out.events = std::move(sorted);

    std::vector<const P2PNode*> population;
    for (const auto& node : out.snapshot.nodes) {
      if (node.network == Network::clearnet && node.country && node.asn) population.push_back(&node);
    }
    rng_.shuffle(std::span<const P2PNode*>(population));
    population.resize(std::min(population.size(), static_cast<std::size_t>(spec_.series_nodes)));
    std::sort(population.begin(), population.end(),
              [](auto a, auto b) { return a->node_id < b->node_id; });
    for (const auto& ts : stamps) {
      NodeSnapshot snap;
      snap.timestamp = ts;
      for (const auto* node : population) {
        double keep = 0.97;
        for (const auto& o : outages) {
          if (ts >= o.from && ts <= o.to && o.countries.contains(*node->country)) keep *= 1.0 - o.severity;
        }
        if (rng_.uniform() < keep) snap.nodes.push_back(*node);
      }
      out.series.push_back(std::move(snap));
    }
  }

  void build_price(FixtureBundle& out) {
    double close = 67000.0;
    const auto start = day_at(2024, 6, 1);
    for (int d = 0; d <= 372; ++d) {
      out.price.push_back({start + days{d}, std::round(close * 100.0) / 100.0});
      close *= std::exp(0.0005 + 0.03 * normal(rng_));
    }
  }

  void build_evolution(FixtureBundle& out) {
    struct Year {
      int year;
      double clearnet_fraction;
      double tor_share;
    };
    const Year years[] = {{2019, 0.80, std::min(spec_.tor_share, 0.02)},
                          {2021, 0.90, std::min(spec_.tor_share, 0.05)},
                          {2023, 0.95, std::min(spec_.tor_share, 0.55)}};
    std::vector<const P2PNode*> clear, tor, other;
    for (const auto& node : out.snapshot.nodes) {
      (node.network == Network::clearnet ? clear : node.network == Network::tor ? tor : other).push_back(&node);
    }
    for (const auto& y : years) {
      NodeSnapshot snap;
      snap.timestamp = day_at(y.year, 6, 1);
      for (const auto* node : clear) {
        if (rng_.uniform() < y.clearnet_fraction) snap.nodes.push_back(*node);
      }
      const double c = static_cast<double>(snap.nodes.size());
      const double all = c / (1.0 - y.tor_share - spec_.other_share);
      const auto t = std::min(tor.size(), static_cast<std::size_t>(std::lround(all * y.tor_share)));
      for (std::size_t k = 0; k < t; ++k) snap.nodes.push_back(*tor[k]);
      for (const auto* node : other) snap.nodes.push_back(*node);
      out.evolution.push_back(std::move(snap));
    }
    out.evolution.push_back(out.snapshot);
  }

  void check(const FixtureBundle& out) const {
    const auto graph = build_physical_graph(out.cables, out.borders);
    if (graph.country_count() != codes_.size() ||
        graph.submarine_count() != static_cast<std::size_t>(spec_.submarine_edges) ||
        graph.edge_count() - graph.submarine_count() != static_cast<std::size_t>(spec_.land_edges)) {
      throw InvariantViolation("fixture graph does not match its requested edge counts");
    }
  }

  FixtureSpec spec_;
  Rng rng_;
  std::vector<CountryId> codes_;
  std::vector<Role> roles_;
  std::vector<int> group_;
  std::size_t core_count_ = 0;
  std::vector<std::vector<std::size_t>> regions_;
  std::vector<std::array<std::size_t, 3>> chains_;
  std::set<Pair> land_;
  std::map<Pair, std::size_t> sub_;
  std::vector<int> sub_degree_;
  std::vector<std::size_t> coastal_;
  std::vector<std::size_t> ports_;
  std::size_t cable_count_ = 0;
  std::vector<std::size_t> node_counts_;
  std::vector<std::vector<Asn>> local_asns_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

}  // namespace

FixtureBundle generate_fixture(const FixtureSpec& spec) { return Builder(spec).build(); }

std::vector<std::filesystem::path> write_fixture(const FixtureBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& text) {
    write_text(dir / name, text);
    written.push_back(dir / name);
  };
  put(fixture_files::cables, render([&](auto& s) { write_cables(s, b.cables); }));
  put(fixture_files::borders, render([&](auto& s) { write_borders(s, b.borders); }));
  put(fixture_files::asn_graph, render([&](auto& s) { write_caida(s, b.asn_graph); }));
  put(fixture_files::snapshot,
      render([&](auto& s) { write_snapshots(s, std::span<const NodeSnapshot>(&b.snapshot, 1)); }));
  put(fixture_files::evolution, render([&](auto& s) { write_snapshots(s, b.evolution); }));
  put(fixture_files::series, render([&](auto& s) { write_snapshots(s, b.series); }));
  put(fixture_files::relays, render([&](auto& s) { write_relays(s, b.relays); }));
  put(fixture_files::events, render([&](auto& s) { write_events(s, b.events); }));
  put(fixture_files::price, render([&](auto& s) { write_price(s, b.price); }));

  const auto graph = build_physical_graph(b.cables, b.borders);
  const auto comp = composition_stats(b.snapshot);
  nlohmann::ordered_json doc;
  doc["profile"] = b.spec.profile;
  doc["seed"] = b.spec.seed;
  doc["relay_policy"] = std::string(to_string(b.spec.relay_policy));
  doc["countries"] = graph.country_count();
  doc["submarine_edges"] = graph.submarine_count();
  doc["land_edges"] = graph.edge_count() - graph.submarine_count();
  doc["cable_records"] = b.cables.size();
  doc["asns"] = b.asn_graph.vertex_count();
  doc["asn_edges"] = b.asn_graph.edge_count();
  doc["nodes"] = {{"total", comp.total}, {"clearnet", comp.clearnet}, {"tor", comp.tor}, {"other", comp.other}};
  doc["tor_share"] = comp.tor_share;
  doc["relays"] = b.relays.relays().size();
  doc["events"] = b.events.size();
  doc["series_snapshots"] = b.series.size();
  doc["evolution_snapshots"] = b.evolution.size();
  std::vector<std::string> core;
  for (const auto& c : b.core) core.push_back(c.str());
  doc["core"] = core;
  doc["worst_case_country"] = b.worst_case_country.str();
  std::vector<std::string> files;
  for (const auto& p : written) files.push_back(p.filename().string());
  doc["files"] = files;
  put(fixture_files::summary, doc.dump(2) + "\n");
  return written;
}

}  // namespace subsea
