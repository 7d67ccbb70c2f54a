#include "subsea/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "subsea/attacks.hpp"
#include "subsea/error.hpp"
#include "subsea/fixture.hpp"
#include "subsea/ingest.hpp"
#include "subsea/montecarlo.hpp"
#include "subsea/tor.hpp"
#include "subsea/validation.hpp"

namespace subsea {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantViolation("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

ordered_json pc_json(const PcEstimate& pc) {
  if (pc.p_c) return *pc.p_c;
  return "not_reached";
}

struct Options {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned jobs = 0;

  std::string data_dir;
  std::string cables, borders, asrel, snapshot, relays, events, series, price;
  std::vector<std::string> snapshots;

  std::string strategy = "random";
  double grid_step = 0.02;
  int trials = 1000;
  double threshold = 0.10;
  std::string scope = "clearnet_only";
  double relax_fraction = 1.0;
  std::string pc_statistic = "mean";
  bool fixpoint = false;
  bool submarine_only_betweenness = false;
  bool adaptive_betweenness = false;
  std::string tor_scenario;
  bool apportion = false;
  double cw_threshold = 0.5;

  int window_days = 7;
  int horizon_days = 1;
  bool include_tor = false;

  std::string profile = "core-periphery-225";
  std::optional<double> tor_share;
  std::string relay_policy;
};

// Reads inputs, writes outputs and assembles the manifest.
class Run {
 public:
  Run(const Options& opt, std::ostream& err) : opt_(opt), err_(err) {
    out_dir_ = opt.out_dir;
    if (out_dir_.empty()) {
      const char* env = std::getenv(kOutEnvVar);
      out_dir_ = env && *env ? env : "out";
    }
  }

  std::string input_path(const std::string& flag_value, const char* bundle_name) const {
    if (!flag_value.empty()) return flag_value;
    if (!opt_.data_dir.empty()) return (fs::path(opt_.data_dir) / bundle_name).string();
    return {};
  }

  std::string read_input(const std::string& role, const std::string& path) {
    if (path.empty()) throw InputError("missing input: " + role + " (pass --" + role + " or --data)");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + role + " file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto bytes = ss.str();
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256_hex(bytes)}});
    return bytes;
  }

  template <typename T, typename Parser>
  T parse(const std::string& role, const std::string& path, Parser parser) {
    std::istringstream in(read_input(role, path));
    Parsed<T> parsed;
    try {
      parsed = parser(in);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
    report(path, parsed.report);
    return std::move(parsed.value);
  }

  void report(const std::string& path, const ParseReport& r) {
    constexpr std::size_t shown = 10;
    for (std::size_t i = 0; i < r.warnings.size() && i < shown; ++i) {
      err_ << "warning: " << path << ": " << r.warnings[i] << "\n";
    }
    if (r.warnings.size() > shown) {
      err_ << "warning: " << path << ": " << (r.warnings.size() - shown) << " more warnings\n";
    }
    if (r.skipped > 0) err_ << "note: " << path << ": " << r.skipped << " rows skipped\n";
  }

  PhysicalGraph graph() {
    const auto cables = parse<std::vector<CableRecord>>("cables", input_path(opt_.cables, fixture_files::cables),
                                                        parse_cables);
    const auto borders = parse<std::vector<BorderRecord>>(
        "borders", input_path(opt_.borders, fixture_files::borders), parse_borders);
    return build_physical_graph(cables, borders);
  }
  AsnGraph asn_graph() {
    return parse<AsnGraph>("asrel", input_path(opt_.asrel, fixture_files::asn_graph), parse_caida);
  }
  std::vector<NodeSnapshot> snapshots(const std::string& role, const std::string& path) {
    auto snaps = parse<std::vector<NodeSnapshot>>(role, path, parse_snapshots);
    if (snaps.empty()) throw InputError(role + " file '" + path + "' holds no snapshot rows");
    return snaps;
  }
  NodeSnapshot snapshot() {
    const auto path = input_path(opt_.snapshot, fixture_files::snapshot);
    auto snaps = snapshots("snapshot", path);
    if (snaps.size() > 1) {
      err_ << "note: " << path << " holds " << snaps.size() << " timestamps; using the latest\n";
    }
    return std::move(snaps.back());
  }
  RelayTable relays() {
    return parse<RelayTable>("relays", input_path(opt_.relays, fixture_files::relays), parse_relays);
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir_);
    const auto path = fs::path(out_dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("failed writing " + path.string());
    outputs_.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
  }

  void write_json(const std::string& name, const ordered_json& doc) { write(name, doc.dump(2) + "\n"); }

  void finish(const ordered_json& config, std::chrono::steady_clock::time_point started) {
    ordered_json m;
    m["command"] = opt_.command;
    m["tool_version"] = kToolVersion;
    m["master_seed"] = *opt_.seed;
    m["config"] = config;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    m["runtime"] = {{"jobs", opt_.jobs}, {"wall_clock_seconds", elapsed}};
    fs::create_directories(out_dir_);
    std::ofstream out(fs::path(out_dir_) / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
    if (!out) throw InputError("failed writing manifest");
  }

  const std::string& out_dir() const { return out_dir_; }
  std::ostream& err() { return err_; }

 private:
  const Options& opt_;
  std::ostream& err_;
  std::string out_dir_;
  ordered_json inputs_ = ordered_json::array();
  ordered_json outputs_ = ordered_json::array();
};

CurveConfig curve_config(const Options& opt) {
  CurveConfig cfg;
  cfg.p_grid = CurveConfig::uniform_grid(opt.grid_step);
  cfg.trials = opt.trials;
  cfg.master_seed = *opt.seed;
  cfg.disconnection_threshold = opt.threshold;
  const auto strategy = parse_attack_strategy(opt.strategy);
  if (!strategy) throw InputError("unknown strategy '" + opt.strategy + "'");
  cfg.strategy = *strategy;
  const auto scope = parse_scope_mode(opt.scope);
  if (!scope) throw InputError("unknown scope '" + opt.scope + "'");
  cfg.cascade.scope_mode = *scope;
  cfg.cascade.node_failure_fraction = opt.relax_fraction;
  cfg.cascade.iterate_to_fixpoint = opt.fixpoint;
  cfg.cascade.cw_failure_threshold = opt.cw_threshold;
  if (opt.pc_statistic == "mean") {
    cfg.pc_statistic = PcStatistic::mean;
  } else if (opt.pc_statistic == "median") {
    cfg.pc_statistic = PcStatistic::median;
  } else {
    throw InputError("unknown p_c statistic '" + opt.pc_statistic + "'");
  }
  cfg.plan.betweenness_submarine_only = opt.submarine_only_betweenness;
  cfg.plan.adaptive_betweenness = opt.adaptive_betweenness;
  cfg.jobs = opt.jobs;
  cfg.validate();
  return cfg;
}

ordered_json config_json(const CurveConfig& cfg, const Options& opt) {
  ordered_json j;
  j["strategy"] = std::string(to_string(cfg.strategy));
  j["grid_step"] = opt.grid_step;
  j["grid_points"] = cfg.p_grid.size();
  j["trials"] = cfg.trials;
  j["threshold"] = cfg.disconnection_threshold;
  j["pc_statistic"] = opt.pc_statistic;
  j["scope"] = std::string(to_string(cfg.cascade.scope_mode));
  j["relax_fraction"] = cfg.cascade.node_failure_fraction;
  j["iterate_to_fixpoint"] = cfg.cascade.iterate_to_fixpoint;
  j["betweenness_submarine_only"] = cfg.plan.betweenness_submarine_only;
  j["adaptive_betweenness"] = cfg.plan.adaptive_betweenness;
  return j;
}

std::string curve_csv(const PercolationCurve& curve) {
  std::ostringstream s;
  s << "p,mean,std,stderr\n";
  for (const auto& pt : curve.points) {
    s << fixed6(pt.p) << ',' << fixed6(pt.mean) << ',' << fixed6(pt.stddev) << ',' << fixed6(pt.stderr_) << '\n';
  }
  return s.str();
}

TorScenario scenario_from(const Options& opt, TorScenarioKind kind) {
  TorScenario s;
  s.kind = kind;
  s.apportion = opt.apportion;
  return s;
}

using Clock = std::chrono::steady_clock;

void cmd_percolate(const Options& opt, Run& run) {
  const auto started = Clock::now();
  auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  std::optional<RelayTable> relays;
  if (cfg.cascade.scope_mode == ScopeMode::tor_via_relays) {
    relays = run.relays();
    cfg.cascade.layers = LayerModel::four_layer;
  }
  PercolationCurve curve;
  if (!opt.tor_scenario.empty()) {
    const auto kind = parse_tor_scenario(opt.tor_scenario);
    if (!kind) throw InputError("unknown tor scenario '" + opt.tor_scenario + "'");
    if (cfg.cascade.scope_mode != ScopeMode::full) throw InputError("--tor-scenario requires --scope full");
    const ScenarioScope scopes(scenario_from(opt, *kind), snap, graph, ScopeMode::full);
    curve = percolation_curve(cfg, graph, asn, scopes);
  } else {
    curve = percolation_curve(cfg, graph, asn, cascade_scope(snap, cfg.cascade.scope_mode),
                              relays ? &*relays : nullptr);
  }
  const auto pc = estimate_pc(curve, cfg.disconnection_threshold, cfg.pc_statistic);
  run.write("curve.csv", curve_csv(curve));

  ordered_json summary;
  summary["command"] = "percolate";
  summary["strategy"] = std::string(to_string(cfg.strategy));
  summary["p_c"] = pc_json(pc);
  summary["threshold"] = cfg.disconnection_threshold;
  summary["pc_statistic"] = opt.pc_statistic;
  summary["grid_step"] = opt.grid_step;
  summary["trials"] = cfg.trials;
  summary["scope"] = std::string(to_string(cfg.cascade.scope_mode));
  summary["scope_size"] = curve.scope_size;
  double max_stderr = 0.0;
  for (const auto& pt : curve.points) max_stderr = std::max(max_stderr, pt.stderr_);
  summary["max_stderr"] = max_stderr;
  run.write_json("summary.json", summary);

  auto config = config_json(cfg, opt);
  if (!opt.tor_scenario.empty()) config["tor_scenario"] = opt.tor_scenario;
  run.finish(config, started);
}

void cmd_pc_evolution(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  std::vector<std::string> files = opt.snapshots;
  if (files.empty()) files.push_back(run.input_path(opt.snapshot, fixture_files::evolution));
  std::vector<std::pair<std::string, NodeSnapshot>> labelled;
  for (const auto& f : files) {
    for (auto& s : run.snapshots("snapshot", f)) labelled.emplace_back(format_date(s.timestamp), std::move(s));
  }
  std::optional<RelayTable> relays;
  if (cfg.cascade.scope_mode == ScopeMode::tor_via_relays) throw InputError("pc-evolution does not take the tor_via_relays scope");
  const auto rows = pc_evolution(labelled, graph, asn, cfg, relays ? &*relays : nullptr);
  std::ostringstream s;
  s << "date,nodes,countries,asns,p_c\n";
  for (const auto& r : rows) {
    s << r.label << ',' << r.nodes << ',' << r.countries << ',' << r.asns << ','
      << (r.error.empty() ? format_pc(r.pc) : "error") << '\n';
  }
  run.write("evolution.csv", s.str());
  for (const auto& r : rows) {
    if (!r.error.empty()) run.err() << "warning: snapshot " << r.label << ": " << r.error << "\n";
  }
  run.finish(config_json(cfg, opt), started);
}

void cmd_attack_compare(const Options& opt, Run& run) {
  const auto started = Clock::now();
  auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  const auto scope = cascade_scope(snap, ScopeMode::clearnet_only);
  cfg.cascade.scope_mode = ScopeMode::clearnet_only;
  std::ostringstream s;
  s << "strategy,layer,p_c,metric\n";
  ordered_json strategies = ordered_json::array();
  for (auto strategy : {AttackStrategy::random, AttackStrategy::degree, AttackStrategy::betweenness,
                        AttackStrategy::asn_capacity}) {
    cfg.strategy = strategy;
    const auto curve = percolation_curve(cfg, graph, asn, scope);
    const auto pc = estimate_pc(curve, cfg.disconnection_threshold, cfg.pc_statistic);
    const bool cables = targets_cables(strategy);
    s << to_string(strategy) << ',' << (cables ? "L1" : "L2") << ',' << format_pc(pc) << ','
      << (cables ? "fraction_of_cables" : "fraction_of_asn_capacity") << '\n';
    run.write("curve_" + std::string(to_string(strategy)) + ".csv", curve_csv(curve));
    strategies.push_back(std::string(to_string(strategy)));
  }
  run.write("attack_compare.csv", s.str());
  auto config = config_json(cfg, opt);
  config.erase("strategy");
  config["strategies"] = strategies;
  run.finish(config, started);
}

void cmd_tor_bounds(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  const auto rows = tor_bounds_report(snap, graph, asn, cfg, kAllTorScenarios,
                                      scenario_from(opt, TorScenarioKind::clearnet_only));
  std::ostringstream s;
  s << "scenario,p_c\n";
  for (const auto& r : rows) s << to_string(r.scenario) << ',' << format_pc(r.pc) << '\n';
  run.write("tor_bounds.csv", s.str());
  auto config = config_json(cfg, opt);
  config["apportion"] = opt.apportion;
  config["tor_share"] = composition_stats(snap).tor_share;
  run.finish(config, started);
}

void cmd_four_layer(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  const auto relays = run.relays();
  const auto cmp = compare_layer_models(snap, graph, asn, relays, cfg);
  std::ostringstream s;
  s << "three_layer_p_c,four_layer_p_c,tor_share,delta\n";
  s << format_pc(cmp.three_layer) << ',' << format_pc(cmp.four_layer) << ',' << fixed6(cmp.tor_share) << ','
    << (cmp.delta ? fixed6(*cmp.delta) : "undefined") << '\n';
  run.write("four_layer.csv", s.str());
  auto config = config_json(cfg, opt);
  config["cw_threshold"] = opt.cw_threshold;
  run.finish(config, started);
}

void cmd_cw_sweep(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  const auto relays = run.relays();
  const auto rows = cw_threshold_sweep(snap, graph, asn, relays, cfg);
  std::ostringstream s;
  s << "cw_threshold,p_c\n";
  for (const auto& r : rows) s << fixed6(r.cw_threshold) << ',' << format_pc(r.pc) << '\n';
  run.write("cw_sweep.csv", s.str());
  run.finish(config_json(cfg, opt), started);
}

void cmd_sensitivity(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto cfg = curve_config(opt);
  const auto graph = run.graph();
  const auto asn = run.asn_graph();
  const auto snap = run.snapshot();
  const auto curve = percolation_curve(cfg, graph, asn, cascade_scope(snap, cfg.cascade.scope_mode));
  std::ostringstream s;
  s << "threshold,p_c\n";
  for (const auto& pc : threshold_sensitivity(curve, kSensitivityThresholds, cfg.pc_statistic)) {
    s << fixed6(pc.threshold) << ',' << format_pc(pc) << '\n';
  }
  run.write("sensitivity.csv", s.str());
  run.write("curve.csv", curve_csv(curve));
  run.finish(config_json(cfg, opt), started);
}

void cmd_validate_events(const Options& opt, Run& run) {
  const auto started = Clock::now();
  const auto graph = run.graph();
  const auto events = run.parse<std::vector<CableEvent>>(
      "events", run.input_path(opt.events, fixture_files::events), parse_events);
  const auto series = run.snapshots("series", run.input_path(opt.series, fixture_files::series));
  const auto price_path = run.input_path(opt.price, fixture_files::price);
  const auto result = match_events(events, series, opt.window_days, &graph);
  for (const auto& w : result.warnings) run.err() << "warning: " << w << "\n";

  ordered_json report;
  report["events"] = events.size();
  report["matched"] = result.matched.size();
  report["unmatched"] = result.unmatched;
  report["window_days"] = opt.window_days;
  if (!result.matched.empty()) {
    const auto st = impact_stats(result.matched);
    report["impact"] = {{"count", st.count},          {"share_below_5pct", st.share_below_5pct},
                        {"mean", st.mean},            {"median", st.median},
                        {"min", st.min},              {"max", st.max}};
    std::size_t undefined_regional = 0;
    for (const auto& m : result.matched) undefined_regional += m.regional_impact ? 0 : 1;
    report["regional_impact_undefined"] = undefined_regional;
  } else {
    report["impact"] = nullptr;
  }
  if (!price_path.empty()) {
    const auto prices = run.parse<std::vector<PricePoint>>("price", price_path, parse_price);
    const auto pc = price_correlation(result.matched, prices, opt.horizon_days);
    report["correlation"] = {{"n", pc.stats.n},
                             {"r", pc.stats.r},
                             {"p_value", pc.stats.p_value},
                             {"ci95", {pc.stats.ci_low, pc.stats.ci_high}},
                             {"horizon_days", pc.horizon_days},
                             {"skipped", pc.skipped}};
  }
  const auto snap_path = run.input_path(opt.snapshot, fixture_files::snapshot);
  if (!snap_path.empty()) {
    auto snaps = run.snapshots("snapshot", snap_path);
    const auto cm = concentration_metrics(snaps.back(), opt.include_tor);
    ordered_json top = ordered_json::array();
    for (std::size_t i = 0; i < cm.shares.size() && i < 5; ++i) {
      top.push_back({{"provider", cm.shares[i].first}, {"share", cm.shares[i].second}});
    }
    report["concentration"] = {{"hhi", cm.hhi}, {"top5_share", cm.top5_share}, {"include_tor", opt.include_tor},
                               {"nodes", cm.total}, {"top5", top}};
  }
  run.write_json("validation.json", report);
  std::ostringstream csv;
  write_matched_csv(csv, result.matched);
  run.write("events.csv", csv.str());
  ordered_json config;
  config["window_days"] = opt.window_days;
  config["horizon_days"] = opt.horizon_days;
  config["include_tor"] = opt.include_tor;
  run.finish(config, started);
}

void cmd_gen_fixture(const Options& opt, Run& run) {
  const auto started = Clock::now();
  auto spec = FixtureSpec::named(opt.profile);
  spec.seed = *opt.seed;
  if (opt.tor_share) spec.tor_share = *opt.tor_share;
  if (!opt.relay_policy.empty()) {
    const auto policy = parse_relay_policy(opt.relay_policy);
    if (!policy) throw InputError("unknown relay policy '" + opt.relay_policy + "'");
    spec.relay_policy = *policy;
  }
  const auto bundle = generate_fixture(spec);
  const auto paths = write_fixture(bundle, run.out_dir());
  ordered_json config;
  config["profile"] = spec.profile;
  config["tor_share"] = spec.tor_share;
  config["relay_policy"] = std::string(to_string(spec.relay_policy));
  ordered_json files = ordered_json::array();
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.push_back({{"file", p.filename().string()}, {"sha256", sha256_hex(ss.str())}});
  }
  config["files"] = files;
  run.finish(config, started);
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--seed", opt.seed, "Master seed (required)")->required();
  sub->add_option("--out", opt.out_dir, std::string("Output directory (default $") + kOutEnvVar + " or ./out)");
  sub->add_option("--jobs", opt.jobs, "Worker threads (default: hardware concurrency)");
}

void add_graph_inputs(CLI::App* sub, Options& opt) {
  sub->add_option("--data", opt.data_dir, "Bundle directory supplying default input paths");
  sub->add_option("--cables", opt.cables, "Cables CSV");
  sub->add_option("--borders", opt.borders, "Borders CSV");
  sub->add_option("--asrel", opt.asrel, "CAIDA AS relationships");
}

void add_simulation(CLI::App* sub, Options& opt, bool strategy = true) {
  if (strategy) sub->add_option("--strategy", opt.strategy, "random|degree|betweenness|asn_capacity");
  sub->add_option("--grid-step", opt.grid_step, "Removal fraction grid step");
  sub->add_option("--trials", opt.trials, "Monte Carlo trials");
  sub->add_option("--threshold", opt.threshold, "Disconnection threshold for p_c");
  sub->add_option("--relax-fraction", opt.relax_fraction, "Failure probability for disconnected nodes");
  sub->add_option("--pc-statistic", opt.pc_statistic, "mean|median");
  sub->add_flag("--fixpoint", opt.fixpoint, "Iterate the cascade to a fixpoint");
  sub->add_flag("--betweenness-submarine-only", opt.submarine_only_betweenness,
                "Rank betweenness on the submarine graph only");
  sub->add_flag("--adaptive-betweenness", opt.adaptive_betweenness, "Recompute betweenness after each cut");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Submarine-cable cascade simulator for Bitcoin node reachability", "subsea"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* percolate = app.add_subcommand("percolate", "One percolation curve");
  add_common(percolate, opt);
  add_graph_inputs(percolate, opt);
  add_simulation(percolate, opt);
  percolate->add_option("--snapshot", opt.snapshot, "Snapshot CSV");
  percolate->add_option("--relays", opt.relays, "Relays JSON (tor_via_relays scope)");
  percolate->add_option("--scope", opt.scope, "clearnet_only|full|tor_via_relays");
  percolate->add_option("--tor-scenario", opt.tor_scenario, "Tor placement scenario for --scope full");
  percolate->add_flag("--apportion", opt.apportion, "Deterministic tor apportionment");
  percolate->add_option("--cw-threshold", opt.cw_threshold, "Relay weight failure threshold");

  auto* evolution = app.add_subcommand("pc-evolution", "p_c across snapshots");
  add_common(evolution, opt);
  add_graph_inputs(evolution, opt);
  add_simulation(evolution, opt);
  evolution->add_option("--snapshot", opt.snapshots, "Snapshot CSV (repeatable; each timestamp is a row)");

  auto* compare = app.add_subcommand("attack-compare", "p_c for every attack strategy");
  add_common(compare, opt);
  add_graph_inputs(compare, opt);
  add_simulation(compare, opt, false);
  compare->add_option("--snapshot", opt.snapshot, "Snapshot CSV");

  auto* bounds = app.add_subcommand("tor-bounds", "p_c under each tor placement scenario");
  add_common(bounds, opt);
  add_graph_inputs(bounds, opt);
  add_simulation(bounds, opt);
  bounds->add_option("--snapshot", opt.snapshot, "Snapshot CSV");
  bounds->add_flag("--apportion", opt.apportion, "Deterministic tor apportionment");

  auto* four = app.add_subcommand("four-layer", "Three-layer against four-layer p_c");
  add_common(four, opt);
  add_graph_inputs(four, opt);
  add_simulation(four, opt);
  four->add_option("--snapshot", opt.snapshot, "Snapshot CSV");
  four->add_option("--relays", opt.relays, "Relays JSON");
  four->add_option("--cw-threshold", opt.cw_threshold, "Relay weight failure threshold");

  auto* sweep = app.add_subcommand("cw-sweep", "Four-layer p_c across relay weight thresholds");
  add_common(sweep, opt);
  add_graph_inputs(sweep, opt);
  add_simulation(sweep, opt);
  sweep->add_option("--snapshot", opt.snapshot, "Snapshot CSV");
  sweep->add_option("--relays", opt.relays, "Relays JSON");

  auto* sens = app.add_subcommand("sensitivity", "p_c across disconnection thresholds");
  add_common(sens, opt);
  add_graph_inputs(sens, opt);
  add_simulation(sens, opt);
  sens->add_option("--snapshot", opt.snapshot, "Snapshot CSV");
  sens->add_option("--scope", opt.scope, "clearnet_only|full");

  auto* validate = app.add_subcommand("validate-events", "Event matching, impact and price statistics");
  add_common(validate, opt);
  add_graph_inputs(validate, opt);
  validate->add_option("--events", opt.events, "Events CSV");
  validate->add_option("--series", opt.series, "Snapshot series CSV");
  validate->add_option("--price", opt.price, "Price CSV");
  validate->add_option("--snapshot", opt.snapshot, "Snapshot CSV for concentration metrics");
  validate->add_option("--window", opt.window_days, "Matching window in days");
  validate->add_option("--horizon", opt.horizon_days, "Price return horizon in days");
  validate->add_flag("--include-tor", opt.include_tor, "Count tor nodes as one concentration bucket");

  auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic input bundle");
  add_common(gen, opt);
  gen->add_option("--profile", opt.profile, "core-periphery-225|minimal");
  gen->add_option("--tor-share", opt.tor_share, "Override the tor share");
  gen->add_option("--relay-policy", opt.relay_policy, "core3|leaf|spread");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  opt.command = app.get_subcommands().front()->get_name();
  if (opt.jobs == 0) opt.jobs = std::max(1u, std::thread::hardware_concurrency());
  try {
    Run run(opt, err);
    if (opt.command == "percolate") cmd_percolate(opt, run);
    else if (opt.command == "pc-evolution") cmd_pc_evolution(opt, run);
    else if (opt.command == "attack-compare") cmd_attack_compare(opt, run);
    else if (opt.command == "tor-bounds") cmd_tor_bounds(opt, run);
    else if (opt.command == "four-layer") cmd_four_layer(opt, run);
    else if (opt.command == "cw-sweep") cmd_cw_sweep(opt, run);
    else if (opt.command == "sensitivity") cmd_sensitivity(opt, run);
    else if (opt.command == "validate-events") cmd_validate_events(opt, run);
    else if (opt.command == "gen-fixture") cmd_gen_fixture(opt, run);
    out << "wrote " << run.out_dir() << "\n";
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace subsea
