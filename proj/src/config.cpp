#include "qkdn/config.hpp"

#include <filesystem>

#include <fmt/format.h>

#include "qkdn/errors.hpp"
#include "qkdn/io.hpp"
#include "yaml_util.hpp"

namespace qkdn {

std::vector<Scenario> ScenarioConfig::resolved_scenarios() const {
  std::vector<Scenario> out;
  if (scenarios.empty()) {
    out.push_back({'-', params.architecture, params.routing});
  } else {
    for (char c : scenarios) out.push_back(scenario(c));
  }
  return out;
}

void ScenarioConfig::validate() const {
  for (char c : scenarios) scenario(c);
  if (seeds.empty()) throw ParameterError("at least one seed is required");
  for (double r : key_rates) {
    if (!(r > 0.0)) throw ParameterError("key rates must be positive");
  }
  for (std::size_t i = 1; i < key_rates.size(); ++i) {
    if (!(key_rates[i] > key_rates[i - 1])) throw ParameterError("key rates must be ascending");
  }
  if (link_delay <= SimTime::zero()) throw ParameterError("link delay must be positive");
  if (!(loss_probability >= 0.0 && loss_probability <= 1.0)) {
    throw ParameterError("loss probability must lie in [0,1]");
  }
  if (!(cutoff_factor > 1.0)) throw ParameterError("cut-off factor must exceed 1");
  if (topology.kind == TopologyKind::internet_like && topology.nodes < 3) {
    throw ParameterError("generated topologies need at least 3 nodes");
  }
  if (topology.kind == TopologyKind::file && topology.file.empty()) {
    throw ParameterError("topology file not set");
  }
  params.validate();
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

ScenarioConfig padua_config() {
  ScenarioConfig c;
  c.scenarios = {'B'};
  c.params.architecture = CmArchitecture::separately_protected;
  c.params.routing = RoutingKind::source_reactive;
  c.topology.kind = TopologyKind::padua;
  c.topology.gateway_at = 1;
  c.key_rates.clear();
  c.params.effective_time = seconds(115);
  c.params.setup_includes_sessions = true;
  c.params.traffic.pattern = TrafficPattern::explicit_sessions;
  c.params.traffic.sessions = {{1, 6, true}};
  c.params.traffic.phase_offsets = false;
  return c;
}

namespace {

SimTime secs(const YAML::Node& map, const char* key, SimTime fallback) {
  const YAML::Node n = map[key];
  if (!n || n.IsNull()) return fallback;
  if (n.IsScalar() && (n.Scalar() == "inf" || n.Scalar() == "never")) return SimTime::max();
  const double v = yaml::as<double>(n, key);
  if (!(v >= 0.0) || v > 9.2e9) throw ConfigError(fmt::format("'{}' out of range", key), yaml::line_of(n));
  return SimTime::from_s(v);
}

SimTime millis(const YAML::Node& map, const char* key, SimTime fallback) {
  const YAML::Node n = map[key];
  if (!n || n.IsNull()) return fallback;
  const double v = yaml::as<double>(n, key);
  if (!(v >= 0.0) || v > 9.2e12) throw ConfigError(fmt::format("'{}' out of range", key), yaml::line_of(n));
  return SimTime::from_ms(v);
}

std::string time_s(SimTime t) { return t.is_max() ? "inf" : format_double(t.seconds()); }
std::string time_ms(SimTime t) { return format_double(t.ms()); }

YAML::Node section(const YAML::Node& root, const char* key) {
  const YAML::Node n = root[key];
  if (n && !n.IsNull()) yaml::expect_map(n, key);
  return n;
}

char parse_label(const YAML::Node& n) {
  const auto s = yaml::as<std::string>(n, "scenario");
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'D') {
    throw ConfigError("scenario labels are A, B, C or D", yaml::line_of(n));
  }
  return s[0];
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir) {
  const YAML::Node root = yaml::parse_text(text);
  ScenarioConfig c = default_config();
  if (!root || root.IsNull()) return c;
  yaml::expect_map(root, "config");
  yaml::reject_unknown(root,
                       {"preset", "scenario", "scenarios", "architecture", "routing", "topology",
                        "key_rate", "key_rates", "seed", "seeds", "output_dir", "workers",
                        "simulation", "qkd", "kms", "network_encryptor", "channel", "traffic",
                        "metrics"},
                       "config");

  if (const auto n = root["preset"]) {
    const auto preset = yaml::as<std::string>(n, "preset");
    if (preset == "padua") {
      c = padua_config();
    } else if (preset != "experiment") {
      throw ConfigError("unknown preset '" + preset + "'", yaml::line_of(n));
    }
  }

  if (const auto n = root["scenario"]) c.scenarios = {parse_label(n)};
  if (const auto n = root["scenarios"]) {
    yaml::expect_sequence(n, "scenarios");
    c.scenarios.clear();
    for (const auto& item : n) c.scenarios.push_back(parse_label(item));
  }
  if (const auto n = root["architecture"]) {
    const auto s = yaml::as<std::string>(n, "architecture");
    const auto a = parse_architecture(s);
    if (!a) throw ConfigError("unknown architecture '" + s + "'", yaml::line_of(n));
    c.params.architecture = *a;
  }
  if (const auto n = root["routing"]) {
    const auto s = yaml::as<std::string>(n, "routing");
    const auto r = parse_routing(s);
    if (!r) throw ConfigError("unknown routing protocol '" + s + "'", yaml::line_of(n));
    c.params.routing = *r;
  }
  if ((root["architecture"] || root["routing"]) && !root["scenario"] && !root["scenarios"]) {
    c.scenarios.clear();
  }

  if (const auto t = section(root, "topology")) {
    yaml::reject_unknown(t, {"generator", "nodes", "seed", "file", "gateway_at"}, "topology");
    if (const auto g = t["generator"]) {
      const auto s = yaml::as<std::string>(g, "generator");
      if (s == "internet_like") {
        c.topology.kind = TopologyKind::internet_like;
      } else if (s == "padua") {
        c.topology.kind = TopologyKind::padua;
      } else if (s == "file") {
        c.topology.kind = TopologyKind::file;
      } else {
        throw ConfigError("unknown generator '" + s + "'", yaml::line_of(g));
      }
    }
    c.topology.nodes = yaml::get<int>(t, "nodes", c.topology.nodes);
    c.topology.seed = yaml::get<std::uint64_t>(t, "seed", c.topology.seed);
    c.topology.gateway_at = yaml::get<int>(t, "gateway_at", c.topology.gateway_at);
    if (const auto f = t["file"]) {
      std::filesystem::path p = yaml::as<std::string>(f, "file");
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.topology.file = p.lexically_normal().string();
      if (!t["generator"]) c.topology.kind = TopologyKind::file;
    }
  }

  if (const auto n = root["key_rate"]) c.key_rates = {yaml::as<double>(n, "key_rate")};
  if (const auto n = root["key_rates"]) {
    if (n.IsNull()) {
      c.key_rates.clear();
    } else {
      yaml::expect_sequence(n, "key_rates");
      c.key_rates.clear();
      for (const auto& item : n) c.key_rates.push_back(yaml::as<double>(item, "key_rates"));
    }
  }
  if (const auto n = root["seed"]) c.seeds = {yaml::as<std::uint64_t>(n, "seed")};
  if (const auto n = root["seeds"]) {
    yaml::expect_sequence(n, "seeds");
    c.seeds.clear();
    for (const auto& item : n) c.seeds.push_back(yaml::as<std::uint64_t>(item, "seeds"));
  }
  c.output_dir = yaml::get<std::string>(root, "output_dir", c.output_dir);
  c.workers = yaml::get<unsigned>(root, "workers", c.workers);

  NetworkParams& p = c.params;
  if (const auto s = section(root, "simulation")) {
    yaml::reject_unknown(s, {"total_time_s", "effective_time_s", "routing_update_period_s",
                             "queue_sample_interval_s", "setup_includes_sessions", "record_traces"},
                         "simulation");
    p.total_time = secs(s, "total_time_s", p.total_time);
    if (const auto e = s["effective_time_s"]) {
      if (e.IsNull()) {
        p.effective_time.reset();
      } else {
        p.effective_time = secs(s, "effective_time_s", SimTime::zero());
      }
    }
    p.routing_update_period = secs(s, "routing_update_period_s", p.routing_update_period);
    p.queue_sample_interval = secs(s, "queue_sample_interval_s", p.queue_sample_interval);
    p.setup_includes_sessions =
        yaml::get<bool>(s, "setup_includes_sessions", p.setup_includes_sessions);
    p.record_traces = yaml::get<bool>(s, "record_traces", p.record_traces);
  }
  if (const auto s = section(root, "qkd")) {
    yaml::reject_unknown(s, {"jitter", "post_processing_s", "key_size_bits", "tick_s", "random_phase"},
                         "qkd");
    p.qkd.jitter = yaml::get<double>(s, "jitter", p.qkd.jitter);
    p.qkd.post_processing = secs(s, "post_processing_s", p.qkd.post_processing);
    p.qkd.key_size = yaml::get<std::uint32_t>(s, "key_size_bits", p.qkd.key_size);
    p.qkd.tick = secs(s, "tick_s", p.qkd.tick);
    p.qkd.random_phase = yaml::get<bool>(s, "random_phase", p.qkd.random_phase);
  }
  if (const auto s = section(root, "kms")) {
    yaml::reject_unknown(s, {"storage_size", "encryption_latency_ms", "link_status_period_s",
                             "setup_threshold", "ack_consumes_key", "cm_packet_to_key_ratio"},
                         "kms");
    p.kms.storage_size = yaml::get<std::uint64_t>(s, "storage_size", p.kms.storage_size);
    p.kms.encryption_latency = millis(s, "encryption_latency_ms", p.kms.encryption_latency);
    p.kms.link_status_period = secs(s, "link_status_period_s", p.kms.link_status_period);
    p.kms.setup_threshold = yaml::get<std::uint32_t>(s, "setup_threshold", p.kms.setup_threshold);
    p.kms.ack_consumes_key = yaml::get<bool>(s, "ack_consumes_key", p.kms.ack_consumes_key);
    p.kms.cm_packet_to_key_ratio =
        yaml::get<std::uint32_t>(s, "cm_packet_to_key_ratio", p.kms.cm_packet_to_key_ratio);
  }
  if (const auto s = section(root, "network_encryptor")) {
    yaml::reject_unknown(s, {"arrival_rate_kbps", "packet_size_bytes", "encryption_latency_ms",
                             "key_lifetime_s", "cache_capacity", "refill_threshold",
                             "keys_per_request", "retry_mean_s"},
                         "network_encryptor");
    p.ne.arrival_rate_kbps = yaml::get<double>(s, "arrival_rate_kbps", p.ne.arrival_rate_kbps);
    p.ne.packet_size = yaml::get<std::uint32_t>(s, "packet_size_bytes", p.ne.packet_size);
    p.ne.encryption_latency = millis(s, "encryption_latency_ms", p.ne.encryption_latency);
    p.ne.key_lifetime = secs(s, "key_lifetime_s", p.ne.key_lifetime);
    p.ne.cache_capacity = yaml::get<std::uint32_t>(s, "cache_capacity", p.ne.cache_capacity);
    p.ne.refill_threshold = yaml::get<std::uint32_t>(s, "refill_threshold", p.ne.refill_threshold);
    p.ne.keys_per_request = yaml::get<std::uint32_t>(s, "keys_per_request", p.ne.keys_per_request);
    p.ne.retry_mean = secs(s, "retry_mean_s", p.ne.retry_mean);
  }
  if (const auto s = section(root, "channel")) {
    yaml::reject_unknown(s, {"delay_ms", "loss_probability", "backoff_mean_s", "full_duplex"},
                         "channel");
    c.link_delay = millis(s, "delay_ms", c.link_delay);
    c.loss_probability = yaml::get<double>(s, "loss_probability", c.loss_probability);
    p.channel.backoff_mean = secs(s, "backoff_mean_s", p.channel.backoff_mean);
    p.channel.full_duplex = yaml::get<bool>(s, "full_duplex", p.channel.full_duplex);
  }
  if (const auto s = section(root, "traffic")) {
    yaml::reject_unknown(s, {"pattern", "phase_offsets", "sessions"}, "traffic");
    if (const auto n = s["pattern"]) {
      const auto v = yaml::as<std::string>(n, "pattern");
      const auto tp = parse_traffic_pattern(v);
      if (!tp) throw ConfigError("unknown traffic pattern '" + v + "'", yaml::line_of(n));
      p.traffic.pattern = *tp;
    }
    p.traffic.phase_offsets = yaml::get<bool>(s, "phase_offsets", p.traffic.phase_offsets);
    if (const auto n = s["sessions"]) {
      yaml::expect_sequence(n, "sessions");
      p.traffic.sessions.clear();
      for (const auto& item : n) {
        yaml::expect_map(item, "session");
        yaml::reject_unknown(item, {"master", "slave", "bidirectional"}, "session");
        SessionSpec ss;
        ss.master = yaml::require<int>(item, "master");
        ss.slave = yaml::require<int>(item, "slave");
        ss.bidirectional = yaml::get<bool>(item, "bidirectional", false);
        p.traffic.sessions.push_back(ss);
      }
      if (!s["pattern"]) p.traffic.pattern = TrafficPattern::explicit_sessions;
    }
  }
  if (const auto s = section(root, "metrics")) {
    yaml::reject_unknown(s, {"cutoff_factor"}, "metrics");
    c.cutoff_factor = yaml::get<double>(s, "cutoff_factor", c.cutoff_factor);
  }

  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what(), yaml::line_of(root));
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::filesystem::path(path).parent_path().string());
}

std::string dump_config(const ScenarioConfig& c) {
  const NetworkParams& p = c.params;
  std::string o;
  auto list = [](const auto& v, auto fmt_one) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_one(v[i]);
    return s + "]";
  };
  o += "# Effective configuration. Durations carry their unit in the key name.\n";
  o += fmt::format("scenarios: {}\n", list(c.scenarios, [](char x) { return std::string(1, x); }));
  o += fmt::format("architecture: {}\n", to_string(p.architecture));
  o += fmt::format("routing: {}\n", to_string(p.routing));
  o += "topology:\n";
  switch (c.topology.kind) {
    case TopologyKind::internet_like: o += "  generator: internet_like\n"; break;
    case TopologyKind::padua: o += "  generator: padua\n"; break;
    case TopologyKind::file: o += "  generator: file\n"; break;
  }
  o += fmt::format("  nodes: {}\n  seed: {}\n  gateway_at: {}\n", c.topology.nodes,
                   c.topology.seed, c.topology.gateway_at);
  if (!c.topology.file.empty()) o += fmt::format("  file: \"{}\"\n", c.topology.file);
  o += fmt::format("key_rates: {}\n", list(c.key_rates, [](double x) { return format_double(x); }));
  o += fmt::format("seeds: {}\n", list(c.seeds, [](std::uint64_t x) { return std::to_string(x); }));
  o += fmt::format("output_dir: \"{}\"\n", c.output_dir);
  o += fmt::format("workers: {}\n", c.workers);
  o += "simulation:\n";
  o += fmt::format("  total_time_s: {}\n", time_s(p.total_time));
  o += fmt::format("  effective_time_s: {}\n", p.effective_time ? time_s(*p.effective_time) : "null");
  o += fmt::format("  routing_update_period_s: {}\n", time_s(p.routing_update_period));
  o += fmt::format("  queue_sample_interval_s: {}\n", time_s(p.queue_sample_interval));
  o += fmt::format("  setup_includes_sessions: {}\n", p.setup_includes_sessions);
  o += fmt::format("  record_traces: {}\n", p.record_traces);
  o += "qkd:\n";
  o += fmt::format("  jitter: {}\n", format_double(p.qkd.jitter));
  o += fmt::format("  post_processing_s: {}\n", time_s(p.qkd.post_processing));
  o += fmt::format("  key_size_bits: {}\n", p.qkd.key_size);
  o += fmt::format("  tick_s: {}\n", time_s(p.qkd.tick));
  o += fmt::format("  random_phase: {}\n", p.qkd.random_phase);
  o += "kms:\n";
  o += fmt::format("  storage_size: {}\n", p.kms.storage_size);
  o += fmt::format("  encryption_latency_ms: {}\n", time_ms(p.kms.encryption_latency));
  o += fmt::format("  link_status_period_s: {}\n", time_s(p.kms.link_status_period));
  o += fmt::format("  setup_threshold: {}\n", p.kms.setup_threshold);
  o += fmt::format("  ack_consumes_key: {}\n", p.kms.ack_consumes_key);
  o += fmt::format("  cm_packet_to_key_ratio: {}\n", p.kms.cm_packet_to_key_ratio);
  o += "network_encryptor:\n";
  o += fmt::format("  arrival_rate_kbps: {}\n", format_double(p.ne.arrival_rate_kbps));
  o += fmt::format("  packet_size_bytes: {}\n", p.ne.packet_size);
  o += fmt::format("  encryption_latency_ms: {}\n", time_ms(p.ne.encryption_latency));
  o += fmt::format("  key_lifetime_s: {}\n", time_s(p.ne.key_lifetime));
  o += fmt::format("  cache_capacity: {}\n", p.ne.cache_capacity);
  o += fmt::format("  refill_threshold: {}\n", p.ne.refill_threshold);
  o += fmt::format("  keys_per_request: {}\n", p.ne.keys_per_request);
  o += fmt::format("  retry_mean_s: {}\n", time_s(p.ne.retry_mean));
  o += "channel:\n";
  o += fmt::format("  delay_ms: {}\n", time_ms(c.link_delay));
  o += fmt::format("  loss_probability: {}\n", format_double(c.loss_probability));
  o += fmt::format("  backoff_mean_s: {}\n", time_s(p.channel.backoff_mean));
  o += fmt::format("  full_duplex: {}\n", p.channel.full_duplex);
  o += "traffic:\n";
  o += fmt::format("  pattern: {}\n", to_string(p.traffic.pattern));
  o += fmt::format("  phase_offsets: {}\n", p.traffic.phase_offsets);
  if (p.traffic.sessions.empty()) {
    o += "  sessions: []\n";
  } else {
    o += "  sessions:\n";
    for (const auto& s : p.traffic.sessions) {
      o += fmt::format("    - {{master: {}, slave: {}, bidirectional: {}}}\n", s.master, s.slave,
                       s.bidirectional);
    }
  }
  o += "metrics:\n";
  o += fmt::format("  cutoff_factor: {}\n", format_double(c.cutoff_factor));
  return o;
}

TopologySpec build_topology(const ScenarioConfig& c, const Scenario& s,
                            std::optional<double> key_rate) {
  LinkDefaults d;
  d.delay = c.link_delay;
  d.loss_probability = c.loss_probability;
  if (key_rate) d.key_rate = *key_rate;
  TopologySpec t;
  switch (c.topology.kind) {
    case TopologyKind::internet_like:
      t = generate_internet_like(c.topology.nodes, c.topology.seed, d);
      break;
    case TopologyKind::padua:
      t = padua_topology(d);
      break;
    case TopologyKind::file:
      try {
        t = load_topology(c.topology.file);
      } catch (const ConfigError& e) {
        throw ConfigError(c.topology.file + ": " + e.what());
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      break;
  }
  if (key_rate) {
    for (auto& l : t.links) l.key_rate = *key_rate;
  }
  if (t.controller()) {
    throw ParameterError("the topology already carries a controller; it is attached per scenario");
  }
  return attach_controller(std::move(t), s.architecture, c.topology.gateway_at);
}

NetworkParams make_params(const ScenarioConfig& c, const Scenario& s, std::uint64_t seed) {
  NetworkParams p = c.params;
  p.architecture = s.architecture;
  p.routing = s.routing;
  p.seed = seed;
  return p;
}

}  // namespace qkdn
