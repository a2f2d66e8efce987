#include <doctest.h>

#include <filesystem>

#include "qkdn/config.hpp"
#include "qkdn/errors.hpp"
#include "qkdn/io.hpp"

using namespace qkdn;

namespace {

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("defaults carry the experiment parameters") {
  const auto c = default_config();
  const auto& p = c.params;
  CHECK(c.topology.nodes == 20);
  CHECK(c.topology.gateway_at == 19);
  CHECK(c.link_delay == milliseconds(2));
  CHECK(c.loss_probability == 0.0);
  CHECK(p.total_time == seconds(400));
  CHECK(p.ne.arrival_rate_kbps == 10000);
  CHECK(p.ne.packet_size == 800);
  CHECK(p.ne.encryption_latency == SimTime::from_ms(0.018));
  CHECK(p.ne.key_lifetime == SimTime::from_s(0.24));
  CHECK(p.ne.cache_capacity == 3);
  CHECK(p.ne.refill_threshold == 0);
  CHECK(p.ne.keys_per_request == 3);
  CHECK(p.ne.packet_interval() == microseconds(640));
  CHECK(p.kms.encryption_latency == SimTime::from_ms(0.018));
  CHECK(p.kms.link_status_period == seconds(60));
  CHECK(p.kms.setup_threshold == 1);
  CHECK(p.kms.cm_packet_to_key_ratio == 1);
  CHECK(!p.kms.ack_consumes_key);
  CHECK(p.routing_update_period == seconds(60));
  CHECK(p.channel.backoff_mean == seconds(3));
  CHECK(p.qkd.key_size == 256);
  CHECK(p.qkd.jitter == 0.05);
  CHECK(c.key_rates == std::vector<double>{10, 25, 50, 100, 200, 340, 500});
  CHECK(c.scenarios == std::vector<char>{'A', 'B', 'C', 'D'});
  CHECK(parse_config("") == c);
}

TEST_CASE("scenario mapping") {
  CHECK(scenario('A').architecture == CmArchitecture::separately_protected);
  CHECK(scenario('A').routing == RoutingKind::distributed_proactive);
  CHECK(scenario('B').architecture == CmArchitecture::separately_protected);
  CHECK(scenario('B').routing == RoutingKind::source_reactive);
  CHECK(scenario('C').architecture == CmArchitecture::cm_via_kms);
  CHECK(scenario('C').routing == RoutingKind::distributed_proactive);
  CHECK(scenario('D').architecture == CmArchitecture::cm_via_kms);
  CHECK(scenario('D').routing == RoutingKind::source_reactive);
  CHECK_THROWS_AS(scenario('E'), ParameterError);
}

TEST_CASE("dump and parse round trip") {
  CHECK(parse_config(dump_config(default_config())) == default_config());
  CHECK(parse_config(dump_config(padua_config())) == padua_config());

  ScenarioConfig c = default_config();
  c.scenarios = {'D'};
  c.key_rates = {50, 100, 200, 340, 400};
  c.seeds = {1, 2, 3};
  c.params.effective_time = SimTime::from_s(12.5);
  c.params.kms.link_status_period = SimTime::max();
  c.params.ne.key_lifetime = SimTime::from_s(0.123456789);
  c.params.traffic.pattern = TrafficPattern::explicit_sessions;
  c.params.traffic.sessions = {{1, 2, true}, {3, 4, false}};
  c.loss_probability = 0.125;
  c.cutoff_factor = 1.5;
  c.output_dir = "out dir";
  c.params.record_traces = true;
  CHECK(parse_config(dump_config(c)) == c);
}

TEST_CASE("partial configs override defaults only where given") {
  const auto c = parse_config(
      "scenario: C\n"
      "key_rates: [100, 200, 300]\n"
      "seeds: [7]\n"
      "kms:\n"
      "  cm_packet_to_key_ratio: 375\n"
      "channel:\n"
      "  delay_ms: 5\n");
  CHECK(c.scenarios == std::vector<char>{'C'});
  CHECK(c.key_rates.size() == 3);
  CHECK(c.seeds == std::vector<std::uint64_t>{7});
  CHECK(c.params.kms.cm_packet_to_key_ratio == 375);
  CHECK(c.link_delay == milliseconds(5));
  CHECK(c.params.ne == default_config().params.ne);

  const auto explicit_pair = parse_config("architecture: cm_via_kms\nrouting: source_reactive\n");
  const auto s = explicit_pair.resolved_scenarios();
  REQUIRE(s.size() == 1);
  CHECK(s[0].architecture == CmArchitecture::cm_via_kms);
  CHECK(s[0].routing == RoutingKind::source_reactive);

  const auto padua = parse_config("preset: padua\nseeds: [1, 2]\n");
  CHECK(padua.topology.kind == TopologyKind::padua);
  CHECK(padua.seeds.size() == 2);
}

TEST_CASE("errors point at the offending line") {
  CHECK(error_line("seeds: [1]\nkms:\n  bogus: 3\n") == 3);
  CHECK(error_line("scenarios: [A, X]\n") == 1);
  CHECK(error_line("seeds: [1]\n\nnetwork_encryptor:\n  cache_capacity: lots\n") == 4);
  CHECK(error_line("qkd: [1, 2]\n") == 1);
  CHECK(error_line("key_rates: [10, 5, 20]\n") >= 0);
  CHECK(error_line("a: [unclosed\n") > 0);
  CHECK_THROWS_AS(parse_config("traffic:\n  pattern: chaos\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("channel:\n  loss_probability: 2\n"), ConfigError);
}

TEST_CASE("topology files resolve relative to the config") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "qkdn-config-test";
  fs::remove_all(dir);
  save_topology(padua_topology(), (dir / "graphs" / "p.yaml").string());
  write_file_atomic((dir / "c.yaml").string(),
                    "topology:\n  file: graphs/p.yaml\n  gateway_at: 1\nkey_rates: []\n");
  const auto c = load_config((dir / "c.yaml").string());
  CHECK(c.topology.kind == TopologyKind::file);
  const auto t = build_topology(c, scenario('C'), std::nullopt);
  CHECK(t.km_nodes().size() == 5);
  CHECK(t.links[*t.find_link(3, 6)].key_rate == 390);
  const auto swept = build_topology(c, scenario('A'), 77.0);
  for (const auto& l : swept.links) CHECK(l.key_rate == 77.0);

  write_file_atomic((dir / "missing.yaml").string(), "topology:\n  file: nowhere.yaml\n");
  const auto m = load_config((dir / "missing.yaml").string());
  CHECK_THROWS_AS(build_topology(m, scenario('A'), 10.0), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "absent.yaml").string()), ConfigError);
  fs::remove_all(dir);
}
