#include "qkdn/report.hpp"

#include <cmath>
#include <filesystem>

#include <fmt/format.h>
#include <json.hpp>

#include "qkdn/io.hpp"

namespace qkdn {

namespace {

using nlohmann::json;

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string csv_header(const char* name) {
  return fmt::format("# qkdn {} schema {}\n", name, kCsvSchema);
}

std::string rate_text(const std::optional<double>& r) { return r ? format_double(*r) : ""; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string metric_columns() {
  std::string s;
  for (Metric m : kAllMetrics) s += fmt::format(",{}", to_string(m));
  return s;
}

std::string metric_cells(const RunMetrics& m) {
  std::string s;
  for (Metric x : kAllMetrics) s += "," + cell(m.get(x));
  return s;
}

}  // namespace

std::string sweep_csv(const ScenarioSweep& sweep) {
  std::string o = csv_header("sweep");
  o += "scenario,key_rate_kps" + metric_columns();
  for (Metric m : kAllMetrics) {
    o += fmt::format(",{0}_node_min,{0}_node_max", to_string(m));
  }
  o += "\n";
  for (const auto& p : sweep.mean.points) {
    o += fmt::format("{},{}", sweep.scenario.label, format_double(p.key_rate));
    o += metric_cells(p.metrics);
    for (Metric m : kAllMetrics) {
      const auto r = p.metrics.node_range(m);
      o += r ? fmt::format(",{},{}", format_double(r->first), format_double(r->second)) : ",,";
    }
    o += "\n";
  }
  return o;
}

std::string runs_csv(const Experiment& ex) {
  std::string o = csv_header("runs");
  o += "scenario,key_rate_kps,seed,setup_s,end_s" + metric_columns() +
       ",transports,transports_failed,cm_messages,cm_keys,generated,consumed,discarded,"
       "duplicate_key_uses,conserved,error\n";
  for (const auto& run : ex.runs) {
    o += fmt::format("{},{},{}", run.key.scenario.label, rate_text(run.key.key_rate), run.key.seed);
    if (!run.ok()) {
      std::string err = run.error;
      for (char& ch : err) {
        if (ch == '"') ch = '\'';
        if (ch == '\n') ch = ' ';
      }
      o += ",,,,,,,,,,,,,,," + fmt::format("\"{}\"\n", err);
      continue;
    }
    const RunResult& r = *run.result;
    std::uint64_t gen = 0, used = 0, disc = 0;
    for (const auto& l : r.links) {
      gen += l.generated;
      used += l.consumed;
      disc += l.discarded;
    }
    o += fmt::format(",{},{}", r.setup_complete ? format_double(r.setup_complete->seconds()) : "",
                     format_double(r.end.seconds()));
    o += metric_cells(r.metrics);
    o += fmt::format(",{},{},{},{},{},{},{},{},{},\n", r.transports.requested, r.transports.failed,
                     r.cm.messages, r.cm.keys_consumed, gen, used, disc, r.duplicate_key_uses,
                     r.conserved() ? 1 : 0);
  }
  return o;
}

std::string summary_json(const Experiment& ex) {
  json root;
  root["schema"] = kCsvSchema;
  root["cutoff_factor"] = ex.config.cutoff_factor;
  root["seeds"] = ex.config.seeds;
  root["key_rates"] = ex.config.key_rates;
  json scenarios = json::array();
  for (const auto& sw : ex.sweeps) {
    json s;
    s["label"] = std::string(1, sw.scenario.label);
    s["architecture"] = std::string(to_string(sw.scenario.architecture));
    s["routing"] = std::string(to_string(sw.scenario.routing));
    json cut;
    for (const auto& [m, c] : sw.cutoffs) {
      if (!c) {
        cut[std::string(to_string(m))] = nullptr;
        continue;
      }
      cut[std::string(to_string(m))] = {{"kps", opt_json(c->kps)},
                                         {"plateau", c->plateau},
                                         {"threshold", c->threshold},
                                         {"low_confidence", c->low_confidence}};
    }
    s["cutoffs"] = cut;
    json pts = json::array();
    for (const auto& p : sw.mean.points) {
      json jp;
      jp["kps"] = p.key_rate;
      for (Metric m : kAllMetrics) jp[std::string(to_string(m))] = opt_json(p.metrics.get(m));
      pts.push_back(jp);
    }
    s["points"] = pts;
    scenarios.push_back(s);
  }
  root["scenarios"] = scenarios;
  json runs = json::array();
  bool conserved = true;
  for (const auto& run : ex.runs) {
    json j;
    j["scenario"] = std::string(1, run.key.scenario.label);
    j["key_rate"] = opt_json(run.key.key_rate);
    j["seed"] = run.key.seed;
    if (run.ok()) {
      const RunResult& r = *run.result;
      j["setup_s"] = r.setup_complete ? json(r.setup_complete->seconds()) : json(nullptr);
      j["end_s"] = r.end.seconds();
      for (Metric m : kAllMetrics) j[std::string(to_string(m))] = opt_json(r.metrics.get(m));
      j["conserved"] = r.conserved();
      j["cm_keys"] = r.cm.keys_consumed;
      conserved = conserved && r.conserved() && r.duplicate_key_uses == 0;
    } else {
      j["error"] = run.error;
      conserved = false;
    }
    runs.push_back(j);
  }
  root["runs"] = runs;
  root["all_ok"] = ex.ok();
  root["keys_conserved"] = conserved;
  return root.dump(2) + "\n";
}

std::string summary_text(const Experiment& ex) {
  std::string o;
  std::size_t failed = 0;
  for (const auto& r : ex.runs) failed += !r.ok();
  o += fmt::format("runs: {} ({} failed)\n", ex.runs.size(), failed);
  for (const auto& sw : ex.sweeps) {
    o += fmt::format("\nscenario {} ({}, {})\n", sw.scenario.label,
                     to_string(sw.scenario.architecture), to_string(sw.scenario.routing));
    o += fmt::format("  {:>8} {:>12} {:>12} {:>12} {:>10}\n", "kps", "t_msg_ne", "t_key",
                     "t_msg_km", "n_msg_km");
    for (const auto& p : sw.mean.points) {
      auto v = [&](Metric m) {
        const auto x = p.metrics.get(m);
        return x ? fmt::format("{:.6g}", *x) : std::string("-");
      };
      o += fmt::format("  {:>8} {:>12} {:>12} {:>12} {:>10}\n", format_double(p.key_rate),
                       v(Metric::t_msg_ne), v(Metric::t_key), v(Metric::t_msg_km),
                       v(Metric::n_msg_km));
    }
    for (const auto& [m, c] : sw.cutoffs) {
      if (!c) {
        o += fmt::format("  cut-off {}: too few points\n", to_string(m));
      } else {
        o += fmt::format("  cut-off {}: {}{}\n", to_string(m),
                         c->kps ? format_double(*c->kps) + " kps" : std::string("none"),
                         c->low_confidence ? " (low confidence)" : "");
      }
    }
  }
  for (const auto& r : ex.runs) {
    if (!r.ok()) o += fmt::format("\nrun {} failed: {}\n", r.key.tag(), r.error);
  }
  return o;
}

std::string figure_csv(const Experiment& ex) {
  std::string o = csv_header("figure");
  o += "scenario,kps,metric,value\n";
  for (const auto& sw : ex.sweeps) {
    for (Metric m : kAllMetrics) {
      for (const auto& p : sw.mean.points) {
        const auto v = p.metrics.get(m);
        if (!v) continue;
        o += fmt::format("{},{},{},{}\n", sw.scenario.label, format_double(p.key_rate),
                         to_string(m), format_double(*v));
      }
    }
  }
  return o;
}

std::string figure_dat(const Experiment& ex, Metric m) {
  std::string o = fmt::format("# metric {}; one index block per scenario: kps value\n", to_string(m));
  bool first = true;
  for (const auto& sw : ex.sweeps) {
    if (!first) o += "\n\n";
    first = false;
    o += fmt::format("# scenario {}\n", sw.scenario.label);
    for (const auto& p : sw.mean.points) {
      const auto v = p.metrics.get(m);
      if (v) o += fmt::format("{} {}\n", format_double(p.key_rate), format_double(*v));
    }
  }
  return o;
}

std::string links_csv(const RunResult& r) {
  std::string o = csv_header("links");
  o += "a,b,key_rate,generated,consumed,consumed_transport,consumed_ack,consumed_cm,stored,"
       "discarded,relayed_bundles,relayed_keys,backoffs,conserved\n";
  for (const auto& l : r.links) {
    o += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", l.a, l.b,
                     format_double(l.key_rate), l.generated, l.consumed, l.consumed_transport,
                     l.consumed_ack, l.consumed_cm, l.available, l.discarded, l.relayed_bundles,
                     l.relayed_keys, l.backoffs, l.conserved ? 1 : 0);
  }
  return o;
}

std::string sessions_csv(const RunResult& r) {
  std::string o = csv_header("sessions");
  o += "master,slave,bidirectional,traffic_start_s,tx,rx,tx_back,rx_back,consumed_keys,requests,"
       "failures\n";
  for (const auto& s : r.sessions) {
    o += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.master, s.slave,
                     s.bidirectional ? 1 : 0,
                     s.traffic_start ? format_double(s.traffic_start->seconds()) : "", s.tx, s.rx,
                     s.tx_back, s.rx_back, s.consumed, s.requests, s.failures);
  }
  return o;
}

std::string generation_csv(const RunResult& r) {
  std::string o = csv_header("generation");
  o += "a,b,tick_s,bits,keys\n";
  for (const auto& l : r.links) {
    for (const auto& g : l.generation_trace) {
      o += fmt::format("{},{},{},{},{}\n", l.a, l.b, format_double(g.at.seconds()), g.bits,
                       g.keys);
    }
  }
  return o;
}

std::string kms_trace_csv(const RunResult& r) {
  std::string o = csv_header("kms");
  o += "time_s,node,pending_km,pending_cm,stored,consumed,relayed_bundles\n";
  for (const auto& s : r.kms_trace) {
    o += fmt::format("{},{},{},{},{},{},{}\n", format_double(s.at.seconds()), s.node,
                     s.pending_km, s.pending_cm, s.stored, s.consumed, s.relayed_bundles);
  }
  return o;
}

std::vector<Check> padua_checks(const RunResult& r) {
  std::vector<Check> out;
  std::uint64_t tx = 0, rx = 0, consumed = 0;
  for (const auto& s : r.sessions) {
    tx += s.tx;
    rx += s.rx;
    consumed += s.consumed;
  }
  const double dtx = static_cast<double>(tx);
  out.push_back({"TX packets", dtx, 179700 * 0.995, 179700 * 1.005, 179703});
  out.push_back({"TX-RX gap", std::fabs(dtx - static_cast<double>(rx)), 0, 300, 4});
  out.push_back({"consumed keys", static_cast<double>(consumed), 480, 485, 482});
  struct Gen {
    NodeId a, b;
    double expected;
  };
  for (const Gen g : {Gen{1, 2, 5820}, Gen{2, 3, 5820}, Gen{3, 6, 39023}}) {
    const LinkReport* l = r.link(g.a, g.b);
    const double v = l ? static_cast<double>(l->generated) : 0.0;
    out.push_back({fmt::format("generated keys {}-{}", g.a, g.b), v, g.expected * 0.97,
                   g.expected * 1.03, g.expected});
  }
  for (const auto& [a, b] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 6}}) {
    const LinkReport* l = r.link(a, b);
    const double v = l ? static_cast<double>(l->relayed_keys) : 0.0;
    out.push_back({fmt::format("relayed keys {}-{}", a, b), v, 478, 488, 483});
  }
  out.push_back({"setup time (s)", r.setup_complete ? r.setup_complete->seconds() : -1.0, 2.0, 3.5,
                 2.5});
  return out;
}

std::string padua_report(const RunResult& r, std::uint64_t seed) {
  std::string o = fmt::format("Padua path 1-2-3-6, seed {}\n", seed);
  o += fmt::format("setup complete at {} s, measurement ends at {} s\n\n",
                   r.setup_complete ? format_double(r.setup_complete->seconds()) : "-",
                   format_double(r.end.seconds()));
  o += fmt::format("{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "session", "consumed", "TX", "RX",
                   "TX back", "RX back");
  for (const auto& s : r.sessions) {
    o += fmt::format("{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                     fmt::format("{}->{}", s.master, s.slave), s.consumed, s.tx, s.rx, s.tx_back,
                     s.rx_back);
  }
  o += fmt::format("\n{:<8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "link", "kps",
                   "generated", "consumed", "stored", "relayed", "keys");
  for (const auto& l : r.links) {
    o += fmt::format("{:<8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                     fmt::format("{}-{}", l.a, l.b), format_double(l.key_rate), l.generated,
                     l.consumed, l.available, l.relayed_bundles, l.relayed_keys);
  }
  o += fmt::format("\n{:<24} {:>12} {:>12} {:>22}  {}\n", "check", "value", "reference",
                   "accepted", "result");
  for (const auto& c : padua_checks(r)) {
    o += fmt::format("{:<24} {:>12} {:>12} {:>22}  {}\n", c.name, format_double(c.value),
                     format_double(c.reference),
                     fmt::format("[{}, {}]", format_double(c.lo), format_double(c.hi)),
                     c.pass() ? "pass" : "FAIL");
  }
  return o;
}

void write_experiment(const Experiment& ex, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  write_file_atomic((root / "config.yaml").string(), dump_config(ex.config));
  write_file_atomic((root / "runs.csv").string(), runs_csv(ex));
  for (const auto& sw : ex.sweeps) {
    write_file_atomic((root / fmt::format("sweep_{}.csv", sw.scenario.label)).string(),
                      sweep_csv(sw));
  }
  for (const auto& run : ex.runs) {
    if (!run.ok()) continue;
    const RunResult& r = *run.result;
    const fs::path d = root / "runs" / run.key.tag();
    write_file_atomic((d / "links.csv").string(), links_csv(r));
    write_file_atomic((d / "sessions.csv").string(), sessions_csv(r));
    bool traced = !r.kms_trace.empty();
    for (const auto& l : r.links) traced = traced || !l.generation_trace.empty();
    if (traced) {
      write_file_atomic((d / "generation.csv").string(), generation_csv(r));
      write_file_atomic((d / "kms.csv").string(), kms_trace_csv(r));
    }
  }
  write_file_atomic((root / "summary.json").string(), summary_json(ex));
  write_file_atomic((root / "summary.txt").string(), summary_text(ex));
}

void write_figure(const Experiment& ex, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  write_file_atomic((root / "figure.csv").string(), figure_csv(ex));
  for (Metric m : kAllMetrics) {
    write_file_atomic((root / fmt::format("figure_{}.dat", to_string(m))).string(),
                      figure_dat(ex, m));
  }
}

}  // namespace qkdn
