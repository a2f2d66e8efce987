// qkdnsim: command-line front end for the QKD network simulator.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qkdn/config.hpp"
#include "qkdn/errors.hpp"
#include "qkdn/io.hpp"
#include "qkdn/report.hpp"
#include "qkdn/runner.hpp"

namespace {

using namespace qkdn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitValidation = 2;
constexpr int kExitFault = 3;

constexpr const char* kOutputRootEnv = "QKDN_OUTPUT_ROOT";

struct Overrides {
  std::string config_path;
  std::string scenario;
  std::vector<double> sweep;
  std::vector<std::uint64_t> seeds;
  bool padua = false;
  std::string out;
  unsigned workers = 0;
  bool traces = false;
};

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig c = o.config_path.empty() ? (o.padua ? padua_config() : default_config())
                                           : load_config(o.config_path);
  if (o.padua && !o.config_path.empty() && c.topology.kind != TopologyKind::padua) {
    throw ConfigError("--padua conflicts with the topology of " + o.config_path);
  }
  if (o.padua && o.config_path.empty()) c.output_dir = "qkdn-padua";
  if (!o.scenario.empty()) {
    if (o.scenario.size() != 1) throw ConfigError("--scenario takes one of A, B, C, D");
    c.scenarios = {o.scenario[0]};
  }
  if (!o.sweep.empty()) c.key_rates = o.sweep;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.workers) c.workers = o.workers;
  if (o.traces) c.params.record_traces = true;
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string output_dir(const ScenarioConfig& c, const Overrides& o) {
  namespace fs = std::filesystem;
  if (!o.out.empty()) return o.out;
  fs::path p(c.output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  }
  return p.string();
}

RunOptions progress_options(std::size_t total) {
  RunOptions opt;
  auto done = std::make_shared<std::size_t>(0);
  opt.on_done = [done, total](const RunOutcome& r) {
    ++*done;
    if (r.ok()) {
      std::cerr << fmt::format("[{}/{}] {} ok ({:.2f} s)\n", *done, total, r.key.tag(),
                               r.wall_seconds);
    } else {
      std::cerr << fmt::format("[{}/{}] {} FAILED: {}\n", *done, total, r.key.tag(), r.error);
    }
  };
  return opt;
}

int cmd_run(const Overrides& o, bool figure) {
  const ScenarioConfig c = resolve(o);
  if (figure && c.key_rates.size() < 2) {
    throw ConfigError("sweep-figure needs at least two key rates");
  }
  const std::string dir = output_dir(c, o);
  RunOptions opt = progress_options(plan_runs(c).size());
  opt.keep_detail = c.params.record_traces;
  const Experiment ex = run_experiment(c, opt);

  write_experiment(ex, dir);
  if (figure) write_figure(ex, dir);
  if (c.topology.kind == TopologyKind::padua) {
    for (const auto& run : ex.runs) {
      if (!run.ok()) continue;
      const std::string text = padua_report(*run.result, run.key.seed);
      write_file_atomic((std::filesystem::path(dir) / ("padua_" + run.key.tag() + ".txt")).string(),
                        text);
      std::cout << text << "\n";
    }
  }
  std::cout << summary_text(ex);
  std::cout << fmt::format("artifacts in {}\n", dir);
  return ex.ok() ? kExitOk : kExitFault;
}

int cmd_validate(const Overrides& o) {
  ScenarioConfig c = padua_config();
  c.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{42, 43, 44} : o.seeds;
  if (o.workers) c.workers = o.workers;
  const Experiment ex = run_experiment(c);
  bool pass = true;
  for (const auto& run : ex.runs) {
    std::cout << fmt::format("seed {}\n", run.key.seed);
    if (!run.ok()) {
      std::cout << fmt::format("  FAIL run fault: {}\n", run.error);
      pass = false;
      continue;
    }
    const RunResult& r = *run.result;
    for (const auto& ch : padua_checks(r)) {
      std::cout << fmt::format("  {} {:<24} {} in [{}, {}]\n", ch.pass() ? "PASS" : "FAIL", ch.name,
                               format_double(ch.value), format_double(ch.lo),
                               format_double(ch.hi));
      pass = pass && ch.pass();
    }
    const bool conserved = r.conserved() && r.duplicate_key_uses == 0 && r.cm.keys_consumed == 0;
    std::cout << fmt::format("  {} key conservation\n", conserved ? "PASS" : "FAIL");
    pass = pass && conserved;
  }
  std::cout << (pass ? "validation passed\n" : "validation FAILED\n");
  return pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of trusted-node QKD networks"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seeds, "Seed(s), comma separated")->delimiter(',');
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
  };

  auto* run = app.add_subcommand("run", "Run scenarios or a key-rate sweep");
  run->add_option("config", o.config_path, "YAML configuration")->check(CLI::ExistingFile);
  run->add_option("--scenario", o.scenario, "Scenario label A-D");
  run->add_option("--sweep", o.sweep, "Key rates in kps, comma separated")->delimiter(',');
  run->add_flag("--padua", o.padua, "Padua validation path");
  run->add_option("--out", o.out, "Output directory");
  run->add_flag("--traces", o.traces, "Record generation and KMS traces");
  add_common(run);

  auto* validate = app.add_subcommand("validate", "Padua checks with pass/fail per check");
  add_common(validate);

  auto* figure = app.add_subcommand("sweep-figure", "Sweep and emit plot data files");
  figure->add_option("config", o.config_path, "YAML configuration")->check(CLI::ExistingFile);
  figure->add_option("--out", o.out, "Output directory");
  add_common(figure);

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  defaults->add_flag("--padua", o.padua, "Padua configuration instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(o, false);
    if (*figure) return cmd_run(o, true);
    if (*validate) return cmd_validate(o);
    if (*defaults) {
      std::cout << dump_config(o.padua ? padua_config() : default_config());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitConfig;
}
