#include "dlab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dlab/arrivals.hpp"
#include "dlab/coupling.hpp"
#include "dlab/disciplines.hpp"
#include "dlab/parallel.hpp"
#include "dlab/queue_core.hpp"
#include "dlab/stats.hpp"

namespace dlab {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out;
};

ScenarioConfig load_config(const CommonOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw UsageError("cannot read config file '" + opt.config_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + opt.config_path + "' is not valid JSON: " + e.what());
  }
  ScenarioConfig c = config_from_json(j);
  if (opt.seed) c.seed = *opt.seed;
  return c;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

/// RunManifest: enough to rerun the command that produced `outputs`.
void write_manifest(const std::string& path, const std::string& command, const ScenarioConfig& config,
                    const std::vector<std::string>& outputs, nlohmann::json arguments) {
  write_json(path, {{"command", command},
                    {"config", to_json(config)},
                    {"seed", config.seed},
                    {"arguments", std::move(arguments)},
                    {"outputs", outputs},
                    {"version", kToolVersion}});
}

std::vector<ConvexFunction> parse_function_list(const std::string& text) {
  std::vector<ConvexFunction> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ConvexFunction::parse(item));
  if (out.empty()) throw UsageError("empty function list");
  return out;
}

nlohmann::json state_to_json(const DecisionState& s) {
  nlohmann::json waiting = nlohmann::json::array();
  for (const auto& w : s.waiting) waiting.push_back({{"index", w.index}, {"deadline", w.deadline}, {"arrival", w.arrival}});
  return {{"now", s.now}, {"waiting", waiting}};
}

int cmd_simulate(const CommonOptions& opt, const std::string& discipline_text, std::optional<std::size_t> cycles,
                 const std::string& trace_out, std::ostream& out) {
  ScenarioConfig config = load_config(opt);
  if (cycles) config.horizon = {Horizon::Kind::cycles, *cycles};
  const DisciplineId d = DisciplineId::parse(discipline_text);
  const ArrivalTrace trace = generate_trace(config);
  const Schedule s = simulate(trace, d);

  const std::string path = opt.out.empty() ? "schedule.csv" : opt.out;
  std::vector<std::string> outputs{path};
  {
    auto f = open_output(path);
    write_schedule_csv(f, trace, s);
  }
  if (!trace_out.empty()) {
    auto f = open_output(trace_out);
    write_trace_csv(f, trace);
    outputs.push_back(trace_out);
  }
  write_manifest(path + ".manifest.json", "simulate", config, outputs, {{"discipline", d.name()}});
  out << "simulated " << trace.size() << " customers in " << s.cycles.size() << " busy cycles under " << d.name()
      << " -> " << path << '\n';
  return kExitOk;
}

int cmd_verify(const CommonOptions& opt, const std::string& phi_text, const std::string& psi_text,
               std::size_t n_traces, std::ostream& out, std::ostream& err) {
  const ScenarioConfig config = load_config(opt);
  const DisciplineId phi = DisciplineId::parse(phi_text);
  const DisciplineId psi = DisciplineId::parse(psi_text);
  if (!phi.deterministic() || !psi.deterministic()) {
    throw UsageError("verify needs deterministic disciplines; random selection has no pointwise order");
  }
  if (n_traces == 0) throw UsageError("--traces must be positive");

  std::vector<ScenarioConfig> configs(n_traces, config);
  for (std::size_t i = 0; i < n_traces; ++i) configs[i].seed = batch_seed(config.seed, i);

  // ≪ check on synthetic states plus the selections made on the first trace.
  std::vector<DecisionState> states = sample_decision_states(config.seed, 4096);
  {
    std::vector<DecisionRecord> log;
    simulate(generate_trace(configs[0]), phi, &log);
    for (auto& r : log) states.push_back(std::move(r.state));
  }
  const LlOrderReport ll = check_ll_order(phi, psi, states);
  if (!ll.holds) {
    err << "error: " << phi.name() << " << " << psi.name() << " does not hold; counterexample "
        << state_to_json(*ll.counterexample).dump() << " (" << phi.name() << " picks " << ll.phi_choice << ", "
        << psi.name() << " picks " << ll.psi_choice << ")\n";
    return kExitUsage;
  }

  std::vector<CouplingReport> reports(n_traces);
  parallel_for(n_traces, opt.jobs, [&](std::size_t i) {
    reports[i] = verify_coupling(generate_trace(configs[i]), phi, psi);
  });

  std::size_t cycles = 0, id_fail = 0, maj_fail = 0, dec_fail = 0, failed_cycles = 0;
  nlohmann::json traces = nlohmann::json::array();
  std::optional<nlohmann::json> first_failure;
  for (std::size_t i = 0; i < n_traces; ++i) {
    const CouplingReport& r = reports[i];
    cycles += r.cycles.size();
    id_fail += r.identity_failures();
    maj_fail += r.majorization_failures();
    dec_fail += r.decomposition_failures();
    for (const auto& c : r.cycles) failed_cycles += c.ok() ? 0 : 1;
    nlohmann::json j = to_json(r);
    j["seed"] = configs[i].seed;
    if (!first_failure && !r.all_ok()) {
      for (const auto& c : j["cycles"]) {
        if (!(c["identity_ok"].get<bool>() && c["majorization_ok"].get<bool>() && c["decomposition_ok"].get<bool>())) {
          first_failure = nlohmann::json{{"seed", configs[i].seed}, {"cycle", c}};
          break;
        }
      }
    }
    traces.push_back(std::move(j));
  }
  const nlohmann::json summary = {{"traces", n_traces},
                                  {"cycles", cycles},
                                  {"failed_cycles", failed_cycles},
                                  {"identity_failures", id_fail},
                                  {"majorization_failures", maj_fail},
                                  {"decomposition_failures", dec_fail}};
  const std::string path = opt.out.empty() ? "coupling.json" : opt.out;
  write_json(path, {{"phi", phi.name()}, {"psi", psi.name()}, {"summary", summary}, {"traces", traces}});
  write_manifest(path + ".manifest.json", "verify", config, {path},
                 {{"phi", phi.name()}, {"psi", psi.name()}, {"traces", n_traces}});

  out << phi.name() << " vs " << psi.name() << ": " << n_traces << " traces, " << cycles << " cycles, "
      << failed_cycles << " failed -> " << path << '\n';
  if (failed_cycles > 0) {
    err << "counterexample: " << first_failure->dump() << '\n';
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_compare(const CommonOptions& opt, const std::string& disciplines_text, const std::string& g_text,
                std::size_t n_cycles, std::ostream& out) {
  const ScenarioConfig config = load_config(opt);
  const std::vector<DisciplineId> disciplines = parse_discipline_list(disciplines_text);
  if (disciplines.empty()) throw UsageError("empty discipline list");
  const std::vector<ConvexFunction> functions =
      g_text.empty() ? default_convex_family() : parse_function_list(g_text);

  const ComparisonReport report = compare_disciplines(config, disciplines, functions, n_cycles, opt.jobs);

  const std::string base = opt.out.empty() ? "comparison" : opt.out;
  {
    auto f = open_output(base + ".csv");
    write_comparison_csv(f, report);
  }
  write_json(base + ".json", to_json(report));
  std::vector<std::string> names;
  for (const auto& d : disciplines) names.push_back(d.name());
  std::vector<std::string> gnames;
  for (const auto& g : functions) gnames.push_back(g.name());
  write_manifest(base + ".manifest.json", "compare", report.config, {base + ".csv", base + ".json"},
                 {{"disciplines", names}, {"g", gnames}, {"cycles", n_cycles}});

  for (std::size_t d = 0; d < disciplines.size(); ++d) {
    for (const PalmEstimate& e : report.grid[d]) {
      out << disciplines[d].name() << ' ' << e.g.name() << ' ' << e.value << " +/- "
          << e.ci_halfwidth.value_or(0.0) << '\n';
    }
  }
  for (const PairVerdict& v : report.verdicts) {
    out << v.lower.name() << " <= " << v.upper.name() << " [" << v.g.name() << "]: " << to_string(v.verdict) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-server soft-deadline queue laboratory"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Scenario JSON file")->required();
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output path");
  };

  std::string discipline = "edf";
  std::optional<std::size_t> sim_cycles;
  std::string trace_out;
  auto* sim = app.add_subcommand("simulate", "Run one discipline and write its schedule as CSV");
  add_common(sim);
  sim->add_option("--discipline", discipline, "edf, ldf, fifo, lifo or random:<seed>");
  sim->add_option("--cycles", sim_cycles, "Replace the config horizon with a busy-cycle count");
  sim->add_option("--trace-out", trace_out, "Also write the generated trace as CSV");

  std::string phi = "edf", psi = "ldf";
  std::size_t n_traces = 100;
  auto* ver = app.add_subcommand("verify", "Check the interchange coupling cycle by cycle");
  add_common(ver);
  ver->add_option("--phi", phi, "Discipline that favours earlier deadlines");
  ver->add_option("--psi", psi, "Discipline compared against");
  ver->add_option("--traces", n_traces, "Number of generated traces");

  std::string disciplines = "edf,fifo,lifo,ldf";
  std::string g_list;
  std::size_t n_cycles = 10000;
  auto* cmp = app.add_subcommand("compare", "Palm estimates of g(R) per discipline with ordering verdicts");
  add_common(cmp);
  cmp->add_option("--discipline", disciplines, "Comma-separated disciplines");
  cmp->add_option("--g", g_list, "Comma-separated functions (default: whole family)");
  cmp->add_option("--cycles", n_cycles, "Busy cycles to simulate");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(opt, discipline, sim_cycles, trace_out, out);
    if (*ver) return cmd_verify(opt, phi, psi, n_traces, out, err);
    if (*cmp) return cmd_compare(opt, disciplines, g_list, n_cycles, out);
  } catch (const StabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    // ConfigError, GenerationError, UsageError and bad discipline or function names.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dlab
