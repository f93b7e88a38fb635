// Command-line front end: run, sweep-beta, verify, enumerate-tms, plot-data.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bomai/acceptance.hpp"
#include "bomai/errors.hpp"
#include "bomai/experiment.hpp"
#include "bomai/tm.hpp"

namespace fs = std::filesystem;
using namespace bomai;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerify = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::size_t> episodes;
  bool quiet = false;
  bool interactive = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config file (key=value lines)");
  cmd->add_option("--seed", f.seed, "Override the config seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--episodes", f.episodes, "Override num_episodes");
  cmd->add_flag("--quiet", f.quiet, "Only print errors");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? reference_config() : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.episodes) c.num_episodes = *f.episodes;
  return c;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

std::string file_tag(const Rational& q) {
  std::string s = to_string(q);
  for (char& c : s)
    if (c == '/') c = '-';
  return s;
}

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig config = resolve_config(f);
  const ExperimentSetup setup = build_setup(config);
  MentorPtr actor;
  if (f.interactive)
    actor = std::make_shared<InteractiveMentor>("interactive", setup.spaces, std::cin, std::cout);
  const RunSummary run = run_experiment(config, setup, actor);
  const fs::path csv = ensure_dir(f.out) / "metrics.csv";
  emit_csv(run.rows, csv);
  if (!f.quiet) {
    std::cout << "episodes " << config.num_episodes << ", seed " << config.seed << "\n"
              << "sum p_exp^2 " << run.cum_pexp_sq << " (bound " << run.exploration_bound
              << ")\n"
              << "V*(MAP) < V_mentor(MAP) at " << run.pistar_violations << " of "
              << run.pistar_checks << " episode starts\n"
              << "metrics written to " << csv.string() << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f) {
  const ExperimentConfig config = resolve_config(f);
  const auto points = beta_sweep(config, config.beta_sweep, {config.seed});
  const fs::path dir = ensure_dir(f.out);
  const fs::path summary_path = dir / "sweep_summary.csv";
  std::ofstream summary(summary_path, std::ios::binary);
  if (!summary) throw Error("cannot open " + summary_path.string() + " for writing");
  summary << "beta,seed,space_violation_freq,nonbenign_freq\n";
  for (const auto& p : points) {
    emit_csv(p.run.rows,
             dir / ("metrics_beta_" + file_tag(p.beta) + "_seed" + std::to_string(p.seed) + ".csv"));
    summary << to_string(p.beta) << ',' << p.seed << ',' << p.space_violation_freq << ','
            << p.nonbenign_freq << '\n';
    if (!f.quiet)
      std::cout << "beta " << to_string(p.beta) << ": space violations "
                << p.space_violation_freq << ", non-benign MAP " << p.nonbenign_freq << "\n";
  }
  if (!summary) throw Error("write to " + summary_path.string() + " failed");
  return kExitOk;
}

int cmd_verify(const CommonFlags& f) {
  ExperimentConfig config = resolve_config(f);
  std::vector<std::uint64_t> seeds = reference_seeds();
  if (f.seed) seeds.front() = *f.seed;
  AcceptanceSuite suite(config, seeds, f.quiet ? nullptr : &std::cerr);
  bool all = true;
  suite.run_all([&](const CriterionResult& r) {
    all = all && r.pass;
    if (!f.quiet || !r.pass) std::cout << format_result(r) << std::endl;
  });
  return all ? kExitOk : kExitVerify;
}

struct EnumerateFlags {
  std::size_t max_states = 1;
  unsigned max_space = 1;
  std::size_t cap = 256;
  std::string vocabulary = "minimal";
  std::string out;
};

int cmd_enumerate(const CommonFlags& f, const EnumerateFlags& e) {
  const ExperimentConfig config = f.config.empty() ? reference_config() : load_config(f.config);
  const InteractionSpaces spaces = config.spaces();
  const TransitionVocabulary vocab = e.vocabulary == "standard"
                                         ? TransitionVocabulary::standard(spaces)
                                         : TransitionVocabulary::minimal();
  const auto machines =
      enumerate_machines(e.max_states, e.max_space, e.cap, vocab, spaces.num_actions());
  std::ofstream file;
  if (!e.out.empty()) {
    file.open(e.out, std::ios::binary);
    if (!file) throw Error("cannot open " + e.out + " for writing");
  }
  std::ostream& out = e.out.empty() ? std::cout : file;
  for (const auto& tm : machines)
    out << tm.k << ' ' << (never_reads_unbounded(tm) ? "benign" : "reads-unbounded") << ' '
        << encode_machine(tm) << '\n';
  if (!f.quiet && !e.out.empty()) std::cout << machines.size() << " machines\n";
  return kExitOk;
}

int cmd_plot(const CommonFlags& f, const std::string& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error("cannot open " + input);
  const auto rows = parse_csv(in);
  const fs::path path = ensure_dir(f.out) / "plot_data.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_plot_data(out, rows);
  if (!out) throw Error("write to " + path.string() + " failed");
  if (!f.quiet) std::cout << rows.size() << " rows reshaped into " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boxed myopic agent experiments"};
  app.require_subcommand(1);
  CommonFlags flags;
  EnumerateFlags enum_flags;
  std::string plot_input;

  auto* run = app.add_subcommand("run", "Run one experiment and write metrics.csv");
  add_common(run, flags);
  run->add_flag("--interactive", flags.interactive,
                "Read mentor actions from stdin during exploratory episodes");
  auto* sweep = app.add_subcommand("sweep-beta", "Run the config once per beta in beta_sweep");
  add_common(sweep, flags);
  auto* verify = app.add_subcommand("verify", "Run the full property suite");
  add_common(verify, flags);
  auto* enumerate = app.add_subcommand("enumerate-tms", "List enumerated machines");
  add_common(enumerate, flags);
  enumerate->add_option("--max-states", enum_flags.max_states, "Largest state count");
  enumerate->add_option("--max-space", enum_flags.max_space, "Largest bounded tape length");
  enumerate->add_option("--cap", enum_flags.cap, "Maximum number of machines");
  enumerate->add_option("--vocabulary", enum_flags.vocabulary, "minimal or standard")
      ->check(CLI::IsMember({"minimal", "standard"}));
  enumerate->add_option("--file", enum_flags.out, "Write the list here instead of stdout");
  auto* plot = app.add_subcommand("plot-data", "Reshape a metrics CSV into long format");
  add_common(plot, flags);
  plot->add_option("--input", plot_input, "Metrics CSV to reshape")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*sweep) return cmd_sweep(flags);
    if (*verify) return cmd_verify(flags);
    if (*enumerate) return cmd_enumerate(flags, enum_flags);
    if (*plot) return cmd_plot(flags, plot_input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
