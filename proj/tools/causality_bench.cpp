// causality_bench: run, summarize and export causality benchmark experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "causality/bench.hpp"
#include "causality/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

int cmd_run(const std::string& config_path, std::optional<int> workers, const std::string& output_override,
            const std::string& scale) {
  auto cfg = causality::load_config(config_path);
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (scale == "desk") cfg.scale = causality::RunScale::kDesk;
  else if (scale == "paper") cfg.scale = causality::RunScale::kPaper;
  const auto tasks = causality::expand_tasks(cfg);
  std::cerr << "running " << tasks.size() << " records into " << cfg.output_dir.string() << '\n';
  std::size_t seen = 0;
  const auto outcome = causality::run_experiment(cfg, workers, [&](const causality::RunRecord& r) {
    ++seen;
    std::cerr << '[' << seen << "] " << r.measure << ' ' << r.system << " K=" << r.num_vars << " n=" << r.n
              << " r=" << r.realization << " f1=" << r.score.f1 << ' ' << r.status << '\n';
  });
  causality::write_summary_text(std::cout, causality::summarize(outcome.records));
  if (outcome.failures > 0) {
    std::cerr << outcome.failures << " record(s) failed; see records.csv\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_summarize(const std::string& dir) {
  const auto records = causality::read_run_directory(dir);
  if (records.empty()) {
    std::cerr << "no records found in " << dir << '\n';
    return kExitUsage;
  }
  causality::write_summary_text(std::cout, causality::summarize(records));
  return kExitOk;
}

int cmd_plotdata(const std::string& dir, const std::string& kind, const std::string& out_path) {
  const auto records = causality::read_run_directory(dir);
  const auto plot = causality::parse_plot_kind(kind);
  if (out_path.empty()) {
    causality::emit_plot_data(std::cout, records, plot);
  } else {
    std::ofstream out(out_path);
    if (!out) throw causality::InvalidArgument("cannot write " + out_path);
    causality::emit_plot_data(out, records, plot);
  }
  return kExitOk;
}

struct GenOptions {
  std::string system;
  causality::Index n = 2048;
  std::uint64_t seed = 1;
  causality::Index num_vars = 0;
  double coupling = 0.3;
  std::string noise;
  double level = 0.1;
  std::string out;
  std::string truth;
};

int cmd_gen(const GenOptions& o) {
  causality::SystemSpec spec;
  spec.id = causality::parse_system_id(o.system);
  spec.num_vars = o.num_vars > 0 ? o.num_vars : (spec.id == causality::SystemId::S4 ? 4
                                                  : spec.id == causality::SystemId::S6 ? 20
                                                                                       : 5);
  spec.coupling = o.coupling;
  if (!o.noise.empty()) spec.noise = causality::NoiseSpec{causality::parse_noise_kind(o.noise), o.level};
  const auto data = causality::generate(spec, o.n, o.seed);
  if (o.out.empty()) {
    causality::write_csv(std::cout, data.series);
  } else {
    std::ofstream out(o.out);
    if (!out) throw causality::InvalidArgument("cannot write " + o.out);
    causality::write_csv(out, data.series);
  }
  if (!o.truth.empty()) {
    std::ofstream out(o.truth);
    if (!out) throw causality::InvalidArgument("cannot write " + o.truth);
    causality::write_edge_list(out, data.truth);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo benchmark of Granger causality measures"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> workers;
  std::string output_override;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--workers,-j", workers, "Worker threads (default: CAUSALITY_WORKERS or all cores)");
  run->add_option("--output-dir,-o", output_override, "Override the config's output directory");
  std::string scale;
  run->add_option("--scale", scale, "Realization schedule when the config fixes none")
      ->check(CLI::IsMember({"paper", "desk"}));

  std::string dir;
  auto* summarize = app.add_subcommand("summarize", "Print summary tables of a run directory");
  summarize->add_option("dir", dir, "Run directory")->required();

  std::string plot_dir;
  std::string kind;
  std::string plot_out;
  auto* plotdata = app.add_subcommand("plotdata", "Export Sens/Spec/F1 series for plotting");
  plotdata->add_option("dir", plot_dir, "Run directory")->required();
  plotdata->add_option("--kind", kind, "k_sweep or noise_sweep")->required();
  plotdata->add_option("--out", plot_out, "Output CSV (default stdout)");

  GenOptions gen_opts;
  auto* gen = app.add_subcommand("gen", "Generate one realization of a benchmark system as CSV");
  gen->add_option("system", gen_opts.system, "S1..S6")->required();
  gen->add_option("--n", gen_opts.n, "Series length")->required();
  gen->add_option("--seed", gen_opts.seed, "Seed")->required();
  gen->add_option("--K", gen_opts.num_vars, "Number of variables (S3)");
  gen->add_option("--c", gen_opts.coupling, "Coupling strength (S3)");
  gen->add_option("--noise", gen_opts.noise, "gaussian, tstudent2 or garch11");
  gen->add_option("--level", gen_opts.level, "Noise level (fraction of the signal sd)");
  gen->add_option("--out", gen_opts.out, "Series CSV (default stdout)");
  gen->add_option("--truth", gen_opts.truth, "Write the true edge list here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, workers, output_override, scale);
    if (*summarize) return cmd_summarize(dir);
    if (*plotdata) return cmd_plotdata(plot_dir, kind, plot_out);
    if (*gen) return cmd_gen(gen_opts);
  } catch (const causality::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
