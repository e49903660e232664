#pragma once

// Configuration-driven Monte Carlo runs of the causality measures over the
// benchmark systems, with CSV/JSON outputs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "causality/evaluation.hpp"
#include "causality/nue.hpp"
#include "causality/systems.hpp"

namespace causality {

enum class MeasureKind { GCI, CGCI, PCGC, RCGCI, TE, PTE, MIME, PMIME };

std::string to_string(MeasureKind kind);
/// Throws ConfigError for unknown or out-of-scope measure names.
MeasureKind parse_measure_kind(const std::string& name);

/// A measure and its free parameters; 0 means "from the system schedule".
struct MeasureSpec {
  MeasureKind kind = MeasureKind::GCI;
  int order = 0;         // VAR order P, or embedding dimension m
  int tau = 1;
  int k = 10;            // neighbours
  int max_lag = 5;       // L_max
  int conditioning = 0;  // K_s for PCGC
  int surrogates = 100;  // M for TE / PTE
  int replicas = 100;    // M_term for MIME / PMIME
  TerminationRule termination = TerminationRule::kPermutationSidak;
  PermutationScheme permutation = PermutationScheme::kLocal;

  std::string name() const { return to_string(kind); }
};

/// Parameters actually used for one system instance.
MeasureSpec resolve(const MeasureSpec& measure, const SystemSpec& system);

enum class RunScale { kPaper, kDesk };

struct ExperimentConfig {
  SystemSpec system;
  std::vector<Index> k_list;  // variable counts (only S3 accepts several)
  std::vector<Index> n_list;
  std::vector<double> c_list;
  std::optional<NoiseKind> noise_kind;
  std::vector<double> noise_levels;  // empty: noise-free
  std::vector<MeasureSpec> measures;
  std::optional<int> realizations;  // overrides the per-K schedule
  RunScale scale = RunScale::kPaper;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "results";

  /// 100 / 30 / 10 realizations for K <= 5 / <= 10 / larger at paper scale,
  /// 20 / 10 / 5 for K <= 5 / <= 20 / larger at desk scale.
  int realizations_for(Index num_vars) const;
};

/// Parses and validates a JSON config, filling defaults. Throws ConfigError
/// with a field-level message.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRecord {
  std::string system;
  Index num_vars = 0;
  double coupling = 0.0;
  std::string noise = "none";
  double noise_level = 0.0;
  Index n = 0;
  std::string measure;
  int realization = 0;
  std::uint64_t seed = 0;
  std::vector<PairResult> pairs;
  ConfusionCounts counts;
  Scores score;
  double wall_ms = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// One unit of work: a system instance, a length, a measure and a realization.
struct Task {
  SystemSpec system;
  Index n = 0;
  MeasureSpec measure;
  int realization = 0;
};

/// Cartesian product K x c x noise level x n x measure x realization, in
/// canonical order.
std::vector<Task> expand_tasks(const ExperimentConfig& config);

/// Seed of the realization; a pure function of the master seed, the
/// canonical system encoding, n and the realization index. All measures see
/// the same data for a given realization.
std::uint64_t realization_seed(std::uint64_t master_seed, const SystemSpec& system, Index n, int realization);

/// Measure results for every ordered pair of a series. `alpha` is the
/// termination level of the mixed-embedding measures.
std::vector<PairResult> evaluate_pairs(const MultivariateTimeSeries& series, const MeasureSpec& measure,
                                       std::uint64_t seed, double alpha = 0.05);

DecisionMode decision_mode(MeasureKind kind);

/// Runs a single task; failures are reported in the record's status.
RunRecord run_task(const Task& task, double alpha, std::uint64_t master_seed);

struct RunOutcome {
  std::vector<RunRecord> records;  // canonical order
  std::size_t computed = 0;        // records computed in this call
  std::size_t failures = 0;
};

/// Runs every task not already completed in config.output_dir, streaming
/// records to disk, then rewrites records.csv / pairs.csv in canonical
/// order and writes summary.json and summary.csv. Records of other configs
/// already in the directory are kept and included in the summaries, so
/// several configs can share one directory. Worker count comes from
/// `workers`, else the CAUSALITY_WORKERS environment variable, else the
/// hardware concurrency.
RunOutcome run_experiment(const ExperimentConfig& config, std::optional<int> workers = std::nullopt,
                          const std::function<void(const RunRecord&)>& on_record = {});

/// Summary per (measure, system, K, c, noise, level, n), plus overall means
/// per measure ranked by mean F1, descending.
struct SummaryRow {
  std::string measure;
  std::string system;
  Index num_vars = 0;
  double coupling = 0.0;
  std::string noise;
  double noise_level = 0.0;
  Index n = 0;
  ScoreSummary summary;
};

struct OverallRow {
  std::string measure;
  ScoreSummary summary;
};

struct SummaryTables {
  std::vector<SummaryRow> rows;
  std::vector<OverallRow> ranking;
};

SummaryTables summarize(const std::vector<RunRecord>& records);

void write_summary_json(std::ostream& out, const SummaryTables& tables);
void write_summary_text(std::ostream& out, const SummaryTables& tables);
/// Per-group rows only, with standard errors.
void write_summary_csv(std::ostream& out, const SummaryTables& tables);

enum class PlotKind { kKSweep, kNoiseSweep };
PlotKind parse_plot_kind(const std::string& text);

/// x column (K or noise level) then <measure>_sens, <measure>_spec,
/// <measure>_f1 for each measure, one row per x value.
void emit_plot_data(std::ostream& out, const std::vector<RunRecord>& records, PlotKind kind);

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_pairs_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Reads records.csv and, when present, pairs.csv from a run directory.
std::vector<RunRecord> read_run_directory(const std::filesystem::path& dir);

}  // namespace causality
