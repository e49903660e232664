#include "causality/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "causality/errors.hpp"
#include "causality/linear_gc.hpp"
#include "causality/seeding.hpp"

namespace causality {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw InvalidArgument("cannot parse number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw InvalidArgument("cannot parse integer '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw InvalidArgument("cannot parse integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

std::string sanitize(std::string text) {
  for (char& ch : text)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return text;
}

std::string noise_name(const SystemSpec& s) { return s.noise ? to_string(s.noise->kind) : "none"; }
double noise_level(const SystemSpec& s) { return s.noise ? s.noise->level : 0.0; }

// Identifies a record within a run independently of its results.
std::string record_key(const std::string& system, Index k, double c, const std::string& noise, double level, Index n,
                       const std::string& measure, int realization) {
  return system + "," + std::to_string(k) + "," + fmt(c) + "," + noise + "," + fmt(level) + "," + std::to_string(n) +
         "," + measure + "," + std::to_string(realization);
}

std::string record_key(const RunRecord& r) {
  return record_key(r.system, r.num_vars, r.coupling, r.noise, r.noise_level, r.n, r.measure, r.realization);
}

std::string record_key(const Task& t) {
  return record_key(to_string(t.system.id), t.system.num_vars, t.system.coupling, noise_name(t.system),
                    noise_level(t.system), t.n, t.measure.name(), t.realization);
}

constexpr const char* kRecordsHeader =
    "system,K,c,noise,noise_level,n,measure,realization,seed,tp,tn,fp,fn,sens,spec,f1,status,wall_ms";
constexpr const char* kPairsHeader = "system,K,c,noise,noise_level,n,measure,realization,from,to,strength,p_value";

void write_record_line(std::ostream& out, const RunRecord& r) {
  out << record_key(r) << ',' << r.seed << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ','
      << r.counts.fn << ',' << fmt(r.score.sens) << ',' << fmt(r.score.spec) << ',' << fmt(r.score.f1) << ','
      << sanitize(r.status) << ',' << fmt(r.wall_ms) << '\n';
}

void write_pair_lines(std::ostream& out, const RunRecord& r) {
  const auto key = record_key(r);
  for (const auto& p : r.pairs) {
    out << key << ',' << p.from + 1 << ',' << p.to + 1 << ',' << fmt(p.strength) << ','
        << (p.p_value ? fmt(*p.p_value) : std::string()) << '\n';
  }
}

const std::vector<std::pair<std::string, MeasureKind>>& measure_names() {
  static const std::vector<std::pair<std::string, MeasureKind>> names = {
      {"GCI", MeasureKind::GCI}, {"CGCI", MeasureKind::CGCI}, {"PCGC", MeasureKind::PCGC},
      {"RCGCI", MeasureKind::RCGCI}, {"TE", MeasureKind::TE}, {"PTE", MeasureKind::PTE},
      {"MIME", MeasureKind::MIME}, {"PMIME", MeasureKind::PMIME}};
  return names;
}

template <typename T>
T get_field(const json& obj, const char* field, const std::string& where) {
  try {
    return obj.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + field + ": invalid value " + obj.at(field).dump());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }) == allowed.end()) {
      throw ConfigError(where + ": unknown field '" + it.key() + "'");
    }
  }
}

MeasureSpec parse_measure(const json& j, std::size_t idx) {
  const std::string where = "measures[" + std::to_string(idx) + "]";
  MeasureSpec m;
  if (j.is_string()) {
    m.kind = parse_measure_kind(j.get<std::string>());
    return m;
  }
  if (!j.is_object()) throw ConfigError(where + ": expected a measure name or object");
  check_keys(j, {"name", "P", "m", "tau", "k", "L_max", "K_s", "M", "M_term", "termination", "permutation"}, where);
  if (!j.contains("name")) throw ConfigError(where + ".name: missing");
  m.kind = parse_measure_kind(get_field<std::string>(j, "name", where));
  auto positive = [&](const char* field, int& out, int min) {
    if (!j.contains(field)) return;
    out = get_field<int>(j, field, where);
    if (out < min) throw ConfigError(where + "." + field + ": must be >= " + std::to_string(min));
  };
  positive("P", m.order, 1);
  positive("m", m.order, 1);
  positive("tau", m.tau, 1);
  positive("k", m.k, 1);
  positive("L_max", m.max_lag, 1);
  positive("K_s", m.conditioning, 0);
  positive("M", m.surrogates, 20);
  positive("M_term", m.replicas, 1);
  if (j.contains("termination")) {
    const auto rule = get_field<std::string>(j, "termination", where);
    if (rule == "sidak") m.termination = TerminationRule::kPermutationSidak;
    else if (rule == "quantile") m.termination = TerminationRule::kPermutationQuantile;
    else throw ConfigError(where + ".termination: expected 'sidak' or 'quantile'");
  }
  if (j.contains("permutation")) {
    const auto scheme = get_field<std::string>(j, "permutation", where);
    if (scheme == "local") m.permutation = PermutationScheme::kLocal;
    else if (scheme == "global") m.permutation = PermutationScheme::kGlobal;
    else throw ConfigError(where + ".permutation: expected 'local' or 'global'");
  }
  return m;
}

Index fixed_num_vars(SystemId id) {
  switch (id) {
    case SystemId::S4: return 4;
    case SystemId::S6: return 20;
    default: return 5;
  }
}

}  // namespace

std::string to_string(MeasureKind kind) {
  for (const auto& [name, k] : measure_names())
    if (k == kind) return name;
  return "?";
}

MeasureKind parse_measure_kind(const std::string& name) {
  for (const auto& [n, k] : measure_names())
    if (n == name) return k;
  static const std::set<std::string> out_of_scope = {"PGC", "PTERV", "PTENUE", "LATE", "LFACDA", "NLFACDA"};
  std::string supported;
  for (const auto& [n, k] : measure_names()) supported += (supported.empty() ? "" : ", ") + n;
  if (out_of_scope.count(name)) {
    throw ConfigError("measure '" + name + "' is out of scope for this toolbox; supported: " + supported);
  }
  throw ConfigError("unknown measure '" + name + "'; supported: " + supported);
}

MeasureSpec resolve(const MeasureSpec& measure, const SystemSpec& system) {
  MeasureSpec out = measure;
  if (out.order == 0) out.order = true_max_lag(system.id);
  if (out.kind == MeasureKind::PCGC && out.conditioning == 0 && measure.conditioning == 0) {
    out.conditioning = default_pcgc_conditioning(system);
  }
  out.conditioning = std::min<int>(out.conditioning, static_cast<int>(system.num_vars - 2));
  return out;
}

int ExperimentConfig::realizations_for(Index num_vars) const {
  if (realizations) return *realizations;
  if (scale == RunScale::kPaper) return num_vars <= 5 ? 100 : num_vars <= 10 ? 30 : 10;
  return num_vars <= 5 ? 20 : num_vars <= 20 ? 10 : 5;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, {"system", "K_list", "n_list", "c_list", "noise", "measures", "realizations", "scale", "alpha",
                 "master_seed", "output_dir"},
             "config");

  ExperimentConfig cfg;
  if (!j.contains("system")) throw ConfigError("system: missing");
  const json& sys = j.at("system");
  try {
    if (sys.is_string()) {
      cfg.system.id = parse_system_id(sys.get<std::string>());
    } else if (sys.is_object()) {
      check_keys(sys, {"id", "K", "s"}, "system");
      if (!sys.contains("id")) throw ConfigError("system.id: missing");
      cfg.system.id = parse_system_id(get_field<std::string>(sys, "id", "system"));
      if (sys.contains("K")) cfg.system.num_vars = get_field<Index>(sys, "K", "system");
      else cfg.system.num_vars = fixed_num_vars(cfg.system.id);
      if (sys.contains("s")) cfg.system.drive = get_field<double>(sys, "s", "system");
    } else {
      throw ConfigError("system: expected a system id or object");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  if (sys.is_string()) cfg.system.num_vars = fixed_num_vars(cfg.system.id);
  if (cfg.system.id != SystemId::S3 && cfg.system.num_vars != fixed_num_vars(cfg.system.id)) {
    throw ConfigError("system.K: " + to_string(cfg.system.id) + " has a fixed K of " +
                      std::to_string(fixed_num_vars(cfg.system.id)));
  }

  if (j.contains("K_list")) {
    cfg.k_list = get_field<std::vector<Index>>(j, "K_list", "config");
    if (cfg.system.id != SystemId::S3 && (cfg.k_list.size() != 1 || cfg.k_list[0] != cfg.system.num_vars)) {
      throw ConfigError("K_list: only S3 accepts several variable counts");
    }
  } else {
    cfg.k_list = {cfg.system.num_vars};
  }
  for (Index k : cfg.k_list)
    if (k < 3) throw ConfigError("K_list: every K must be >= 3");

  cfg.n_list = j.contains("n_list") ? get_field<std::vector<Index>>(j, "n_list", "config")
                                    : std::vector<Index>{512, 1024, 2048, 4096};
  if (cfg.n_list.empty()) throw ConfigError("n_list: must not be empty");
  for (Index n : cfg.n_list)
    if (n < 64) throw ConfigError("n_list: every n must be >= 64");

  if (j.contains("c_list")) {
    cfg.c_list = get_field<std::vector<double>>(j, "c_list", "config");
  } else if (cfg.system.id == SystemId::S3) {
    cfg.c_list = cfg.system.num_vars == 5 ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5} : std::vector<double>{0.3};
  } else {
    cfg.c_list = {0.0};
  }
  if (cfg.c_list.empty()) throw ConfigError("c_list: must not be empty");
  for (double c : cfg.c_list)
    if (!(c >= 0.0 && c <= 0.6)) throw ConfigError("c_list: coupling strengths must lie in [0, 0.6]");
  if (cfg.system.id != SystemId::S3 && (cfg.c_list.size() != 1 || cfg.c_list[0] != 0.0)) {
    throw ConfigError("c_list: only S3 has a coupling strength parameter");
  }

  if (j.contains("noise")) {
    const json& nz = j.at("noise");
    if (!nz.is_object()) throw ConfigError("noise: expected an object");
    check_keys(nz, {"kind", "levels"}, "noise");
    try {
      cfg.noise_kind = parse_noise_kind(nz.contains("kind") ? get_field<std::string>(nz, "kind", "noise")
                                                            : std::string("gaussian"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("noise.kind: ") + e.what());
    }
    cfg.noise_levels = nz.contains("levels") ? get_field<std::vector<double>>(nz, "levels", "noise")
                                             : std::vector<double>{0.1, 0.2, 0.5};
    if (cfg.noise_levels.empty()) throw ConfigError("noise.levels: must not be empty");
    for (double l : cfg.noise_levels)
      if (!(l > 0.0)) throw ConfigError("noise.levels: levels must be positive");
  }

  if (!j.contains("measures")) throw ConfigError("measures: missing");
  const json& ms = j.at("measures");
  if (!ms.is_array() || ms.empty()) throw ConfigError("measures: expected a non-empty array");
  for (std::size_t i = 0; i < ms.size(); ++i) cfg.measures.push_back(parse_measure(ms[i], i));

  if (j.contains("scale")) {
    const auto scale = get_field<std::string>(j, "scale", "config");
    if (scale == "paper") cfg.scale = RunScale::kPaper;
    else if (scale == "desk") cfg.scale = RunScale::kDesk;
    else throw ConfigError("scale: expected 'paper' or 'desk'");
  }
  if (j.contains("realizations")) {
    cfg.realizations = get_field<int>(j, "realizations", "config");
    if (*cfg.realizations < 1) throw ConfigError("realizations: must be >= 1");
  }
  if (j.contains("alpha")) {
    cfg.alpha = get_field<double>(j, "alpha", "config");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha: must lie in (0, 1)");
  }
  if (j.contains("master_seed")) cfg.master_seed = get_field<std::uint64_t>(j, "master_seed", "config");
  if (j.contains("output_dir")) cfg.output_dir = get_field<std::string>(j, "output_dir", "config");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<Task> expand_tasks(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  std::vector<std::optional<NoiseSpec>> noises;
  if (config.noise_levels.empty()) {
    noises.push_back(std::nullopt);
  } else {
    for (double level : config.noise_levels) noises.push_back(NoiseSpec{*config.noise_kind, level});
  }
  for (Index k : config.k_list) {
    for (double c : config.c_list) {
      for (const auto& noise : noises) {
        SystemSpec sys = config.system;
        sys.num_vars = k;
        sys.coupling = c;
        sys.noise = noise;
        for (Index n : config.n_list) {
          for (const auto& m : config.measures) {
            const auto resolved = resolve(m, sys);
            for (int r = 0; r < config.realizations_for(k); ++r) tasks.push_back({sys, n, resolved, r});
          }
        }
      }
    }
  }
  return tasks;
}

std::uint64_t realization_seed(std::uint64_t master_seed, const SystemSpec& system, Index n, int realization) {
  const std::string encoding = to_string(system.id) + "|K=" + std::to_string(system.num_vars) + "|c=" +
                               fmt(system.coupling) + "|s=" + fmt(system.drive) + "|noise=" + noise_name(system) +
                               "|level=" + fmt(noise_level(system)) + "|n=" + std::to_string(n);
  return derive_seed(derive_seed(master_seed, encoding), static_cast<std::uint64_t>(realization));
}

DecisionMode decision_mode(MeasureKind kind) {
  return kind == MeasureKind::MIME || kind == MeasureKind::PMIME ? DecisionMode::kPositiveIndex : DecisionMode::kPValue;
}

std::vector<PairResult> evaluate_pairs(const MultivariateTimeSeries& series, const MeasureSpec& measure,
                                       std::uint64_t seed, double alpha) {
  const Index k = series.num_vars();
  std::vector<PairResult> out;
  auto add_linear = [&](Index x, Index y, const LinearCausalityResult& r) {
    out.push_back({x, y, r.index, r.p_value});
  };
  auto add_nonlinear = [&](Index x, Index y, const NonlinearCausalityResult& r) {
    out.push_back({x, y, r.index, r.p_value});
  };
  MixedEmbeddingOptions nue;
  nue.max_lag = measure.max_lag;
  nue.k = measure.k;
  nue.replicas = measure.replicas;
  nue.alpha = alpha;
  nue.rule = measure.termination;
  nue.permutation = measure.permutation;
  nue.seed = seed;

  if (measure.kind == MeasureKind::PMIME) {
    const auto all = pmime_all(series, nue);
    for (Index x = 0; x < k; ++x)
      for (Index y = 0; y < k; ++y)
        if (x != y) add_nonlinear(x, y, all[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]);
    return out;
  }
  // Response-major so per-response work (RCGCI term selection) is shared.
  for (Index y = 0; y < k; ++y) {
    std::vector<LaggedTerm> selection;
    if (measure.kind == MeasureKind::RCGCI) selection = rcgci_select(series, y, measure.order);
    for (Index x = 0; x < k; ++x) {
      if (x == y) continue;
      const std::uint64_t pair_seed = derive_seed(seed, static_cast<std::uint64_t>(x * k + y));
      TransferEntropyOptions te_opts{measure.order, measure.tau, measure.k, measure.surrogates, pair_seed};
      switch (measure.kind) {
        case MeasureKind::GCI: add_linear(x, y, gci(series, x, y, measure.order)); break;
        case MeasureKind::CGCI: add_linear(x, y, cgci(series, x, y, measure.order)); break;
        case MeasureKind::PCGC: add_linear(x, y, pcgc(series, x, y, measure.conditioning, measure.order)); break;
        case MeasureKind::RCGCI:
          add_linear(x, y, rcgci(series, x, y, measure.order, std::span<const LaggedTerm>(selection)));
          break;
        case MeasureKind::TE: add_nonlinear(x, y, te(series, x, y, te_opts)); break;
        case MeasureKind::PTE: add_nonlinear(x, y, pte(series, x, y, te_opts)); break;
        case MeasureKind::MIME: {
          auto opts = nue;
          opts.seed = pair_seed;
          add_nonlinear(x, y, mime(series, x, y, opts));
          break;
        }
        case MeasureKind::PMIME: break;
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PairResult& a, const PairResult& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return out;
}

namespace {

RunRecord run_task_impl(const Task& task, double alpha, std::uint64_t master_seed) {
  RunRecord rec;
  rec.system = to_string(task.system.id);
  rec.num_vars = task.system.num_vars;
  rec.coupling = task.system.coupling;
  rec.noise = noise_name(task.system);
  rec.noise_level = noise_level(task.system);
  rec.n = task.n;
  rec.measure = task.measure.name();
  rec.realization = task.realization;
  rec.seed = realization_seed(master_seed, task.system, task.n, task.realization);
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto data = generate(task.system, task.n, rec.seed);
    rec.pairs = evaluate_pairs(data.series, task.measure, derive_seed(rec.seed, rec.measure), alpha);
    const auto net = decide_network(rec.pairs, rec.num_vars, alpha, decision_mode(task.measure.kind));
    rec.counts = confusion(net, data.truth);
    rec.score = scores(rec.counts);
  } catch (const std::exception& e) {
    rec.pairs.clear();
    rec.counts = {};
    rec.score = {};
    rec.status = std::string("error: ") + e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

int worker_count(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("CAUSALITY_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

RunRecord run_task(const Task& task, double alpha, std::uint64_t master_seed) {
  return run_task_impl(task, alpha, master_seed);
}

RunOutcome run_experiment(const ExperimentConfig& config, std::optional<int> workers,
                          const std::function<void(const RunRecord&)>& on_record) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const auto tasks = expand_tasks(config);
  std::set<std::string> wanted;
  for (const auto& t : tasks) wanted.insert(record_key(t));

  std::map<std::string, RunRecord> done;
  // Records of other experiments sharing the directory are kept in place;
  // this config's block goes where its first record was, else at the end.
  std::vector<RunRecord> foreign;
  std::optional<std::size_t> block_at;
  for (auto& r : read_run_directory(config.output_dir)) {
    const auto key = record_key(r);
    if (!wanted.count(key)) {
      foreign.push_back(std::move(r));
      continue;
    }
    if (!block_at) block_at = foreign.size();
    if (r.ok()) done[key] = std::move(r);
  }

  std::vector<const Task*> todo;
  for (const auto& t : tasks)
    if (!done.count(record_key(t))) todo.push_back(&t);

  const auto records_path = config.output_dir / "records.csv";
  const auto pairs_path = config.output_dir / "pairs.csv";
  const bool fresh_records = !fs::exists(records_path) || fs::file_size(records_path) == 0;
  const bool fresh_pairs = !fs::exists(pairs_path) || fs::file_size(pairs_path) == 0;
  std::ofstream records_out(records_path, std::ios::app);
  std::ofstream pairs_out(pairs_path, std::ios::app);
  if (fresh_records) records_out << kRecordsHeader << '\n';
  if (fresh_pairs) pairs_out << kPairsHeader << '\n';

  std::mutex sink;
  std::atomic<std::size_t> next{0};
  RunOutcome outcome;
  std::map<std::string, RunRecord> fresh;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      auto rec = run_task_impl(*todo[i], config.alpha, config.master_seed);
      std::lock_guard<std::mutex> lock(sink);
      write_record_line(records_out, rec);
      write_pair_lines(pairs_out, rec);
      records_out.flush();
      pairs_out.flush();
      if (on_record) on_record(rec);
      ++outcome.computed;
      if (!rec.ok()) ++outcome.failures;
      fresh[record_key(rec)] = std::move(rec);
    }
  };
  const int n_workers = std::min<int>(worker_count(workers), static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  records_out.close();
  pairs_out.close();

  for (const auto& t : tasks) {
    const auto key = record_key(t);
    if (auto it = fresh.find(key); it != fresh.end()) {
      outcome.records.push_back(std::move(it->second));
    } else if (auto jt = done.find(key); jt != done.end()) {
      outcome.records.push_back(std::move(jt->second));
    }
  }
  const auto split_at = static_cast<std::ptrdiff_t>(block_at.value_or(foreign.size()));
  std::vector<RunRecord> all(foreign.begin(), foreign.begin() + split_at);
  all.insert(all.end(), outcome.records.begin(), outcome.records.end());
  all.insert(all.end(), foreign.begin() + split_at, foreign.end());
  {
    std::ofstream out(records_path, std::ios::trunc);
    write_records_csv(out, all);
  }
  {
    std::ofstream out(pairs_path, std::ios::trunc);
    write_pairs_csv(out, all);
  }
  const auto tables = summarize(all);
  {
    std::ofstream out(config.output_dir / "summary.json", std::ios::trunc);
    write_summary_json(out, tables);
  }
  {
    std::ofstream out(config.output_dir / "summary.csv", std::ios::trunc);
    write_summary_csv(out, tables);
  }
  return outcome;
}

SummaryTables summarize(const std::vector<RunRecord>& records) {
  SummaryTables tables;
  std::vector<std::string> measure_order;
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<Scores>> groups;
  std::map<std::string, const RunRecord*> group_example;
  std::map<std::string, std::vector<Scores>> per_measure;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    const auto key = r.measure + "," + record_key(r.system, r.num_vars, r.coupling, r.noise, r.noise_level, r.n, "", 0);
    if (!groups.count(key)) {
      group_order.push_back(key);
      group_example[key] = &r;
    }
    groups[key].push_back(r.score);
    if (!per_measure.count(r.measure)) measure_order.push_back(r.measure);
    per_measure[r.measure].push_back(r.score);
  }
  for (const auto& key : group_order) {
    const RunRecord& r = *group_example[key];
    tables.rows.push_back({r.measure, r.system, r.num_vars, r.coupling, r.noise, r.noise_level, r.n,
                           aggregate(groups[key])});
  }
  for (const auto& m : measure_order) tables.ranking.push_back({m, aggregate(per_measure[m])});
  std::stable_sort(tables.ranking.begin(), tables.ranking.end(),
                   [](const OverallRow& a, const OverallRow& b) { return a.summary.mean.f1 > b.summary.mean.f1; });
  return tables;
}

void write_summary_json(std::ostream& out, const SummaryTables& tables) {
  auto scores_json = [](const ScoreSummary& s) {
    return json{{"realizations", s.count},
                {"sens", s.mean.sens},
                {"spec", s.mean.spec},
                {"f1", s.mean.f1},
                {"sens_se", s.std_error.sens},
                {"spec_se", s.std_error.spec},
                {"f1_se", s.std_error.f1}};
  };
  json j;
  j["rows"] = json::array();
  for (const auto& r : tables.rows) {
    auto row = scores_json(r.summary);
    row["measure"] = r.measure;
    row["system"] = r.system;
    row["K"] = r.num_vars;
    row["c"] = r.coupling;
    row["noise"] = r.noise;
    row["noise_level"] = r.noise_level;
    row["n"] = r.n;
    j["rows"].push_back(row);
  }
  j["ranking"] = json::array();
  for (const auto& r : tables.ranking) {
    auto row = scores_json(r.summary);
    row["measure"] = r.measure;
    j["ranking"].push_back(row);
  }
  out << j.dump(2) << '\n';
}

void write_summary_text(std::ostream& out, const SummaryTables& tables) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-7s %-4s %4s %5s %-9s %5s %6s %5s %7s %7s %7s\n", "measure", "sys", "K", "c",
                "noise", "level", "n", "reps", "Sens", "Spec", "F1");
  out << line;
  for (const auto& r : tables.rows) {
    std::snprintf(line, sizeof(line), "%-7s %-4s %4lld %5.2f %-9s %5.2f %6lld %5zu %7.2f %7.2f %7.2f\n",
                  r.measure.c_str(), r.system.c_str(), static_cast<long long>(r.num_vars), r.coupling,
                  r.noise.c_str(), r.noise_level, static_cast<long long>(r.n), r.summary.count, r.summary.mean.sens,
                  r.summary.mean.spec, r.summary.mean.f1);
    out << line;
  }
  out << "\noverall (descending mean F1)\n";
  for (const auto& r : tables.ranking) {
    std::snprintf(line, sizeof(line), "%-7s %5zu %7.2f %7.2f %7.2f\n", r.measure.c_str(), r.summary.count,
                  r.summary.mean.sens, r.summary.mean.spec, r.summary.mean.f1);
    out << line;
  }
}

void write_summary_csv(std::ostream& out, const SummaryTables& tables) {
  out << "measure,system,K,c,noise,noise_level,n,realizations,sens,spec,f1,sens_se,spec_se,f1_se\n";
  for (const auto& r : tables.rows) {
    const auto& s = r.summary;
    out << r.measure << ',' << r.system << ',' << r.num_vars << ',' << fmt(r.coupling) << ',' << r.noise << ','
        << fmt(r.noise_level) << ',' << r.n << ',' << s.count << ',' << fmt(s.mean.sens) << ',' << fmt(s.mean.spec)
        << ',' << fmt(s.mean.f1) << ',' << fmt(s.std_error.sens) << ',' << fmt(s.std_error.spec) << ','
        << fmt(s.std_error.f1) << '\n';
  }
}

PlotKind parse_plot_kind(const std::string& text) {
  if (text == "k_sweep") return PlotKind::kKSweep;
  if (text == "noise_sweep") return PlotKind::kNoiseSweep;
  throw InvalidArgument("unknown plot kind '" + text + "' (expected k_sweep or noise_sweep)");
}

void emit_plot_data(std::ostream& out, const std::vector<RunRecord>& records, PlotKind kind) {
  std::vector<std::string> measures;
  std::map<double, std::map<std::string, std::vector<Scores>>> table;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    if (std::find(measures.begin(), measures.end(), r.measure) == measures.end()) measures.push_back(r.measure);
    const double x = kind == PlotKind::kKSweep ? static_cast<double>(r.num_vars) : r.noise_level;
    table[x][r.measure].push_back(r.score);
  }
  out << (kind == PlotKind::kKSweep ? "K" : "noise_level");
  for (const auto& m : measures) out << ',' << m << "_sens," << m << "_spec," << m << "_f1";
  out << '\n';
  for (const auto& [x, by_measure] : table) {
    out << fmt(x);
    for (const auto& m : measures) {
      auto it = by_measure.find(m);
      if (it == by_measure.end()) {
        out << ",,,";
        continue;
      }
      const auto s = aggregate(it->second);
      out << ',' << fmt(s.mean.sens) << ',' << fmt(s.mean.spec) << ',' << fmt(s.mean.f1);
    }
    out << '\n';
  }
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) write_record_line(out, r);
}

void write_pairs_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kPairsHeader << '\n';
  for (const auto& r : records) write_pair_lines(out, r);
}

std::vector<RunRecord> read_run_directory(const std::filesystem::path& dir) {
  std::vector<RunRecord> records;
  std::ifstream in(dir / "records.csv");
  if (!in) return records;
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    auto f = split(line);
    if (f.size() != 18 || f[0] == "system") continue;
    try {
      RunRecord r;
      r.system = f[0];
      r.num_vars = parse_int(f[1]);
      r.coupling = parse_double(f[2]);
      r.noise = f[3];
      r.noise_level = parse_double(f[4]);
      r.n = parse_int(f[5]);
      r.measure = f[6];
      r.realization = static_cast<int>(parse_int(f[7]));
      r.seed = parse_u64(f[8]);
      r.counts = {parse_int(f[9]), parse_int(f[10]), parse_int(f[11]), parse_int(f[12])};
      r.score = scores(r.counts);
      r.status = f[16];
      r.wall_ms = parse_double(f[17]);
      const auto key = record_key(r);
      // Later lines supersede earlier ones (reruns append).
      if (auto it = index.find(key); it != index.end()) {
        records[it->second] = std::move(r);
      } else {
        index[key] = records.size();
        records.push_back(std::move(r));
      }
    } catch (const InvalidArgument&) {
      continue;  // truncated line from an interrupted run
    }
  }
  std::ifstream pin(dir / "pairs.csv");
  if (pin) {
    std::map<std::string, std::vector<PairResult>> pairs;
    while (std::getline(pin, line)) {
      auto f = split(line);
      if (f.size() != 12 || f[0] == "system") continue;
      try {
        const auto key = record_key(f[0], parse_int(f[1]), parse_double(f[2]), f[3], parse_double(f[4]),
                                    parse_int(f[5]), f[6], static_cast<int>(parse_int(f[7])));
        PairResult p{parse_int(f[8]) - 1, parse_int(f[9]) - 1, parse_double(f[10]), std::nullopt};
        if (!f[11].empty()) p.p_value = parse_double(f[11]);
        auto& list = pairs[key];
        // A rerun of the same record restarts its pair list.
        if (!list.empty() && list.back().from == p.from && list.back().to == p.to) list.clear();
        if (!list.empty() && std::tie(p.from, p.to) < std::tie(list.back().from, list.back().to)) list.clear();
        list.push_back(p);
      } catch (const InvalidArgument&) {
        continue;
      }
    }
    for (auto& r : records) {
      if (auto it = pairs.find(record_key(r)); it != pairs.end()) r.pairs = std::move(it->second);
    }
  }
  return records;
}

}  // namespace causality
