#include "causality/systems.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "causality/errors.hpp"
#include "causality/seeding.hpp"

namespace causality {

namespace {

constexpr double kDivergenceBound = 1e5;
constexpr int kMaxRestarts = 10;

GroundTruth links(Index k, std::initializer_list<std::pair<int, int>> one_based) {
  GroundTruth g;
  g.adjacency = MatrixXb::Constant(k, k, false);
  for (auto [from, to] : one_based) g.adjacency(from - 1, to - 1) = true;
  return g;
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix e(rows, cols);
  // Row-major draw order keeps the stream layout independent of storage order.
  for (Index t = 0; t < rows; ++t)
    for (Index j = 0; j < cols; ++j) e(t, j) = normal(rng);
  return e;
}

MultivariateTimeSeries finish(Matrix raw) {
  return transient_discard(MultivariateTimeSeries(std::move(raw)), kDefaultBurnIn);
}

void check_length(Index n) {
  if (n < 1) throw InvalidArgument("series length must be positive");
}

Matrix simulate_s2(Index total, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix e = gaussian_matrix(total, 5, rng);
  const double r2 = std::sqrt(2.0);
  Matrix x = Matrix::Zero(total, 5);
  for (Index t = 3; t < total; ++t) {
    x(t, 0) = 0.95 * r2 * x(t - 1, 0) - 0.9025 * x(t - 2, 0) + e(t, 0);
    x(t, 1) = 0.5 * x(t - 2, 0) * x(t - 2, 0) + e(t, 1);
    x(t, 2) = -0.4 * x(t - 3, 0) + e(t, 2);
    x(t, 3) = -0.5 * x(t - 2, 0) * x(t - 2, 0) + 0.25 * r2 * x(t - 1, 3) + 0.25 * r2 * x(t - 1, 4) + e(t, 3);
    x(t, 4) = -0.25 * r2 * x(t - 1, 3) + 0.25 * r2 * x(t - 1, 4) + e(t, 4);
  }
  return x;
}

// Runs `step` on fresh uniform [0, 0.1] initial conditions until the
// trajectory stays bounded.
template <typename Step>
Matrix simulate_map(Index total, Index k, std::uint64_t seed, Step step) {
  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> init(0.0, 0.1);
    Matrix x(total, k);
    for (Index t = 0; t < std::min<Index>(2, total); ++t)
      for (Index i = 0; i < k; ++i) x(t, i) = init(rng);
    bool bounded = true;
    for (Index t = 2; t < total && bounded; ++t) {
      step(x, t);
      for (Index i = 0; i < k; ++i) {
        if (!(std::abs(x(t, i)) <= kDivergenceBound)) {
          bounded = false;
          break;
        }
      }
    }
    if (bounded) return x;
  }
  throw DivergenceAfterRetries("map diverged for " + std::to_string(kMaxRestarts) + " restarts");
}

}  // namespace

GroundTruth truth_s1() { return links(5, {{1, 2}, {1, 4}, {2, 4}, {4, 5}, {5, 1}, {5, 2}, {5, 3}}); }

GroundTruth truth_s2() { return links(5, {{1, 2}, {1, 3}, {1, 4}, {4, 5}, {5, 4}}); }

GroundTruth truth_henon(Index num_vars) {
  GroundTruth g;
  g.adjacency = MatrixXb::Constant(num_vars, num_vars, false);
  for (Index i = 1; i + 1 < num_vars; ++i) {
    g.adjacency(i - 1, i) = true;
    g.adjacency(i + 1, i) = true;
  }
  return g;
}

GroundTruth truth_s4() {
  // S2 restricted to X1, X2, X4, X5.
  return links(4, {{1, 2}, {1, 3}, {3, 4}, {4, 3}});
}

GroundTruth truth_s5() { return links(5, {{5, 1}, {5, 2}, {5, 3}, {5, 4}, {1, 2}, {2, 3}, {3, 4}}); }

GroundTruth truth_s6() {
  return links(20, {{3, 1},   {19, 1},  {1, 2},   {15, 2},  {5, 4},   {7, 4},  {3, 5},   {3, 6},
                    {10, 6},  {11, 8},  {19, 8},  {20, 9},  {20, 11}, {4, 11}, {19, 12}, {16, 12},
                    {4, 14},  {19, 16}, {3, 16},  {7, 17},  {7, 18},  {2, 18}, {20, 18}});
}

GroundTruth truth_for(const SystemSpec& spec) {
  switch (spec.id) {
    case SystemId::S1: return truth_s1();
    case SystemId::S2: return truth_s2();
    case SystemId::S3: return truth_henon(spec.num_vars);
    case SystemId::S4: return truth_s4();
    case SystemId::S5: return truth_s5();
    case SystemId::S6: return truth_s6();
  }
  throw InvalidArgument("unknown system");
}

MultivariateTimeSeries transient_discard(const MultivariateTimeSeries& raw, Index burn) {
  if (burn < 0 || burn >= raw.length()) throw InvalidArgument("burn-in must lie in [0, n)");
  if (burn == 0) return raw;
  return MultivariateTimeSeries(raw.values().bottomRows(raw.length() - burn), raw.labels());
}

Realization gen_s1(Index n, std::uint64_t seed) {
  check_length(n);
  const Index total = n + kDefaultBurnIn;
  Rng rng(seed);
  const Matrix e = gaussian_matrix(total, 5, rng);
  Matrix x = Matrix::Zero(total, 5);
  for (Index t = 4; t < total; ++t) {
    x(t, 0) = 0.4 * x(t - 1, 0) - 0.5 * x(t - 2, 0) + 0.4 * x(t - 1, 4) + e(t, 0);
    x(t, 1) = 0.4 * x(t - 1, 1) - 0.3 * x(t - 4, 0) + 0.4 * x(t - 2, 4) + e(t, 1);
    x(t, 2) = 0.5 * x(t - 1, 2) - 0.7 * x(t - 2, 2) - 0.3 * x(t - 3, 4) + e(t, 2);
    x(t, 3) = 0.8 * x(t - 3, 3) + 0.4 * x(t - 2, 0) + 0.3 * x(t - 3, 1) + e(t, 3);
    x(t, 4) = 0.7 * x(t - 1, 4) - 0.5 * x(t - 2, 4) - 0.4 * x(t - 1, 3) + e(t, 4);
  }
  return {finish(std::move(x)), truth_s1()};
}

Realization gen_s2(Index n, std::uint64_t seed) {
  check_length(n);
  return {finish(simulate_s2(n + kDefaultBurnIn, seed)), truth_s2()};
}

Realization gen_s4(Index n, std::uint64_t seed) {
  check_length(n);
  const auto full = finish(simulate_s2(n + kDefaultBurnIn, seed));
  const Index keep[] = {0, 1, 3, 4};
  auto series = full.select(keep);
  return {MultivariateTimeSeries(series.values(), {"X1", "X2", "X4", "X5"}), truth_s4()};
}

Realization gen_henon(Index num_vars, double coupling, Index n, std::uint64_t seed) {
  check_length(n);
  if (num_vars < 3) throw InvalidArgument("coupled Henon maps need K >= 3");
  if (!(coupling >= 0.0 && coupling <= 0.6)) throw InvalidArgument("Henon coupling must lie in [0, 0.6]");
  const Index k = num_vars;
  const double c = coupling;
  auto x = simulate_map(n + kDefaultBurnIn, k, seed, [k, c](Matrix& x, Index t) {
    for (Index i = 0; i < k; ++i) {
      const double prev = x(t - 1, i);
      double arg = prev;
      if (i > 0 && i + 1 < k) arg = 0.5 * c * (x(t - 1, i - 1) + x(t - 1, i + 1)) + (1.0 - c) * prev;
      x(t, i) = 1.4 - arg * arg + 0.3 * x(t - 2, i);
    }
  });
  return {finish(std::move(x)), truth_henon(k)};
}

Realization gen_s5(Index n, std::uint64_t seed) {
  check_length(n);
  constexpr double c = 0.1;
  constexpr double s = 0.1;
  auto x = simulate_map(n + kDefaultBurnIn, 5, seed, [](Matrix& x, Index t) {
    const double drive = s * x(t - 1, 4) * x(t - 1, 4);
    x(t, 0) = 1.4 - drive - (1.0 - s) * x(t - 1, 0) * x(t - 1, 0) + 0.3 * x(t - 2, 0);
    for (Index i = 1; i < 4; ++i) {
      x(t, i) = 1.4 - drive - c * x(t - 1, i - 1) * x(t - 1, i) - (1.0 - c - s) * x(t - 1, i) * x(t - 1, i) +
                0.3 * x(t - 2, i);
    }
    x(t, 4) = 1.4 - x(t - 1, 4) * x(t - 1, 4) + 0.3 * x(t - 2, 4);
  });
  return {finish(std::move(x)), truth_s5()};
}

Realization gen_s6(Index n, std::uint64_t seed) {
  check_length(n);
  const Index total = n + kDefaultBurnIn;
  Rng rng(seed);
  const Matrix e = gaussian_matrix(total, 20, rng);
  Matrix x = Matrix::Zero(total, 20);
  // v(i, lag) is x_{i, t - lag} with 1-based variable numbers.
  for (Index t = 3; t < total; ++t) {
    auto v = [&](int i, int lag) { return x(t - lag, i - 1); };
    auto set = [&](int i, double value) { x(t, i - 1) = value + e(t, i - 1); };
    set(1, 0.8 * v(1, 1) - 0.1 * v(3, 2) - 0.3 * v(19, 2));
    set(2, 0.8 * v(2, 1) - 0.2 * v(1, 2) * v(15, 1));
    set(3, 0.8 * v(3, 1));
    set(4, 0.8 * v(4, 1) - 0.2 * v(5, 2) * v(7, 1));
    set(5, 0.8 * v(5, 1) - 0.5 * v(3, 1) * v(3, 1));
    set(6, 0.8 * v(6, 1) - 0.4 * v(3, 3) + 0.1 * v(10, 1) * v(10, 1));
    set(7, 0.8 * v(7, 1));
    set(8, -0.6 * v(8, 1) + 0.1 * v(11, 3) * v(19, 2));
    set(9, 0.8 * v(9, 1) - 0.1 * v(20, 1));
    set(10, 0.8 * v(10, 1));
    set(11, 0.8 * v(11, 1) + 0.1 * v(20, 1) - 0.1 * v(4, 2) * v(4, 2));
    set(12, 0.8 * v(12, 1) + 0.2 * v(19, 2) - 0.1 * v(16, 1) * v(16, 1));
    set(13, 0.8 * v(13, 1));
    set(14, 0.8 * v(14, 1) - 0.2 * v(4, 3) * v(4, 3));
    set(15, 0.8 * v(15, 1));
    set(16, 0.8 * v(16, 1) + 0.1 * v(19, 2) - 0.3 * v(3, 2));
    set(17, 0.8 * v(17, 1) - 0.1 * v(7, 2) * v(7, 2));
    set(18, 0.8 * v(18, 1) - 0.3 * v(7, 2) + 0.5 * v(2, 3) * v(20, 1));
    set(19, 0.8 * v(19, 1));
    set(20, 0.8 * v(20, 1));
  }
  return {finish(std::move(x)), truth_s6()};
}

Realization generate(const SystemSpec& spec, Index n, std::uint64_t seed) {
  auto check_k = [&](Index expected) {
    if (spec.num_vars != expected) {
      throw InvalidArgument(to_string(spec.id) + " has K = " + std::to_string(expected) + ", got " +
                            std::to_string(spec.num_vars));
    }
  };
  Realization r;
  switch (spec.id) {
    case SystemId::S1: check_k(5); r = gen_s1(n, seed); break;
    case SystemId::S2: check_k(5); r = gen_s2(n, seed); break;
    case SystemId::S3: r = gen_henon(spec.num_vars, spec.coupling, n, seed); break;
    case SystemId::S4: check_k(4); r = gen_s4(n, seed); break;
    case SystemId::S5: check_k(5); r = gen_s5(n, seed); break;
    case SystemId::S6: check_k(20); r = gen_s6(n, seed); break;
  }
  if (spec.noise) r.series = add_noise(r.series, *spec.noise, derive_seed(seed, "observational-noise"));
  return r;
}

Vector garch11_noise(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(n);
  double var = 4.0;  // 0.2 / (1 - 0.2 - 0.75)
  double prev = std::sqrt(var) * normal(rng);
  for (Index t = 0; t < n; ++t) {
    var = 0.2 + 0.2 * prev * prev + 0.75 * var;
    prev = std::sqrt(var) * normal(rng);
    e(t) = prev;
  }
  return e;
}

double trimmed_sd(const Eigen::Ref<const Vector>& values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  const auto lo = static_cast<std::size_t>(std::floor(0.005 * static_cast<double>(n)));
  const auto hi = std::max(lo + 1, static_cast<std::size_t>(std::ceil(0.995 * static_cast<double>(n))));
  const auto span = Eigen::Map<const Vector>(v.data() + lo, static_cast<Index>(hi - lo));
  if (span.size() < 2) return 0.0;
  return std::sqrt((span.array() - span.mean()).square().sum() / static_cast<double>(span.size() - 1));
}

MultivariateTimeSeries add_noise(const MultivariateTimeSeries& series, const NoiseSpec& spec, std::uint64_t seed) {
  if (!(spec.level > 0.0)) throw InvalidArgument("noise level must be positive");
  const Index n = series.length();
  auto sample_sd = [](const Vector& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(std::max<Index>(v.size() - 1, 1)));
  };
  Matrix values = series.values();
  for (Index j = 0; j < series.num_vars(); ++j) {
    const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(j));
    Vector noise(n);
    double reference = 1.0;
    switch (spec.kind) {
      case NoiseKind::Gaussian: {
        Rng rng(stream);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index t = 0; t < n; ++t) noise(t) = normal(rng);
        reference = sample_sd(noise);
        break;
      }
      case NoiseKind::TStudent2: {
        Rng rng(stream);
        std::student_t_distribution<double> student(2.0);
        for (Index t = 0; t < n; ++t) noise(t) = student(rng);
        reference = trimmed_sd(noise);
        break;
      }
      case NoiseKind::Garch11:
        noise = garch11_noise(n, stream);
        reference = sample_sd(noise);
        break;
    }
    const double target = spec.level * sample_sd(values.col(j));
    if (reference > 0.0) values.col(j) += noise * (target / reference);
  }
  return MultivariateTimeSeries(std::move(values), series.labels());
}

int true_max_lag(SystemId id) {
  switch (id) {
    case SystemId::S1: return 4;
    case SystemId::S2: return 3;
    case SystemId::S3: return 2;
    case SystemId::S4: return 3;
    case SystemId::S5: return 2;
    case SystemId::S6: return 3;
  }
  return 1;
}

int default_pcgc_conditioning(const SystemSpec& spec) {
  switch (spec.id) {
    case SystemId::S1:
    case SystemId::S2:
    case SystemId::S5: return 2;
    case SystemId::S4: return 1;
    case SystemId::S6: return 3;
    case SystemId::S3: {
      const Index k = spec.num_vars;
      if (k <= 5) return static_cast<int>(std::min<Index>(2, k - 2));
      if (k <= 10) return 3;
      if (k <= 15) return 4;
      // 4 at K = 20 rising linearly to 18 at K = 100.
      const double ks = 4.0 + (static_cast<double>(k) - 20.0) * 14.0 / 80.0;
      return static_cast<int>(std::clamp<double>(std::round(ks), 4.0, static_cast<double>(k - 2)));
    }
  }
  return 2;
}

std::string to_string(SystemId id) {
  switch (id) {
    case SystemId::S1: return "S1";
    case SystemId::S2: return "S2";
    case SystemId::S3: return "S3";
    case SystemId::S4: return "S4";
    case SystemId::S5: return "S5";
    case SystemId::S6: return "S6";
  }
  return "?";
}

SystemId parse_system_id(const std::string& text) {
  for (auto id : {SystemId::S1, SystemId::S2, SystemId::S3, SystemId::S4, SystemId::S5, SystemId::S6}) {
    if (to_string(id) == text) return id;
  }
  throw InvalidArgument("unknown system '" + text + "' (expected S1..S6)");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::TStudent2: return "tstudent2";
    case NoiseKind::Garch11: return "garch11";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& text) {
  for (auto kind : {NoiseKind::Gaussian, NoiseKind::TStudent2, NoiseKind::Garch11}) {
    if (to_string(kind) == text) return kind;
  }
  throw InvalidArgument("unknown noise kind '" + text + "' (expected gaussian, tstudent2 or garch11)");
}

void write_edge_list(std::ostream& out, const GroundTruth& truth) {
  out << "from,to\n";
  for (Index i = 0; i < truth.num_vars(); ++i)
    for (Index j = 0; j < truth.num_vars(); ++j)
      if (truth.adjacency(i, j)) out << i + 1 << ',' << j + 1 << '\n';
}

}  // namespace causality
