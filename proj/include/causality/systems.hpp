#pragma once

// Benchmark systems with known causal networks, and observational noise.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "causality/series.hpp"

namespace causality {

enum class SystemId { S1, S2, S3, S4, S5, S6 };

enum class NoiseKind { Gaussian, TStudent2, Garch11 };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double level = 0.1;  // noise sd as a fraction of the clean column sd
};

struct SystemSpec {
  SystemId id = SystemId::S1;
  Index num_vars = 5;
  double coupling = 0.0;      // c, coupled Henon maps only
  double drive = 0.1;         // s, S5 only
  std::optional<NoiseSpec> noise;
};

/// Directed adjacency; entry (i, j) is true iff X_i -> X_j directly.
struct GroundTruth {
  MatrixXb adjacency;

  Index num_vars() const { return adjacency.rows(); }
  Index num_links() const { return adjacency.count(); }
};

struct Realization {
  MultivariateTimeSeries series;
  GroundTruth truth;
};

constexpr Index kDefaultBurnIn = 1000;

Realization gen_s1(Index n, std::uint64_t seed);
Realization gen_s2(Index n, std::uint64_t seed);
/// Coupled Henon maps in K variables with coupling c in [0, 0.6]. A run
/// leaving |x| <= 1e5 restarts from new initial conditions, at most 10 times.
Realization gen_henon(Index num_vars, double coupling, Index n, std::uint64_t seed);
/// S2 with X3 removed.
Realization gen_s4(Index n, std::uint64_t seed);
/// Henon maps with X5 as common driver (c = 0.1, s = 0.1).
Realization gen_s5(Index n, std::uint64_t seed);
Realization gen_s6(Index n, std::uint64_t seed);

/// Dispatches on spec.id and applies spec.noise if present.
Realization generate(const SystemSpec& spec, Index n, std::uint64_t seed);

/// Adds independent observational noise to every column, scaled to
/// level x column sd. Gaussian and GARCH(1,1) noise is scaled by its sample
/// sd, Student-t(2) noise by its trimmed sd (central 99%).
MultivariateTimeSeries add_noise(const MultivariateTimeSeries& series, const NoiseSpec& spec, std::uint64_t seed);

/// Raw GARCH(1,1) draws e_t = sigma_t w_t, sigma_t^2 = 0.2 + 0.2 e_{t-1}^2 + 0.75 sigma_{t-1}^2,
/// started at the unconditional variance 4.
Vector garch11_noise(Index n, std::uint64_t seed);

/// Standard deviation of the values between the 0.5% and 99.5% quantiles.
double trimmed_sd(const Eigen::Ref<const Vector>& values);

/// Drops the first `burn` samples.
MultivariateTimeSeries transient_discard(const MultivariateTimeSeries& raw, Index burn = kDefaultBurnIn);

GroundTruth truth_s1();
GroundTruth truth_s2();
GroundTruth truth_henon(Index num_vars);
GroundTruth truth_s4();
GroundTruth truth_s5();
GroundTruth truth_s6();
GroundTruth truth_for(const SystemSpec& spec);

/// Maximum lag appearing in the system equations (the default VAR order and
/// embedding dimension).
int true_max_lag(SystemId id);

/// Default number of conditioning variables for PCGC.
int default_pcgc_conditioning(const SystemSpec& spec);

std::string to_string(SystemId id);
SystemId parse_system_id(const std::string& text);
std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

/// Edge list CSV with header "from,to", 1-based variable numbers.
void write_edge_list(std::ostream& out, const GroundTruth& truth);

}  // namespace causality
