#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fogran/scenario.hpp"
#include "fogran/scheme.hpp"
#include "fogran/solver.hpp"

namespace fogran {

/// Parameters a sweep can vary: MEC-L capacity, MEC-H capacity, fronthaul
/// bandwidth, midhaul bandwidth (all per node) and the user count.
enum class SweepParam : std::uint8_t { MeclCapacity, MechCapacity, FronthaulBandwidth, MidhaulBandwidth, Users };

std::string_view to_string(SweepParam p);
std::optional<SweepParam> parse_sweep_param(std::string_view name);

/// Sets one parameter of the generator to a fixed value.
void apply(ScenarioSpec& spec, SweepParam param, double value);

struct SweepSpec {
  SweepParam param = SweepParam::MeclCapacity;
  double start = 0.0;
  double stop = 0.0;
  int steps = 2;
  ScenarioSpec base;
  int realizations = 1;
  std::uint64_t base_seed = 1;
  SolverConfig solver;
  unsigned threads = 1;

  std::vector<double> points() const;
  void validate() const;
};

struct SweepRow {
  SweepParam param;
  double value = 0.0;
  Scheme scheme = Scheme::Fog;
  double mean_total_delay_s = 0.0;
  double stderr_s = 0.0;
  int realizations = 0;  // realizations contributing to the mean
  int infeasible = 0;    // realizations dropped for a zero-rate user
};

/// Seed of realization r: base seed xor r, shared across sweep points so
/// every point sees the same random draws apart from the swept parameter.
std::uint64_t realization_seed(std::uint64_t base_seed, int realization);

/// Total delay of each scheme on one generated realization, or nullopt when
/// some user has zero uplink rate.
std::optional<std::vector<double>> run_realization(const ScenarioSpec& spec, std::uint64_t seed,
                                                   const std::vector<Scheme>& schemes, const SolverConfig& config);

/// Rows ordered by sweep point, then by the order of `schemes`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<Scheme>& schemes);

inline constexpr std::string_view kSweepCsvHeader =
    "sweep_param,value,scheme,mean_total_delay_s,stderr,realizations,infeasible_count";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Human-readable report of one solve: per-task decision, allocation and
/// delay breakdown, totals, final multipliers and iteration count.
std::string single_report(const Scenario& scenario, Scheme scheme, const SolverConfig& config);

struct GapRow {
  int realization = 0;
  Scheme scheme = Scheme::Fog;
  double solver_delay_s = 0.0;
  double oracle_delay_s = 0.0;
  double relative_gap = 0.0;
};

struct GapSummary {
  std::vector<GapRow> rows;
  double median = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  int infeasible = 0;
};

struct OracleCheckSpec {
  ScenarioSpec base;
  int realizations = 1;
  std::uint64_t base_seed = 1;
  SolverConfig solver;
  std::uint64_t enumeration_cap = 729;
};

/// Relative gap (solver - oracle) / oracle per realization and scheme.
GapSummary compare_oracle(const OracleCheckSpec& spec, const std::vector<Scheme>& schemes);

void write_gap_csv(std::ostream& out, const GapSummary& summary);

/// Median (mean of the middle pair for even n) and nearest-rank percentile.
double median_of(std::vector<double> values);
double percentile_of(std::vector<double> values, double q);

std::string format_number(double v);

}  // namespace fogran
