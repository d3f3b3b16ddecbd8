#include "fogran/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "fogran/latency.hpp"
#include "fogran/oracle.hpp"
#include "fogran/phy.hpp"

namespace fogran {
namespace {

// Runs job(n) for n in [0, count) on `threads` workers. Results are written
// by index, so output does not depend on scheduling.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t n = 0; n < count; ++n) job(n);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t n; (n = next.fetch_add(1)) < count;) {
        try {
          job(n);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Eigen::VectorXd rates_for(const Scenario& s) {
  const auto channels = phy::generate_channels<double>(s.topology, s.geometry, s.radio, s.channel_seed);
  return phy::mmse_rates(s.topology, channels);
}

bool all_rates_usable(const Eigen::VectorXd& rates) {
  return rates.size() == 0 || (rates.allFinite() && (rates.array() > 0.0).all());
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::MeclCapacity: return "FL";
    case SweepParam::MechCapacity: return "FH";
    case SweepParam::FronthaulBandwidth: return "BL";
    case SweepParam::MidhaulBandwidth: return "BH";
    case SweepParam::Users: return "K";
  }
  return "?";
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  if (name == "FL" || name == "mecl") return SweepParam::MeclCapacity;
  if (name == "FH" || name == "mech") return SweepParam::MechCapacity;
  if (name == "BL" || name == "fronthaul") return SweepParam::FronthaulBandwidth;
  if (name == "BH" || name == "midhaul") return SweepParam::MidhaulBandwidth;
  if (name == "K" || name == "users") return SweepParam::Users;
  return std::nullopt;
}

void apply(ScenarioSpec& spec, SweepParam param, double value) {
  switch (param) {
    case SweepParam::MeclCapacity: spec.mecl_capacity_hz = Range::fixed(value); break;
    case SweepParam::MechCapacity: spec.mech_capacity_hz = Range::fixed(value); break;
    case SweepParam::FronthaulBandwidth: spec.fronthaul_capacity_hz = Range::fixed(value); break;
    case SweepParam::MidhaulBandwidth: spec.midhaul_capacity_hz = Range::fixed(value); break;
    case SweepParam::Users: spec.num_users = static_cast<Index>(std::llround(value)); break;
  }
}

std::vector<double> SweepSpec::points() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int n = 0; n < steps; ++n) {
    double v = steps == 1 ? start : start + (stop - start) * static_cast<double>(n) / static_cast<double>(steps - 1);
    if (param == SweepParam::Users) v = std::round(v);
    out.push_back(v);
  }
  return out;
}

void SweepSpec::validate() const {
  if (steps < 1) throw std::invalid_argument("sweep needs at least 1 step");
  if (realizations < 1) throw std::invalid_argument("sweep needs at least 1 realization");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw std::invalid_argument("sweep range must be finite");
  const double lowest = std::min(start, stop);
  if (param == SweepParam::Users ? lowest < 0.0 : !(lowest > 0.0)) {
    throw std::invalid_argument("sweep range out of domain for " + std::string(to_string(param)));
  }
}

std::uint64_t realization_seed(std::uint64_t base_seed, int realization) {
  return base_seed ^ static_cast<std::uint64_t>(realization);
}

std::optional<std::vector<double>> run_realization(const ScenarioSpec& spec, std::uint64_t seed,
                                                   const std::vector<Scheme>& schemes, const SolverConfig& config) {
  const Scenario s = generate_scenario(spec, seed);
  const Eigen::VectorXd rates = rates_for(s);
  if (!all_rates_usable(rates)) return std::nullopt;
  std::vector<double> out;
  out.reserve(schemes.size());
  for (Scheme scheme : schemes) out.push_back(solve(s.topology, s.tasks, rates, scheme, config).total_delay_s);
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<Scheme>& schemes) {
  spec.validate();
  const auto points = spec.points();
  const auto R = static_cast<std::size_t>(spec.realizations);
  std::vector<std::optional<std::vector<double>>> results(points.size() * R);

  parallel_for(results.size(), spec.threads, [&](std::size_t n) {
    ScenarioSpec s = spec.base;
    apply(s, spec.param, points[n / R]);
    results[n] = run_realization(s, realization_seed(spec.base_seed, static_cast<int>(n % R)), schemes, spec.solver);
  });

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t m = 0; m < schemes.size(); ++m) {
      SweepRow row{spec.param, points[p], schemes[m]};
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        const auto& res = results[p * R + r];
        if (!res) {
          ++row.infeasible;
          continue;
        }
        const double v = (*res)[m];
        sum += v;
        sum_sq += v * v;
        ++row.realizations;
      }
      if (row.realizations > 0) {
        const double n = row.realizations;
        row.mean_total_delay_s = sum / n;
        const double var = n > 1 ? std::max(0.0, (sum_sq - n * row.mean_total_delay_s * row.mean_total_delay_s) / (n - 1)) : 0.0;
        row.stderr_s = std::sqrt(var / n);
      } else {
        row.mean_total_delay_s = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.param) << ',' << format_number(r.value) << ',' << to_string(r.scheme) << ','
        << format_number(r.mean_total_delay_s) << ',' << format_number(r.stderr_s) << ',' << r.realizations << ','
        << r.infeasible << '\n';
  }
}

std::string single_report(const Scenario& scenario, Scheme scheme, const SolverConfig& config) {
  const Topology& t = scenario.topology;
  const Eigen::VectorXd rates = rates_for(scenario);
  const SolveResult result = solve(t, scenario.tasks, rates, scheme, config);
  if (const auto violations = check_feasibility(t, scenario.tasks, result.decision, result.allocation);
      !violations.empty()) {
    throw std::runtime_error("solver produced an infeasible allocation: " + violations.front().describe());
  }
  const auto breakdown = delay_breakdown(t, scenario.tasks, result.decision, result.allocation, rates);
  const Allocation& a = result.allocation;

  std::ostringstream out;
  out << "scheme " << to_string(scheme) << ", " << t.num_users << " tasks, " << t.num_rus << " RUs, " << t.num_dus
      << " DUs\n";
  out << "task,ru,du,tier,rate_bps,mecl_speed_hz,mech_speed_hz,cloud_speed_hz,fronthaul_bw_hz,midhaul_bw_hz,"
         "access_s,fronthaul_s,midhaul_s,compute_s,total_s\n";
  double access = 0.0;
  double fronthaul = 0.0;
  double midhaul = 0.0;
  double compute = 0.0;
  for (Index k = 0; k < t.num_users; ++k) {
    const auto& b = breakdown[static_cast<std::size_t>(k)];
    out << k << ',' << t.ru_of_user(k) << ',' << t.du_of_user(k) << ',' << to_string(result.decision[k]) << ','
        << format_number(rates(k)) << ',' << format_number(a.mecl_speed(k)) << ',' << format_number(a.mech_speed(k))
        << ',' << format_number(a.cloud_speed(k)) << ',' << format_number(a.fronthaul_bw(k)) << ','
        << format_number(a.midhaul_bw(k)) << ',' << format_number(b.access_s) << ',' << format_number(b.fronthaul_s)
        << ',' << format_number(b.midhaul_s) << ',' << format_number(b.compute_s) << ',' << format_number(b.total_s)
        << '\n';
    access += b.access_s;
    fronthaul += b.fronthaul_s;
    midhaul += b.midhaul_s;
    compute += b.compute_s;
  }
  out << "total_access_s " << format_number(access) << '\n';
  out << "total_fronthaul_s " << format_number(fronthaul) << '\n';
  out << "total_midhaul_s " << format_number(midhaul) << '\n';
  out << "total_compute_s " << format_number(compute) << '\n';
  out << "total_delay_s " << format_number(result.total_delay_s) << '\n';

  auto join = [](const Eigen::VectorXd& v) {
    std::string s;
    for (Index n = 0; n < v.size(); ++n) s += (n ? " " : "") + format_number(v(n));
    return s;
  };
  out << "dual_mu " << join(result.duals.mu) << '\n';
  out << "dual_lambda " << join(result.duals.lambda) << '\n';
  out << "dual_rho " << format_number(result.duals.rho) << '\n';
  out << "dual_nu " << join(result.duals.nu) << '\n';
  out << "dual_xi " << join(result.duals.xi) << '\n';
  out << "iterations " << result.iterations << '\n';
  out << "converged " << (result.converged ? "yes" : "no") << '\n';
  return out.str();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile_of(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

GapSummary compare_oracle(const OracleCheckSpec& spec, const std::vector<Scheme>& schemes) {
  if (spec.realizations < 1) throw std::invalid_argument("oracle check needs at least 1 realization");
  GapSummary summary;
  for (int r = 0; r < spec.realizations; ++r) {
    const Scenario s = generate_scenario(spec.base, realization_seed(spec.base_seed, r));
    const Eigen::VectorXd rates = rates_for(s);
    if (!all_rates_usable(rates)) {
      ++summary.infeasible;
      continue;
    }
    for (Scheme scheme : schemes) {
      const double heuristic = solve(s.topology, s.tasks, rates, scheme, spec.solver).total_delay_s;
      const double exact = enumerate_optimal(s.topology, s.tasks, rates, scheme, spec.enumeration_cap).total_delay_s;
      const double gap = exact > 0.0 ? (heuristic - exact) / exact : 0.0;
      summary.rows.push_back({r, scheme, heuristic, exact, gap});
    }
  }
  std::vector<double> gaps;
  for (const auto& row : summary.rows) gaps.push_back(row.relative_gap);
  summary.median = median_of(gaps);
  summary.p95 = percentile_of(gaps, 0.95);
  summary.max = gaps.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(gaps.begin(), gaps.end());
  return summary;
}

void write_gap_csv(std::ostream& out, const GapSummary& summary) {
  out << "realization,scheme,solver_delay_s,oracle_delay_s,relative_gap\n";
  for (const auto& r : summary.rows) {
    out << r.realization << ',' << to_string(r.scheme) << ',' << format_number(r.solver_delay_s) << ','
        << format_number(r.oracle_delay_s) << ',' << format_number(r.relative_gap) << '\n';
  }
  out << "# median_gap " << format_number(summary.median) << '\n';
  out << "# p95_gap " << format_number(summary.p95) << '\n';
  out << "# max_gap " << format_number(summary.max) << '\n';
  out << "# infeasible_realizations " << summary.infeasible << '\n';
}

}  // namespace fogran
