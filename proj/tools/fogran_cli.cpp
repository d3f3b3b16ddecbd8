// fogran: plan task offloading in a three-tier fog C-RAN and reproduce the
// scheme-comparison sweeps.
//
//   fogran --seed 7 --users 12 --scheme fog            single solve report
//   fogran --scenario net.txt --scheme all             same, from a file
//   fogran --sweep FL=1e9:5e9:5 --users 8 --realizations 50 --out fl.csv
//   fogran --oracle-check --users 5 --rus 2 --dus 1 --realizations 200

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogran/experiment.hpp"
#include "fogran/latency.hpp"
#include "fogran/oracle.hpp"
#include "fogran/phy.hpp"
#include "fogran/scenario.hpp"
#include "fogran/solver.hpp"

namespace {

using namespace fogran;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw UsageError("malformed number '" + std::string(text) + "' in " + std::string(what));
  }
  return v;
}

Range parse_range(std::string_view text, std::string_view what) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return Range::fixed(parse_double(text, what));
  return {parse_double(text.substr(0, colon), what), parse_double(text.substr(colon + 1), what)};
}

// --set key=value or key=lo:hi
void apply_override(ScenarioSpec& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string_view value = std::string_view(assignment).substr(eq + 1);

  if (key == "mecl_capacity_hz" || key == "FL") {
    spec.mecl_capacity_hz = parse_range(value, key);
  } else if (key == "mech_capacity_hz" || key == "FH") {
    spec.mech_capacity_hz = parse_range(value, key);
  } else if (key == "fronthaul_capacity_hz" || key == "BL") {
    spec.fronthaul_capacity_hz = parse_range(value, key);
  } else if (key == "midhaul_capacity_hz" || key == "BH") {
    spec.midhaul_capacity_hz = parse_range(value, key);
  } else if (key == "cloud_capacity_hz" || key == "FC") {
    spec.cloud_capacity_hz = parse_double(value, key);
  } else if (key == "uplink_bandwidth_hz") {
    spec.uplink_bandwidth_hz = parse_double(value, key);
  } else if (key == "fronthaul_se_bits_per_hz") {
    spec.fronthaul_se = parse_double(value, key);
  } else if (key == "midhaul_se_bits_per_hz") {
    spec.midhaul_se = parse_double(value, key);
  } else if (key == "data_bits") {
    spec.data_bits = parse_range(value, key);
  } else if (key == "cycles_per_bit") {
    spec.cycles_per_bit = parse_range(value, key);
  } else if (key == "ru_spacing_m") {
    spec.ru_spacing_m = parse_double(value, key);
  } else if (key == "num_antennas") {
    spec.radio.num_antennas = static_cast<Index>(parse_double(value, key));
  } else if (key == "tx_power_w") {
    spec.radio.tx_power_w = parse_double(value, key);
  } else if (key == "noise_density_w_per_hz") {
    spec.radio.noise_density_w_per_hz = parse_double(value, key);
  } else if (key == "pathloss_exponent") {
    spec.radio.pathloss_exponent = parse_double(value, key);
  } else if (key == "reference_loss_db") {
    spec.radio.reference_loss_db = parse_double(value, key);
  } else {
    throw UsageError("unknown --set key '" + key + "'");
  }
}

struct SweepArg {
  SweepParam param;
  double start, stop;
  int steps;
};

SweepArg parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("--sweep expects name=start:stop:steps");
  const auto param = parse_sweep_param(text.substr(0, eq));
  if (!param) throw UsageError("unknown sweep parameter '" + text.substr(0, eq) + "' (FL, FH, BL, BH, K)");
  const std::string_view rest = std::string_view(text).substr(eq + 1);
  const auto c1 = rest.find(':');
  const auto c2 = rest.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw UsageError("--sweep expects name=start:stop:steps");
  }
  const double steps = parse_double(rest.substr(c2 + 1), "--sweep steps");
  if (steps != std::floor(steps)) throw UsageError("--sweep steps must be an integer");
  return {*param, parse_double(rest.substr(0, c1), "--sweep start"),
          parse_double(rest.substr(c1 + 1, c2 - c1 - 1), "--sweep stop"), static_cast<int>(steps)};
}

std::vector<Scheme> parse_schemes(const std::string& text) {
  if (text == "all") return {kAllSchemes.begin(), kAllSchemes.end()};
  if (auto s = parse_scheme(text)) return {*s};
  throw UsageError("unknown scheme '" + text + "' (fog, cloud, cloud-du, cloud-ru, all)");
}

// Writes to --out when given, stdout otherwise.
template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  writer(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task offloading planner for three-tier fog-computing C-RAN networks"};

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string scheme_text;
  std::string sweep_text;
  int realizations = 1;
  std::optional<Index> users;
  std::string out_path;
  bool oracle_check = false;
  SolverConfig config;
  Index dus = 4;
  Index rus = 10;
  std::vector<std::string> overrides;
  std::string write_scenario_path;
  unsigned threads = 1;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;

  auto* scenario_opt = app.add_option("--scenario", scenario_path, "Scenario file to solve")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for scenario generation (base seed for sweeps)");
  scenario_opt->excludes(seed_opt);
  app.add_option("--scheme", scheme_text, "fog | cloud | cloud-du | cloud-ru | all");
  auto* sweep_opt = app.add_option("--sweep", sweep_text, "Sweep NAME=start:stop:steps, NAME in FL, FH, BL, BH, K");
  app.add_option("--realizations", realizations, "Random realizations per sweep point")->check(CLI::PositiveNumber);
  app.add_option("--users", users, "Number of users K per generated scenario");
  app.add_option("--out", out_path, "Write CSV/report here instead of stdout");
  auto* oracle_opt = app.add_flag("--oracle-check", oracle_check, "Compare the solver against exhaustive search");
  oracle_opt->excludes(sweep_opt);
  oracle_opt->excludes(scenario_opt);
  app.add_option("--epsilon", config.epsilon, "Convergence threshold")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", config.max_iters, "Dual iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--dus", dus, "DUs per generated scenario")->check(CLI::PositiveNumber);
  app.add_option("--rus", rus, "RUs per generated scenario")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "Generator override key=value or key=lo:hi (repeatable)");
  app.add_option("--write-scenario", write_scenario_path, "Save the generated scenario to this file");
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--enumeration-cap", enumeration_cap, "Largest decision space the oracle enumerates");

  CLI11_PARSE(app, argc, argv);

  try {
    ScenarioSpec spec;
    spec.num_dus = dus;
    spec.num_rus = rus;
    for (const auto& o : overrides) apply_override(spec, o);
    if (users) spec.num_users = *users;
    const bool generating = scenario_path.empty();

    if (!sweep_text.empty()) {
      const SweepArg arg = parse_sweep(sweep_text);
      if (!users && arg.param != SweepParam::Users) throw UsageError("--users is required for sweeps");
      SweepSpec sweep{arg.param, arg.start, arg.stop, arg.steps, spec, realizations, seed.value_or(1), config, threads};
      const auto rows = run_sweep(sweep, parse_schemes(scheme_text.empty() ? "all" : scheme_text));
      emit(out_path, [&](std::ostream& os) { write_sweep_csv(os, rows); });
      return 0;
    }

    if (oracle_check) {
      if (!users) throw UsageError("--users is required for --oracle-check");
      OracleCheckSpec check{spec, realizations, seed.value_or(1), config, enumeration_cap};
      const auto summary = compare_oracle(check, parse_schemes(scheme_text.empty() ? "all" : scheme_text));
      emit(out_path, [&](std::ostream& os) { write_gap_csv(os, summary); });
      return 0;
    }

    Scenario scenario;
    if (generating) {
      if (!users) throw UsageError("--users is required when generating a scenario");
      scenario = generate_scenario(spec, seed.value_or(1));
    } else {
      scenario = load_scenario(scenario_path);
    }
    if (!write_scenario_path.empty()) save_scenario(write_scenario_path, scenario);

    std::string report;
    for (Scheme scheme : parse_schemes(scheme_text.empty() ? "fog" : scheme_text)) {
      report += single_report(scenario, scheme, config);
    }
    emit(out_path, [&](std::ostream& os) { os << report; });
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "fogran: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fogran: " << e.what() << '\n';
    return 1;
  }
}
