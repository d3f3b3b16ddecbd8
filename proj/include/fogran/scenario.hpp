#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogran {

using Index = Eigen::Index;

/// Three-tier C-RAN tree: one CU with cloud compute, DUs with MEC-H servers,
/// RUs with MEC-L servers, and the users each RU serves.
///
/// Per-RU arrays have length num_rus, per-DU arrays length num_dus. All
/// quantities are SI: Hz for bandwidths, cycles/s for compute capacities,
/// bits/s/Hz for spectrum efficiencies.
struct Topology {
  Index num_dus = 0;
  Index num_rus = 0;
  Index num_users = 0;

  std::vector<Index> ru_to_du;
  std::vector<Index> user_to_ru;

  Eigen::VectorXd uplink_bandwidth_hz;    // per RU
  Eigen::VectorXd fronthaul_capacity_hz;  // per RU
  Eigen::VectorXd midhaul_capacity_hz;    // per DU
  Eigen::VectorXd fronthaul_se;           // per RU
  Eigen::VectorXd midhaul_se;             // per DU
  Eigen::VectorXd mecl_capacity_hz;       // per RU
  Eigen::VectorXd mech_capacity_hz;       // per DU
  double cloud_capacity_hz = 0.0;

  Index du_of_user(Index k) const { return ru_to_du[static_cast<std::size_t>(user_to_ru[static_cast<std::size_t>(k)])]; }
  Index ru_of_user(Index k) const { return user_to_ru[static_cast<std::size_t>(k)]; }

  std::vector<Index> users_of_ru(Index i) const;
  std::vector<Index> users_of_du(Index j) const;

  friend bool operator==(const Topology&, const Topology&);
};

/// One task per user: D_k bits to offload, zeta_k CPU cycles per bit.
struct TaskSet {
  Eigen::VectorXd data_bits;
  Eigen::VectorXd cycles_per_bit;

  Index size() const { return data_bits.size(); }
  double cycles(Index k) const { return data_bits(k) * cycles_per_bit(k); }

  friend bool operator==(const TaskSet&, const TaskSet&);
};

/// Planar positions in metres, used only by the channel generator.
struct Geometry {
  Eigen::Matrix2Xd ru_positions_m;
  Eigen::Matrix2Xd user_positions_m;

  friend bool operator==(const Geometry&, const Geometry&);
};

struct RadioParams {
  Index num_antennas = 10;
  double tx_power_w = 3.1622776601683795;  // 35 dBm
  double noise_density_w_per_hz = 3.9810717055349565e-21;  // -174 dBm/Hz
  double pathloss_exponent = 4.0;
  double reference_loss_db = 38.5;  // free-space loss at 1 m, 2 GHz carrier

  bool operator==(const RadioParams&) const = default;
};

struct Scenario {
  Topology topology;
  TaskSet tasks;
  Geometry geometry;
  RadioParams radio;
  std::uint64_t channel_seed = 0;

  bool operator==(const Scenario&) const = default;
};

/// Closed interval for uniform draws; lo == hi gives a constant.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  static Range fixed(double v) { return {v, v}; }
  bool operator==(const Range&) const = default;
};

/// Distribution parameters for generate_scenario. Defaults: 4 DUs, 10 RUs,
/// 10 antennas, 10 MHz uplink, 5000 GHz cloud, 3 bits/s/Hz links, tasks of
/// 5-30 Mbit at 0.1-10 cycles/bit.
struct ScenarioSpec {
  Index num_dus = 4;
  Index num_rus = 10;
  Index num_users = 20;

  double ru_spacing_m = 500.0;

  double uplink_bandwidth_hz = 10e6;
  Range fronthaul_capacity_hz = Range::fixed(300e6);
  Range midhaul_capacity_hz = Range::fixed(500e6);
  double fronthaul_se = 3.0;
  double midhaul_se = 3.0;
  Range mecl_capacity_hz = Range::fixed(2e9);
  Range mech_capacity_hz = Range::fixed(25e9);
  double cloud_capacity_hz = 5e12;

  Range data_bits = {5e6, 30e6};
  Range cycles_per_bit = {0.1, 10.0};

  RadioParams radio;
};

/// Raised for malformed scenarios; field() names the offending key.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Throws ScenarioError naming the first violated invariant.
void validate(const Topology& topology);
void validate(const Topology& topology, const TaskSet& tasks);
void validate(const Scenario& scenario);

/// Draws a scenario. RUs sit on a square grid, users are placed uniformly in a
/// disc of radius spacing/2 around a uniformly chosen RU and then attached to
/// their nearest RU. The same (spec, seed) always yields the same scenario,
/// and the number of random draws does not depend on whether a range is
/// degenerate, so sweeping one parameter keeps every other draw aligned.
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Key/value text format with one key per line, arrays space-separated.
/// Doubles are written in shortest round-trip form so load(save(x)) == x.
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

std::string format_scenario(const Scenario& scenario);
Scenario parse_scenario(const std::string& text);

}  // namespace fogran
