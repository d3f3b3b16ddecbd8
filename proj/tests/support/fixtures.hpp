#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "fogran/phy.hpp"
#include "fogran/scenario.hpp"

namespace fogran::testing {

// Uniform per-node values; callers tweak single entries afterwards.
inline Topology make_topology(std::vector<Index> ru_to_du, std::vector<Index> user_to_ru, double mecl = 2e9,
                              double mech = 25e9, double cloud = 5e12, double fronthaul = 300e6,
                              double midhaul = 500e6, double se = 3.0) {
  Topology t;
  t.num_rus = static_cast<Index>(ru_to_du.size());
  t.num_dus = 0;
  for (Index j : ru_to_du) t.num_dus = std::max(t.num_dus, j + 1);
  t.num_users = static_cast<Index>(user_to_ru.size());
  t.ru_to_du = std::move(ru_to_du);
  t.user_to_ru = std::move(user_to_ru);
  t.uplink_bandwidth_hz = Eigen::VectorXd::Constant(t.num_rus, 10e6);
  t.fronthaul_capacity_hz = Eigen::VectorXd::Constant(t.num_rus, fronthaul);
  t.fronthaul_se = Eigen::VectorXd::Constant(t.num_rus, se);
  t.mecl_capacity_hz = Eigen::VectorXd::Constant(t.num_rus, mecl);
  t.midhaul_capacity_hz = Eigen::VectorXd::Constant(t.num_dus, midhaul);
  t.midhaul_se = Eigen::VectorXd::Constant(t.num_dus, se);
  t.mech_capacity_hz = Eigen::VectorXd::Constant(t.num_dus, mech);
  t.cloud_capacity_hz = cloud;
  return t;
}

inline TaskSet make_tasks(std::vector<double> data_bits, std::vector<double> cycles_per_bit) {
  TaskSet tasks;
  tasks.data_bits = Eigen::Map<Eigen::VectorXd>(data_bits.data(), static_cast<Index>(data_bits.size()));
  tasks.cycles_per_bit = Eigen::Map<Eigen::VectorXd>(cycles_per_bit.data(), static_cast<Index>(cycles_per_bit.size()));
  return tasks;
}

struct Instance {
  Scenario scenario;
  Eigen::VectorXd rates;
};

// Generated scenario plus MMSE rates.
inline Instance make_instance(const ScenarioSpec& spec, std::uint64_t seed) {
  Instance inst{generate_scenario(spec, seed), {}};
  const auto& s = inst.scenario;
  const auto ch = phy::generate_channels<double>(s.topology, s.geometry, s.radio, s.channel_seed);
  inst.rates = phy::mmse_rates(s.topology, ch);
  return inst;
}

// Small instance family: 2 RUs, 1 or 2 DUs, 1 to 5 users.
inline ScenarioSpec small_spec(Index dus, Index users) {
  ScenarioSpec spec;
  spec.num_dus = dus;
  spec.num_rus = 2;
  spec.num_users = users;
  return spec;
}

}  // namespace fogran::testing
