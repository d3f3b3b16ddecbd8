#include "fogran/latency.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fogran {
namespace {

std::optional<double> present(const Eigen::VectorXd& v, Index k) {
  if (k < v.size() && v(k) != 0.0) return v(k);
  return std::nullopt;
}

double required(const std::optional<double>& value, const char* name, Index task) {
  if (!value || !(*value > 0.0) || !std::isfinite(*value)) throw AllocationError(name, task);
  return *value;
}

}  // namespace

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::MeclCompute: return "mecl_compute";
    case Constraint::MechCompute: return "mech_compute";
    case Constraint::CloudCompute: return "cloud_compute";
    case Constraint::Fronthaul: return "fronthaul";
    case Constraint::Midhaul: return "midhaul";
  }
  return "?";
}

std::string Violation::describe() const {
  std::string where;
  switch (constraint) {
    case Constraint::MeclCompute:
    case Constraint::Fronthaul: where = " at RU " + std::to_string(node); break;
    case Constraint::MechCompute:
    case Constraint::Midhaul: where = " at DU " + std::to_string(node); break;
    case Constraint::CloudCompute: where = " at cloud"; break;
  }
  return std::string(to_string(constraint)) + where + ": load " + std::to_string(load) + " exceeds capacity " +
         std::to_string(capacity);
}

AllocationError::AllocationError(std::string component, Index task)
    : std::invalid_argument("allocation missing " + component +
                            (task >= 0 ? " for task " + std::to_string(task) : std::string())),
      component_(std::move(component)) {}

Allocation Allocation::zeros(Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Zero(n)};
}

TaskResources TaskResources::of(const Allocation& a, Index k) {
  return {present(a.mecl_speed, k), present(a.mech_speed, k), present(a.cloud_speed, k),
          present(a.fronthaul_bw, k), present(a.midhaul_bw, k)};
}

DelayBreakdown task_delay(const Task& task, Tier tier, const TaskResources& r, double access_rate,
                          const LinkEfficiency& links, Index task_index) {
  const double D = task.data_bits;
  const double cycles = task.cycles_per_bit * D;

  DelayBreakdown out;
  out.access_s = (D == 0.0) ? 0.0 : (access_rate > 0.0 ? D / access_rate : std::numeric_limits<double>::infinity());
  switch (tier) {
    case Tier::L:
      out.compute_s = cycles / required(r.mecl_speed, "mecl_speed", task_index);
      break;
    case Tier::H:
      out.fronthaul_s = D / (required(r.fronthaul_bw, "fronthaul_bw", task_index) * links.fronthaul_se);
      out.compute_s = cycles / required(r.mech_speed, "mech_speed", task_index);
      break;
    case Tier::C:
      out.fronthaul_s = D / (required(r.fronthaul_bw, "fronthaul_bw", task_index) * links.fronthaul_se);
      out.midhaul_s = D / (required(r.midhaul_bw, "midhaul_bw", task_index) * links.midhaul_se);
      out.compute_s = cycles / required(r.cloud_speed, "cloud_speed", task_index);
      break;
  }
  out.total_s = out.access_s + out.fronthaul_s + out.midhaul_s + out.compute_s;
  return out;
}

std::vector<DelayBreakdown> delay_breakdown(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                                            const Allocation& allocation, const Eigen::VectorXd& rates) {
  const Index K = tasks.size();
  if (decision.size() != K || rates.size() != K) {
    throw std::invalid_argument("delay_breakdown: decision/rates size does not match task count");
  }
  std::vector<DelayBreakdown> out;
  out.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    const LinkEfficiency links{topology.fronthaul_se(topology.ru_of_user(k)),
                               topology.midhaul_se(topology.du_of_user(k))};
    out.push_back(task_delay({tasks.data_bits(k), tasks.cycles_per_bit(k)}, decision[k],
                             TaskResources::of(allocation, k), rates(k), links, k));
  }
  return out;
}

double total_delay(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                   const Allocation& allocation, const Eigen::VectorXd& rates) {
  double sum = 0.0;
  for (const auto& b : delay_breakdown(topology, tasks, decision, allocation, rates)) sum += b.total_s;
  return sum;
}

std::vector<Violation> check_feasibility(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                                         const Allocation& a, double rel_tol) {
  const Index K = tasks.size();
  if (decision.size() != K) throw std::invalid_argument("check_feasibility: decision size != task count");

  Eigen::VectorXd mecl = Eigen::VectorXd::Zero(topology.num_rus);
  Eigen::VectorXd fronthaul = Eigen::VectorXd::Zero(topology.num_rus);
  Eigen::VectorXd mech = Eigen::VectorXd::Zero(topology.num_dus);
  Eigen::VectorXd midhaul = Eigen::VectorXd::Zero(topology.num_dus);
  double cloud = 0.0;

  auto value = [K](const Eigen::VectorXd& v, Index k) { return v.size() == K ? v(k) : 0.0; };
  for (Index k = 0; k < K; ++k) {
    const Index i = topology.ru_of_user(k);
    const Index j = topology.du_of_user(k);
    switch (decision[k]) {
      case Tier::L: mecl(i) += value(a.mecl_speed, k); break;
      case Tier::H:
        mech(j) += value(a.mech_speed, k);
        fronthaul(i) += value(a.fronthaul_bw, k);
        break;
      case Tier::C:
        cloud += value(a.cloud_speed, k);
        fronthaul(i) += value(a.fronthaul_bw, k);
        midhaul(j) += value(a.midhaul_bw, k);
        break;
    }
  }

  std::vector<Violation> out;
  auto check = [&](Constraint c, Index node, double load, double cap) {
    if (load > cap * (1.0 + rel_tol)) out.push_back({c, node, load, cap});
  };
  for (Index i = 0; i < topology.num_rus; ++i) check(Constraint::MeclCompute, i, mecl(i), topology.mecl_capacity_hz(i));
  for (Index j = 0; j < topology.num_dus; ++j) check(Constraint::MechCompute, j, mech(j), topology.mech_capacity_hz(j));
  check(Constraint::CloudCompute, -1, cloud, topology.cloud_capacity_hz);
  for (Index i = 0; i < topology.num_rus; ++i) {
    check(Constraint::Fronthaul, i, fronthaul(i), topology.fronthaul_capacity_hz(i));
  }
  for (Index j = 0; j < topology.num_dus; ++j) check(Constraint::Midhaul, j, midhaul(j), topology.midhaul_capacity_hz(j));
  return out;
}

}  // namespace fogran
