#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fogran/scenario.hpp"
#include "fogran/scheme.hpp"

namespace fogran {

/// One tier per task; exactly-one-place is structural.
struct Decision {
  std::vector<Tier> tier;

  Index size() const { return static_cast<Index>(tier.size()); }
  Tier operator[](Index k) const { return tier[static_cast<std::size_t>(k)]; }
  bool operator==(const Decision&) const = default;

  static Decision uniform(Index num_tasks, Tier t) { return {std::vector<Tier>(static_cast<std::size_t>(num_tasks), t)}; }
};

/// Continuous resources per task. Entries are 0 for tasks whose tier does not
/// use that resource (an L task has no fronthaul share).
struct Allocation {
  Eigen::VectorXd mecl_speed;    // f^L, cycles/s
  Eigen::VectorXd mech_speed;    // f^H, cycles/s
  Eigen::VectorXd cloud_speed;   // f^C, cycles/s
  Eigen::VectorXd fronthaul_bw;  // B^L_k, Hz
  Eigen::VectorXd midhaul_bw;    // B^H_k, Hz

  static Allocation zeros(Index num_tasks);
};

/// Resources of a single task; unset means "not allocated".
struct TaskResources {
  std::optional<double> mecl_speed;
  std::optional<double> mech_speed;
  std::optional<double> cloud_speed;
  std::optional<double> fronthaul_bw;
  std::optional<double> midhaul_bw;

  static TaskResources of(const Allocation& a, Index k);
};

struct Task {
  double data_bits = 0.0;
  double cycles_per_bit = 0.0;
};

struct LinkEfficiency {
  double fronthaul_se = 0.0;  // R^L_i of the serving RU
  double midhaul_se = 0.0;    // R^H_j of the serving DU
};

/// Delay components of one task in seconds. Components off the chosen path
/// are zero and total_s is their sum.
struct DelayBreakdown {
  double access_s = 0.0;
  double fronthaul_s = 0.0;
  double midhaul_s = 0.0;
  double compute_s = 0.0;
  double total_s = 0.0;
};

/// Raised when an allocation lacks a resource the chosen tier needs.
class AllocationError : public std::invalid_argument {
 public:
  AllocationError(std::string component, Index task);
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

/// L: D/R + zeta D/f^L
/// H: D/R + D/(B^L R^L) + zeta D/f^H
/// C: D/R + D/(B^L R^L) + D/(B^H R^H) + zeta D/f^C
DelayBreakdown task_delay(const Task& task, Tier tier, const TaskResources& resources, double access_rate,
                          const LinkEfficiency& links, Index task_index = -1);

std::vector<DelayBreakdown> delay_breakdown(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                                            const Allocation& allocation, const Eigen::VectorXd& rates);

/// Sum of task_delay totals over all tasks.
double total_delay(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                   const Allocation& allocation, const Eigen::VectorXd& rates);

enum class Constraint : std::uint8_t {
  MeclCompute,   // per RU
  MechCompute,   // per DU
  CloudCompute,
  Fronthaul,     // per RU
  Midhaul,       // per DU
};

std::string_view to_string(Constraint c);

struct Violation {
  Constraint constraint;
  Index node = -1;  // RU or DU index; -1 for the cloud
  double load = 0.0;
  double capacity = 0.0;

  std::string describe() const;
};

inline constexpr double kFeasibilityRelTol = 1e-9;

/// Per-pool capacity constraints; each sum runs only over tasks on the tier that
/// consumes the resource. A pool passes when load <= capacity * (1 + rel_tol).
std::vector<Violation> check_feasibility(const Topology& topology, const TaskSet& tasks, const Decision& decision,
                                         const Allocation& allocation, double rel_tol = kFeasibilityRelTol);

}  // namespace fogran
