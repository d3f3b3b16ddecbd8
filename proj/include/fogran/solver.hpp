#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "fogran/latency.hpp"
#include "fogran/scenario.hpp"
#include "fogran/scheme.hpp"

namespace fogran {

/// Lagrange multipliers of the relaxed problem's capacity constraints.
struct DualState {
  Eigen::VectorXd mu;      // per RU, MEC-L compute
  Eigen::VectorXd lambda;  // per DU, MEC-H compute
  double rho = 0.0;        // cloud compute
  Eigen::VectorXd nu;      // per RU, fronthaul bandwidth
  Eigen::VectorXd xi;      // per DU, midhaul bandwidth

  bool valid() const;
};

/// Per-task tier weights, columns ordered L, H, C. Rows sum to one.
using TierWeights = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// A point of the relaxed problem in substituted variables: a = x^L f^L,
/// b = x^H f^H, c = x^C f^C, alpha = x^H B^L, beta = x^C B^H, gamma = x^C B^L.
struct RelaxedPoint {
  TierWeights x;
  Eigen::VectorXd a, b, c;
  Eigen::VectorXd alpha, beta, gamma;
};

struct PrimalSpeeds {
  Eigen::VectorXd a, b, c;
};

struct PrimalBandwidth {
  Eigen::VectorXd alpha, beta, gamma;
};

/// Order used when two tiers have identical marginal cost.
enum class TieBreak : std::uint8_t {
  EdgeFirst,   // L before H before C
  CloudFirst,  // C before H before L
};

struct SolverConfig {
  double epsilon = 1e-4;       // relative constraint residual for convergence
  int max_iters = 2000;
  int stability_window = 20;   // consecutive iterations with an unchanged decision
  double initial_step = 0.5;   // s0 in s_t = s0 / sqrt(t)
  double dual_floor = 1e-12;   // relative to each dual's initial value
  TieBreak tie_break = TieBreak::EdgeFirst;
  bool local_search = true;    // single-task tier moves on the final decision
};

/// Tier indicator matrix of an integer decision.
TierWeights indicator(const Decision& decision);

/// a = x^L sqrt(zeta D / mu_i), b = x^H sqrt(zeta D / lambda_j),
/// c = x^C sqrt(zeta D / rho). Zero wherever the weight is zero.
/// Throws if a positive weight meets a non-positive dual.
PrimalSpeeds primal_speeds_from_duals(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                                      const Topology& topology);

/// alpha = x^H sqrt(D / (R^L_i nu_i)), beta = x^C sqrt(D / (R^H_j xi_j)),
/// gamma = x^C sqrt(D / (R^L_i nu_i)).
PrimalBandwidth primal_bandwidth_from_duals(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                                            const Topology& topology);

RelaxedPoint recover_primal(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                            const Topology& topology);

/// Per-unit Lagrangian cost of each tier with resources at their dual optimum:
///   L = 2 sqrt(zeta D mu_i)
///   H = 2 sqrt(zeta D lambda_j) + 2 sqrt(D nu_i / R^L_i)
///   C = 2 sqrt(zeta D rho) + 2 sqrt(D nu_i / R^L_i) + 2 sqrt(D xi_j / R^H_j)
TierWeights marginal_costs(const DualState& duals, const TaskSet& tasks, const Topology& topology);

/// Winner-take-all over the tiers the scheme allows; ties follow `tie_break`.
Decision extract_decision(const TierWeights& marginals, Scheme scheme, TieBreak tie_break = TieBreak::EdgeFirst);

/// Relaxed objective: sum of x^2 * demand / resource over every term, with
/// the perspective closure 0 at x = 0. Access delay is not included.
double relaxed_objective(const RelaxedPoint& point, const TaskSet& tasks, const Topology& topology);

/// Pool loads of the substituted variables minus capacities.
struct ConstraintSlack {
  Eigen::VectorXd mecl;       // sum a - F^L_i
  Eigen::VectorXd mech;       // sum b - F^H_j
  double cloud = 0.0;         // sum c - F^C
  Eigen::VectorXd fronthaul;  // sum (alpha + gamma) - B^L_i
  Eigen::VectorXd midhaul;    // sum beta - B^H_j
};

ConstraintSlack constraint_excess(const RelaxedPoint& point, const Topology& topology);

/// L(point, duals) = objective + sum duals * excess.
double lagrangian(const RelaxedPoint& point, const DualState& duals, const TaskSet& tasks, const Topology& topology);

/// Dual function g(duals) = sum_k min over allowed tiers of the marginal cost
/// minus sum duals * capacity. A lower bound on the relaxed optimum.
double dual_value(const DualState& duals, const TaskSet& tasks, const Topology& topology, Scheme scheme);

/// Diminishing-step projected subgradient update. Each multiplier moves by
///   s_t * scale * (load - capacity) / capacity,  s_t = s0 / sqrt(t),
/// with scale the multiplier's current value, and is then clamped to its floor.
struct StepRule {
  double initial_step = 0.5;
  DualState floor;

  double step(int iter) const { return initial_step / std::sqrt(static_cast<double>(std::max(iter, 1))); }
};

DualState dual_update(const DualState& duals, const RelaxedPoint& primal, const Topology& topology, int iter,
                      const StepRule& rule);

/// Multipliers that would make every pool tight if all its tasks used it:
/// (sum sqrt(demand) / capacity)^2. Tiers the scheme forbids start at 0.
DualState initial_duals(const TaskSet& tasks, const Topology& topology, Scheme scheme);

/// Optimal continuous resources for a fixed decision. Every pool is split in
/// proportion to sqrt(demand) and filled to capacity; empty pools stay unused.
Allocation allocate_given_decision(const Decision& decision, const TaskSet& tasks, const Topology& topology);

/// Sum of pool costs (sum sqrt(demand))^2 / capacity for a fixed decision:
/// the total of fronthaul, midhaul and compute delays under the optimal split.
double decision_cost(const Decision& decision, const TaskSet& tasks, const Topology& topology);

/// Shares of `capacity` proportional to sqrt(demand).
template <typename Derived>
Eigen::VectorXd sqrt_split(const Eigen::MatrixBase<Derived>& demand, double capacity) {
  const Eigen::VectorXd root = demand.derived().array().sqrt().matrix();
  const double total = root.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Zero(demand.size());
  return (capacity / total) * root;
}

struct IterationRecord {
  double dual_value = 0.0;       // g at this iteration's multipliers
  double iterate_objective = 0.0;  // relaxed objective of this iteration's integer decision
  double best_objective = 0.0;   // lowest feasible relaxed objective so far
  double max_residual = 0.0;     // largest |relative excess| over non-empty pools
};

struct SolveResult {
  Decision decision;
  Allocation allocation;
  DualState duals;
  int iterations = 0;
  bool converged = false;
  double total_delay_s = 0.0;
  std::vector<IterationRecord> trace;
};

/// Dual decomposition on the relaxed problem. Each iteration extracts an
/// integer decision from the current multipliers, recovers the closed-form
/// primal, and takes a subgradient step. Stops once the decision has been
/// stable for `stability_window` iterations and every used pool is within
/// epsilon of tight, or once the best dual value is within epsilon
/// (relative) of the best decision's cost. The relaxed optimum is usually
/// fractional, so integer iterates often keep cycling; the best decision seen
/// (by exact cost) is then returned with converged = false. Either way it is
/// re-allocated with allocate_given_decision, so the result is feasible.
SolveResult solve(const Topology& topology, const TaskSet& tasks, const Eigen::VectorXd& rates, Scheme scheme,
                  const SolverConfig& config = {});

}  // namespace fogran
