#include "fogran/solver.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace fogran {
namespace {

constexpr int kL = 0;
constexpr int kH = 1;
constexpr int kC = 2;

// Per-task demands of each resource pool: cycles for compute, bits per Hz
// of link bandwidth for the fronthaul and midhaul.
struct Demands {
  Eigen::VectorXd compute;    // zeta D
  Eigen::VectorXd fronthaul;  // D / R^L_i
  Eigen::VectorXd midhaul;    // D / R^H_j

  Demands(const TaskSet& tasks, const Topology& t) {
    const Index K = tasks.size();
    compute = tasks.data_bits.cwiseProduct(tasks.cycles_per_bit);
    fronthaul.resize(K);
    midhaul.resize(K);
    for (Index k = 0; k < K; ++k) {
      fronthaul(k) = tasks.data_bits(k) / t.fronthaul_se(t.ru_of_user(k));
      midhaul(k) = tasks.data_bits(k) / t.midhaul_se(t.du_of_user(k));
    }
  }
};

double closed_form(double weight, double demand, double dual, const char* what) {
  if (weight == 0.0) return 0.0;
  if (!(dual > 0.0)) throw std::invalid_argument(std::string(what) + ": positive weight with non-positive dual");
  return weight * std::sqrt(demand / dual);
}

// x^2 * demand / resource with the perspective closure at x = 0.
double perspective(double weight, double demand, double resource) {
  if (weight == 0.0) return 0.0;
  if (!(resource > 0.0)) return std::numeric_limits<double>::infinity();
  return weight * weight * demand / resource;
}

void check_sizes(const TierWeights& x, const TaskSet& tasks, const Topology& topology) {
  if (x.rows() != tasks.size() || tasks.size() != topology.num_users) {
    throw std::invalid_argument("tier weights, tasks and topology disagree on the number of tasks");
  }
}

// Per-pool accumulated sqrt(demand) for an integer decision.
struct PoolRoots {
  Eigen::VectorXd mecl, mech, fronthaul, midhaul;
  double cloud = 0.0;

  PoolRoots(const Decision& d, const Demands& dem, const Topology& t)
      : mecl(Eigen::VectorXd::Zero(t.num_rus)),
        mech(Eigen::VectorXd::Zero(t.num_dus)),
        fronthaul(Eigen::VectorXd::Zero(t.num_rus)),
        midhaul(Eigen::VectorXd::Zero(t.num_dus)) {
    for (Index k = 0; k < d.size(); ++k) {
      const Index i = t.ru_of_user(k);
      const Index j = t.du_of_user(k);
      switch (d[k]) {
        case Tier::L: mecl(i) += std::sqrt(dem.compute(k)); break;
        case Tier::H:
          mech(j) += std::sqrt(dem.compute(k));
          fronthaul(i) += std::sqrt(dem.fronthaul(k));
          break;
        case Tier::C:
          cloud += std::sqrt(dem.compute(k));
          fronthaul(i) += std::sqrt(dem.fronthaul(k));
          midhaul(j) += std::sqrt(dem.midhaul(k));
          break;
      }
    }
  }

  double cost(const Topology& t) const {
    return (mecl.array().square() / t.mecl_capacity_hz.array()).sum() +
           (mech.array().square() / t.mech_capacity_hz.array()).sum() + cloud * cloud / t.cloud_capacity_hz +
           (fronthaul.array().square() / t.fronthaul_capacity_hz.array()).sum() +
           (midhaul.array().square() / t.midhaul_capacity_hz.array()).sum();
  }
};

double decision_cost(const Decision& d, const Demands& dem, const Topology& t) { return PoolRoots(d, dem, t).cost(t); }

// Which pools carry at least one task with positive weight.
struct PoolUse {
  std::vector<bool> mecl, mech, fronthaul, midhaul;
  bool cloud = false;

  PoolUse(const TierWeights& x, const Topology& t)
      : mecl(static_cast<std::size_t>(t.num_rus)),
        mech(static_cast<std::size_t>(t.num_dus)),
        fronthaul(static_cast<std::size_t>(t.num_rus)),
        midhaul(static_cast<std::size_t>(t.num_dus)) {
    for (Index k = 0; k < x.rows(); ++k) {
      const auto i = static_cast<std::size_t>(t.ru_of_user(k));
      const auto j = static_cast<std::size_t>(t.du_of_user(k));
      if (x(k, kL) > 0.0) mecl[i] = true;
      if (x(k, kH) > 0.0) mech[j] = fronthaul[i] = true;
      if (x(k, kC) > 0.0) cloud = fronthaul[i] = midhaul[j] = true;
    }
  }
};

double max_residual(const RelaxedPoint& p, const Topology& t) {
  const ConstraintSlack e = constraint_excess(p, t);
  const PoolUse use(p.x, t);
  double worst = 0.0;
  for (Index i = 0; i < t.num_rus; ++i) {
    if (use.mecl[static_cast<std::size_t>(i)]) worst = std::max(worst, std::abs(e.mecl(i)) / t.mecl_capacity_hz(i));
    if (use.fronthaul[static_cast<std::size_t>(i)]) {
      worst = std::max(worst, std::abs(e.fronthaul(i)) / t.fronthaul_capacity_hz(i));
    }
  }
  for (Index j = 0; j < t.num_dus; ++j) {
    if (use.mech[static_cast<std::size_t>(j)]) worst = std::max(worst, std::abs(e.mech(j)) / t.mech_capacity_hz(j));
    if (use.midhaul[static_cast<std::size_t>(j)]) {
      worst = std::max(worst, std::abs(e.midhaul(j)) / t.midhaul_capacity_hz(j));
    }
  }
  if (use.cloud) worst = std::max(worst, std::abs(e.cloud) / t.cloud_capacity_hz);
  return worst;
}

// Repeated single-task tier moves while the exact cost strictly improves.
Decision improve_locally(Decision d, const Demands& dem, const Topology& t, Scheme scheme) {
  double best = decision_cost(d, dem, t);
  for (bool improved = true; improved;) {
    improved = false;
    for (Index k = 0; k < d.size(); ++k) {
      const Tier current = d[k];
      Tier chosen = current;
      for (Tier tier : kAllTiers) {
        if (tier == current || !allows(scheme, tier)) continue;
        d.tier[static_cast<std::size_t>(k)] = tier;
        const double cost = decision_cost(d, dem, t);
        if (cost < best * (1.0 - 1e-12)) {
          best = cost;
          chosen = tier;
          improved = true;
        }
      }
      d.tier[static_cast<std::size_t>(k)] = chosen;
    }
  }
  return d;
}

}  // namespace

bool DualState::valid() const {
  auto ok = [](const Eigen::VectorXd& v) { return v.allFinite() && (v.array() >= 0.0).all(); };
  return ok(mu) && ok(lambda) && ok(nu) && ok(xi) && std::isfinite(rho) && rho >= 0.0;
}

TierWeights indicator(const Decision& decision) {
  TierWeights x = TierWeights::Zero(decision.size(), 3);
  for (Index k = 0; k < decision.size(); ++k) x(k, static_cast<Index>(decision[k])) = 1.0;
  return x;
}

PrimalSpeeds primal_speeds_from_duals(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                                      const Topology& topology) {
  check_sizes(x, tasks, topology);
  const Index K = tasks.size();
  PrimalSpeeds out{Eigen::VectorXd(K), Eigen::VectorXd(K), Eigen::VectorXd(K)};
  for (Index k = 0; k < K; ++k) {
    const double cycles = tasks.cycles(k);
    out.a(k) = closed_form(x(k, kL), cycles, duals.mu(topology.ru_of_user(k)), "mu");
    out.b(k) = closed_form(x(k, kH), cycles, duals.lambda(topology.du_of_user(k)), "lambda");
    out.c(k) = closed_form(x(k, kC), cycles, duals.rho, "rho");
  }
  return out;
}

PrimalBandwidth primal_bandwidth_from_duals(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                                            const Topology& topology) {
  check_sizes(x, tasks, topology);
  const Index K = tasks.size();
  PrimalBandwidth out{Eigen::VectorXd(K), Eigen::VectorXd(K), Eigen::VectorXd(K)};
  for (Index k = 0; k < K; ++k) {
    const Index i = topology.ru_of_user(k);
    const Index j = topology.du_of_user(k);
    const double D = tasks.data_bits(k);
    out.alpha(k) = closed_form(x(k, kH), D / topology.fronthaul_se(i), duals.nu(i), "nu");
    out.beta(k) = closed_form(x(k, kC), D / topology.midhaul_se(j), duals.xi(j), "xi");
    out.gamma(k) = closed_form(x(k, kC), D / topology.fronthaul_se(i), duals.nu(i), "nu");
  }
  return out;
}

RelaxedPoint recover_primal(const DualState& duals, const TierWeights& x, const TaskSet& tasks,
                            const Topology& topology) {
  auto speeds = primal_speeds_from_duals(duals, x, tasks, topology);
  auto bw = primal_bandwidth_from_duals(duals, x, tasks, topology);
  return {x, std::move(speeds.a), std::move(speeds.b), std::move(speeds.c),
          std::move(bw.alpha), std::move(bw.beta), std::move(bw.gamma)};
}

TierWeights marginal_costs(const DualState& duals, const TaskSet& tasks, const Topology& topology) {
  const Index K = tasks.size();
  TierWeights m(K, 3);
  for (Index k = 0; k < K; ++k) {
    const Index i = topology.ru_of_user(k);
    const Index j = topology.du_of_user(k);
    const double D = tasks.data_bits(k);
    const double cycles = tasks.cycles(k);
    const double fronthaul = 2.0 * std::sqrt(D * duals.nu(i) / topology.fronthaul_se(i));
    const double midhaul = 2.0 * std::sqrt(D * duals.xi(j) / topology.midhaul_se(j));
    m(k, kL) = 2.0 * std::sqrt(cycles * duals.mu(i));
    m(k, kH) = 2.0 * std::sqrt(cycles * duals.lambda(j)) + fronthaul;
    m(k, kC) = 2.0 * std::sqrt(cycles * duals.rho) + fronthaul + midhaul;
  }
  return m;
}

Decision extract_decision(const TierWeights& marginals, Scheme scheme, TieBreak tie_break) {
  static constexpr std::array<Tier, 3> kEdgeFirst = {Tier::L, Tier::H, Tier::C};
  static constexpr std::array<Tier, 3> kCloudFirst = {Tier::C, Tier::H, Tier::L};
  const auto& order = tie_break == TieBreak::EdgeFirst ? kEdgeFirst : kCloudFirst;

  Decision d{std::vector<Tier>(static_cast<std::size_t>(marginals.rows()), Tier::C)};
  for (Index k = 0; k < marginals.rows(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (Tier t : order) {
      if (!allows(scheme, t)) continue;
      const double v = marginals(k, static_cast<Index>(t));
      // Strictly smaller wins, so the earlier tier in `order` keeps ties.
      if (!found || v < best) {
        best = v;
        d.tier[static_cast<std::size_t>(k)] = t;
        found = true;
      }
    }
  }
  return d;
}

double relaxed_objective(const RelaxedPoint& p, const TaskSet& tasks, const Topology& topology) {
  const Demands dem(tasks, topology);
  double sum = 0.0;
  for (Index k = 0; k < tasks.size(); ++k) {
    sum += perspective(p.x(k, kL), dem.compute(k), p.a(k));
    sum += perspective(p.x(k, kH), dem.compute(k), p.b(k));
    sum += perspective(p.x(k, kC), dem.compute(k), p.c(k));
    sum += perspective(p.x(k, kH), dem.fronthaul(k), p.alpha(k));
    sum += perspective(p.x(k, kC), dem.fronthaul(k), p.gamma(k));
    sum += perspective(p.x(k, kC), dem.midhaul(k), p.beta(k));
  }
  return sum;
}

ConstraintSlack constraint_excess(const RelaxedPoint& p, const Topology& t) {
  ConstraintSlack e{-t.mecl_capacity_hz, -t.mech_capacity_hz, -t.cloud_capacity_hz, -t.fronthaul_capacity_hz,
                    -t.midhaul_capacity_hz};
  for (Index k = 0; k < p.x.rows(); ++k) {
    const Index i = t.ru_of_user(k);
    const Index j = t.du_of_user(k);
    e.mecl(i) += p.a(k);
    e.mech(j) += p.b(k);
    e.cloud += p.c(k);
    e.fronthaul(i) += p.alpha(k) + p.gamma(k);
    e.midhaul(j) += p.beta(k);
  }
  return e;
}

double lagrangian(const RelaxedPoint& p, const DualState& duals, const TaskSet& tasks, const Topology& topology) {
  const ConstraintSlack e = constraint_excess(p, topology);
  return relaxed_objective(p, tasks, topology) + duals.mu.dot(e.mecl) + duals.lambda.dot(e.mech) +
         duals.rho * e.cloud + duals.nu.dot(e.fronthaul) + duals.xi.dot(e.midhaul);
}

double dual_value(const DualState& duals, const TaskSet& tasks, const Topology& t, Scheme scheme) {
  const TierWeights m = marginal_costs(duals, tasks, t);
  double sum = 0.0;
  for (Index k = 0; k < m.rows(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (Tier tier : kAllTiers) {
      if (allows(scheme, tier)) best = std::min(best, m(k, static_cast<Index>(tier)));
    }
    sum += best;
  }
  return sum - duals.mu.dot(t.mecl_capacity_hz) - duals.lambda.dot(t.mech_capacity_hz) -
         duals.rho * t.cloud_capacity_hz - duals.nu.dot(t.fronthaul_capacity_hz) -
         duals.xi.dot(t.midhaul_capacity_hz);
}

DualState dual_update(const DualState& duals, const RelaxedPoint& primal, const Topology& t, int iter,
                      const StepRule& rule) {
  const ConstraintSlack e = constraint_excess(primal, t);
  const double s = rule.step(iter);
  auto move = [s](double dual, double excess, double capacity, double floor) {
    return std::max(floor, dual + s * dual * (excess / capacity));
  };

  DualState next = duals;
  for (Index i = 0; i < t.num_rus; ++i) {
    next.mu(i) = move(duals.mu(i), e.mecl(i), t.mecl_capacity_hz(i), rule.floor.mu(i));
    next.nu(i) = move(duals.nu(i), e.fronthaul(i), t.fronthaul_capacity_hz(i), rule.floor.nu(i));
  }
  for (Index j = 0; j < t.num_dus; ++j) {
    next.lambda(j) = move(duals.lambda(j), e.mech(j), t.mech_capacity_hz(j), rule.floor.lambda(j));
    next.xi(j) = move(duals.xi(j), e.midhaul(j), t.midhaul_capacity_hz(j), rule.floor.xi(j));
  }
  next.rho = move(duals.rho, e.cloud, t.cloud_capacity_hz, rule.floor.rho);
  return next;
}

DualState initial_duals(const TaskSet& tasks, const Topology& t, Scheme scheme) {
  const Demands dem(tasks, t);
  DualState d{Eigen::VectorXd::Zero(t.num_rus), Eigen::VectorXd::Zero(t.num_dus), 0.0,
              Eigen::VectorXd::Zero(t.num_rus), Eigen::VectorXd::Zero(t.num_dus)};
  for (Index k = 0; k < tasks.size(); ++k) {
    const Index i = t.ru_of_user(k);
    const Index j = t.du_of_user(k);
    d.mu(i) += std::sqrt(dem.compute(k));
    d.lambda(j) += std::sqrt(dem.compute(k));
    d.rho += std::sqrt(dem.compute(k));
    d.nu(i) += std::sqrt(dem.fronthaul(k));
    d.xi(j) += std::sqrt(dem.midhaul(k));
  }
  d.mu = (d.mu.array() / t.mecl_capacity_hz.array()).square().matrix();
  d.lambda = (d.lambda.array() / t.mech_capacity_hz.array()).square().matrix();
  d.rho = std::pow(d.rho / t.cloud_capacity_hz, 2);
  d.nu = (d.nu.array() / t.fronthaul_capacity_hz.array()).square().matrix();
  d.xi = (d.xi.array() / t.midhaul_capacity_hz.array()).square().matrix();
  if (!allows(scheme, Tier::L)) d.mu.setZero();
  if (!allows(scheme, Tier::H)) d.lambda.setZero();
  return d;
}

Allocation allocate_given_decision(const Decision& decision, const TaskSet& tasks, const Topology& t) {
  const Index K = tasks.size();
  if (decision.size() != K) throw std::invalid_argument("allocate_given_decision: decision size != task count");
  const Demands dem(tasks, t);
  Allocation out = Allocation::zeros(K);

  // Gathers the members of one pool, splits its capacity, scatters back.
  auto fill = [&](Eigen::VectorXd& target, const Eigen::VectorXd& demand, double capacity, auto&& member) {
    std::vector<Index> idx;
    for (Index k = 0; k < K; ++k) {
      if (member(k)) idx.push_back(k);
    }
    if (idx.empty()) return;
    const Eigen::VectorXd shares = sqrt_split(demand(idx), capacity);
    for (std::size_t n = 0; n < idx.size(); ++n) target(idx[n]) = shares(static_cast<Index>(n));
  };

  for (Index i = 0; i < t.num_rus; ++i) {
    fill(out.mecl_speed, dem.compute, t.mecl_capacity_hz(i),
         [&](Index k) { return t.ru_of_user(k) == i && decision[k] == Tier::L; });
    fill(out.fronthaul_bw, dem.fronthaul, t.fronthaul_capacity_hz(i),
         [&](Index k) { return t.ru_of_user(k) == i && decision[k] != Tier::L; });
  }
  for (Index j = 0; j < t.num_dus; ++j) {
    fill(out.mech_speed, dem.compute, t.mech_capacity_hz(j),
         [&](Index k) { return t.du_of_user(k) == j && decision[k] == Tier::H; });
    fill(out.midhaul_bw, dem.midhaul, t.midhaul_capacity_hz(j),
         [&](Index k) { return t.du_of_user(k) == j && decision[k] == Tier::C; });
  }
  fill(out.cloud_speed, dem.compute, t.cloud_capacity_hz, [&](Index k) { return decision[k] == Tier::C; });
  return out;
}

double decision_cost(const Decision& decision, const TaskSet& tasks, const Topology& topology) {
  if (decision.size() != tasks.size()) throw std::invalid_argument("decision_cost: decision size != task count");
  return decision_cost(decision, Demands(tasks, topology), topology);
}

SolveResult solve(const Topology& topology, const TaskSet& tasks, const Eigen::VectorXd& rates, Scheme scheme,
                  const SolverConfig& config) {
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("solver epsilon must be > 0");
  if (config.max_iters < 1) throw std::invalid_argument("solver max_iters must be >= 1");
  validate(topology, tasks);
  if (rates.size() != tasks.size()) throw std::invalid_argument("solve: one rate per task required");

  const Index K = tasks.size();
  SolveResult result;
  result.duals = initial_duals(tasks, topology, scheme);
  if (K == 0) {
    result.converged = true;
    result.allocation = Allocation::zeros(0);
    return result;
  }

  const Demands dem(tasks, topology);
  StepRule rule{config.initial_step, result.duals};
  rule.floor.mu *= config.dual_floor;
  rule.floor.lambda *= config.dual_floor;
  rule.floor.rho *= config.dual_floor;
  rule.floor.nu *= config.dual_floor;
  rule.floor.xi *= config.dual_floor;

  DualState duals = result.duals;
  Decision previous;
  Decision best;
  double best_cost = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  int stable = 0;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const Decision decision = extract_decision(marginal_costs(duals, tasks, topology), scheme, config.tie_break);
    const RelaxedPoint primal = recover_primal(duals, indicator(decision), tasks, topology);

    const double cost = decision_cost(decision, dem, topology);
    if (cost < best_cost) {
      best_cost = cost;
      best = decision;
    }
    const double residual = max_residual(primal, topology);
    const double g = dual_value(duals, tasks, topology, scheme);
    best_dual = std::max(best_dual, g);
    result.trace.push_back({g, cost, best_cost, residual});

    stable = (decision == previous) ? stable + 1 : 1;
    previous = decision;
    result.iterations = iter;
    // Either the primal iterates settled, or the dual bound certifies the
    // incumbent to within epsilon.
    if ((stable >= config.stability_window && residual < config.epsilon) ||
        best_cost - best_dual <= config.epsilon * best_cost) {
      result.converged = true;
      break;
    }
    duals = dual_update(duals, primal, topology, iter, rule);
  }

  result.duals = duals;
  result.decision = config.local_search ? improve_locally(best, dem, topology, scheme) : best;
  result.allocation = allocate_given_decision(result.decision, tasks, topology);
  result.total_delay_s = total_delay(topology, tasks, result.decision, result.allocation, rates);
  return result;
}

}  // namespace fogran
