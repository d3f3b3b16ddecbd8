#include "fogran/oracle.hpp"

#include <limits>
#include <string>
#include <vector>

#include "fogran/solver.hpp"

namespace fogran {

double objective_of(const Decision& decision, const Topology& topology, const TaskSet& tasks,
                    const Eigen::VectorXd& rates) {
  return total_delay(topology, tasks, decision, allocate_given_decision(decision, tasks, topology), rates);
}

OracleResult enumerate_optimal(const Topology& topology, const TaskSet& tasks, const Eigen::VectorXd& rates,
                               Scheme scheme, std::uint64_t cap) {
  validate(topology, tasks);
  std::vector<Tier> tiers;
  for (Tier t : kAllTiers) {
    if (allows(scheme, t)) tiers.push_back(t);
  }
  const Index K = tasks.size();

  std::uint64_t count = 1;
  for (Index k = 0; k < K; ++k) {
    if (count > cap / tiers.size()) {
      throw EnumerationTooLarge(std::to_string(tiers.size()) + "^" + std::to_string(K) +
                                " decisions exceed the enumeration cap of " + std::to_string(cap) +
                                "; use the dual-decomposition solver for instances this size");
    }
    count *= tiers.size();
  }

  // Odometer over tier indices; the last task turns fastest.
  std::vector<std::size_t> digit(static_cast<std::size_t>(K), 0);
  Decision current = Decision::uniform(K, tiers.front());
  OracleResult best;
  best.total_delay_s = std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 0; n < count; ++n) {
    const double value = objective_of(current, topology, tasks, rates);
    if (n == 0 || value < best.total_delay_s) {
      best.total_delay_s = value;
      best.decision = current;
    }
    for (Index k = K - 1; k >= 0; --k) {
      auto& d = digit[static_cast<std::size_t>(k)];
      d = (d + 1) % tiers.size();
      current.tier[static_cast<std::size_t>(k)] = tiers[d];
      if (d != 0) break;
    }
  }
  best.evaluated = count;
  best.allocation = allocate_given_decision(best.decision, tasks, topology);
  return best;
}

}  // namespace fogran
