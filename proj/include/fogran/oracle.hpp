#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

#include "fogran/latency.hpp"
#include "fogran/scenario.hpp"
#include "fogran/scheme.hpp"

namespace fogran {

inline constexpr std::uint64_t kDefaultEnumerationCap = 729;  // 3^6

class EnumerationTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  Decision decision;
  Allocation allocation;
  double total_delay_s = 0.0;
  std::uint64_t evaluated = 0;
};

/// Exact minimum of the total delay over every decision the scheme allows,
/// each evaluated with its optimal allocation. Decisions are visited in
/// lexicographic order (task 0 most significant, L < H < C) and only a
/// strictly lower delay replaces the incumbent, so ties resolve to the first.
/// Throws EnumerationTooLarge when |tiers|^K exceeds `cap`.
OracleResult enumerate_optimal(const Topology& topology, const TaskSet& tasks, const Eigen::VectorXd& rates,
                               Scheme scheme, std::uint64_t cap = kDefaultEnumerationCap);

/// Minimal total delay achievable under a fixed decision.
double objective_of(const Decision& decision, const Topology& topology, const TaskSet& tasks,
                    const Eigen::VectorXd& rates);

}  // namespace fogran
