#include <doctest.h>

#include <random>

#include "fogran/latency.hpp"
#include "fogran/oracle.hpp"
#include "fogran/solver.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fogran;
using fogran::testing::make_tasks;
using fogran::testing::make_topology;

namespace {

DualState uniform_duals(const Topology& t, double v) {
  return {Eigen::VectorXd::Constant(t.num_rus, v), Eigen::VectorXd::Constant(t.num_dus, v), v,
          Eigen::VectorXd::Constant(t.num_rus, v), Eigen::VectorXd::Constant(t.num_dus, v)};
}

TierWeights weights(std::initializer_list<std::array<double, 3>> rows) {
  TierWeights x(static_cast<Index>(rows.size()), 3);
  Index k = 0;
  for (const auto& r : rows) {
    x.row(k++) << r[0], r[1], r[2];
  }
  return x;
}

}  // namespace

TEST_CASE("closed-form speeds and bandwidths") {
  // zeta D = 4 with unit duals and unit spectrum efficiency
  const auto t = make_topology({0}, {0}, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  const auto duals = uniform_duals(t, 1.0);

  SUBCASE("a = 2 for x^L = 1") {
    const auto s = primal_speeds_from_duals(duals, weights({{1, 0, 0}}), make_tasks({4.0}, {1.0}), t);
    CHECK(s.a(0) == 2.0);
    CHECK(s.b(0) == 0.0);
    CHECK(s.c(0) == 0.0);
  }
  SUBCASE("alpha = 3 for D = 9 on H") {
    const auto b = primal_bandwidth_from_duals(duals, weights({{0, 1, 0}}), make_tasks({9.0}, {1.0}), t);
    CHECK(b.alpha(0) == 3.0);
    CHECK(b.beta(0) == 0.0);
    CHECK(b.gamma(0) == 0.0);
  }
  SUBCASE("x^C = 0 gives no cloud resources") {
    const auto p = recover_primal(duals, weights({{0.5, 0.5, 0}}), make_tasks({9.0}, {1.0}), t);
    CHECK(p.c(0) == 0.0);
    CHECK(p.beta(0) == 0.0);
    CHECK(p.gamma(0) == 0.0);
  }
  SUBCASE("positive weight needs a positive dual") {
    DualState d = duals;
    d.mu(0) = 0.0;
    CHECK_THROWS_AS(primal_speeds_from_duals(d, weights({{1, 0, 0}}), make_tasks({4.0}, {1.0}), t),
                    std::invalid_argument);
    CHECK_NOTHROW(primal_speeds_from_duals(d, weights({{0, 0, 1}}), make_tasks({4.0}, {1.0}), t));
  }
}

TEST_CASE("recovered primal is stationary for the Lagrangian") {
  // Unit-scale instance so central differences resolve each partial.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const auto t = make_topology({0, 1}, {0, 1}, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0);
  const auto tasks = make_tasks({3.0, 7.0}, {1.5, 0.7});
  for (int n = 0; n < 50; ++n) {
    const DualState duals{Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d(u(rng), u(rng)), u(rng),
                          Eigen::Vector2d(u(rng), u(rng)), Eigen::Vector2d(u(rng), u(rng))};
    TierWeights x(2, 3);
    for (Index k = 0; k < 2; ++k) {
      const Eigen::Vector3d w(u(rng), u(rng), u(rng));
      x.row(k) = (w / w.sum()).transpose();
    }
    const RelaxedPoint p = recover_primal(duals, x, tasks, t);
    struct Field {
      Eigen::VectorXd RelaxedPoint::*member;
      double dual;
    };
    for (Index k = 0; k < 2; ++k) {
      // user k sits on RU k and DU k
      const Field fields[] = {{&RelaxedPoint::a, duals.mu(k)},     {&RelaxedPoint::b, duals.lambda(k)},
                              {&RelaxedPoint::c, duals.rho},       {&RelaxedPoint::alpha, duals.nu(k)},
                              {&RelaxedPoint::beta, duals.xi(k)},  {&RelaxedPoint::gamma, duals.nu(k)}};
      for (const auto& f : fields) {
        const double v = (p.*f.member)(k);
        const double h = 1e-4 * v;
        RelaxedPoint up = p, down = p;
        (up.*f.member)(k) = v + h;
        (down.*f.member)(k) = v - h;
        const double grad = (lagrangian(up, duals, tasks, t) - lagrangian(down, duals, tasks, t)) / (2.0 * h);
        CHECK(std::abs(grad) <= 1e-6 * f.dual);
      }
    }
  }
}

TEST_CASE("marginal costs") {
  const auto t = make_topology({0}, {0}, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0);

  SUBCASE("L marginal is 4 for zeta D = 4, mu = 1") {
    const auto m = marginal_costs(uniform_duals(t, 1.0), make_tasks({4.0}, {1.0}), t);
    CHECK(m(0, 0) == 4.0);
    CHECK(m(0, 1) == 8.0);   // 2*2 + 2*2
    CHECK(m(0, 2) == 12.0);  // 2*2 + 2*2 + 2*2
  }

  SUBCASE("equal duals and efficiencies order C > H > L") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int n = 0; n < 100; ++n) {
      const auto m = marginal_costs(uniform_duals(t, u(rng)), make_tasks({u(rng)}, {u(rng)}), t);
      CHECK(m(0, 2) > m(0, 1));
      CHECK(m(0, 1) > m(0, 0));
    }
  }

  SUBCASE("cloud compute term vanishes as rho goes to zero") {
    DualState d = uniform_duals(t, 1.0);
    d.rho = 1e-300;
    const auto m = marginal_costs(d, make_tasks({4.0}, {1.0}), t);
    CHECK(m(0, 2) == doctest::Approx(8.0));
  }

  SUBCASE("marginal is the derivative of the resource-minimised Lagrangian in x") {
    const auto tasks = make_tasks({4.0}, {1.0});
    const auto duals = uniform_duals(t, 1.0);
    const auto m = marginal_costs(duals, tasks, t);
    for (Index tier = 0; tier < 3; ++tier) {
      auto phi = [&](double w) {
        TierWeights x = TierWeights::Zero(1, 3);
        x(0, tier) = w;
        RelaxedPoint p = recover_primal(duals, x, tasks, t);
        return lagrangian(p, duals, tasks, t);
      };
      const double h = 1e-5;
      CHECK((phi(0.5 + h) - phi(0.5 - h)) / (2.0 * h) == doctest::Approx(m(0, tier)).epsilon(1e-8));
    }
  }
}

TEST_CASE("decision extraction") {
  const TierWeights m = weights({{4, 5, 6}});
  CHECK(extract_decision(m, Scheme::Fog)[0] == Tier::L);
  CHECK(extract_decision(m, Scheme::CloudDU)[0] == Tier::H);
  CHECK(extract_decision(m, Scheme::CloudRU)[0] == Tier::L);
  CHECK(extract_decision(m, Scheme::Cloud)[0] == Tier::C);
  const TierWeights tie = weights({{4, 4, 6}, {6, 5, 5}, {3, 3, 3}});
  const Decision edge = extract_decision(tie, Scheme::Fog);
  CHECK(edge == Decision{{Tier::L, Tier::H, Tier::L}});
  const Decision cloud = extract_decision(tie, Scheme::Fog, TieBreak::CloudFirst);
  CHECK(cloud == Decision{{Tier::H, Tier::C, Tier::C}});
}

TEST_CASE("dual update direction") {
  const auto t = make_topology({0}, {0}, 5.0, 5.0, 5.0, 5.0, 5.0, 1.0);
  const auto duals = uniform_duals(t, 1.0);
  StepRule rule{0.5, uniform_duals(t, 1e-6)};
  RelaxedPoint p;
  p.x = weights({{1, 0, 0}});
  p.a = Eigen::VectorXd::Constant(1, 5.0);
  p.b = p.c = p.alpha = p.beta = p.gamma = Eigen::VectorXd::Zero(1);

  SUBCASE("tight pool keeps its multiplier") {
    CHECK(dual_update(duals, p, t, 1, rule).mu(0) == 1.0);
  }
  SUBCASE("overloaded pool raises its multiplier") {
    p.a(0) = 7.0;
    CHECK(dual_update(duals, p, t, 1, rule).mu(0) > 1.0);
  }
  SUBCASE("idle pools lower their multipliers down to the floor") {
    const auto next = dual_update(duals, p, t, 1, rule);
    CHECK(next.lambda(0) < 1.0);
    CHECK(next.rho < 1.0);
    DualState small = uniform_duals(t, 2e-6);
    const auto floored = dual_update(small, p, t, 1, {10.0, uniform_duals(t, 1e-6)});
    CHECK(floored.lambda(0) == 1e-6);
  }
  SUBCASE("steps shrink with the iteration count") {
    p.a(0) = 7.0;
    CHECK(dual_update(duals, p, t, 100, rule).mu(0) < dual_update(duals, p, t, 1, rule).mu(0));
  }
}

TEST_CASE("square-root split") {
  const Eigen::VectorXd demand = Eigen::Vector2d(4e9, 9e9);
  const Eigen::VectorXd shares = sqrt_split(demand, 5e9);
  CHECK(shares(0) == doctest::Approx(2e9));
  CHECK(shares(1) == doctest::Approx(3e9));
  CHECK(fogran::testing::pool_delay(demand, shares) == doctest::Approx(5.0));

  CHECK(sqrt_split(Eigen::VectorXd::Constant(1, 7.0), 3.0)(0) == 3.0);
  const Eigen::VectorXd equal = sqrt_split(Eigen::VectorXd::Constant(4, 2.0), 8.0);
  CHECK((equal.array() == 2.0).all());

  // pairwise search never beats the closed form
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int n = 0; n < 50; ++n) {
    const Index size = 2 + n % 3;
    Eigen::VectorXd d(size);
    for (Index k = 0; k < size; ++k) d(k) = 1e9 * u(rng);
    const double cap = 1e9 * u(rng);
    const double closed = fogran::testing::pool_delay(d, sqrt_split(d, cap));
    const double searched = fogran::testing::pool_delay(d, fogran::testing::pairwise_search_split(d, cap));
    CHECK(closed <= searched * (1.0 + 1e-12));
    CHECK(closed == doctest::Approx(searched).epsilon(1e-9));
  }
}

TEST_CASE("allocation for a fixed decision fills each used pool") {
  const auto t = make_topology({0, 0}, {0, 0, 1}, 5e9, 25e9, 5e12, 300e6, 500e6, 3.0);
  const auto tasks = make_tasks({4e9, 9e9, 1e6}, {1.0, 1.0, 2.0});
  const Decision d{{Tier::L, Tier::L, Tier::C}};
  const Allocation a = allocate_given_decision(d, tasks, t);
  CHECK(a.mecl_speed(0) == doctest::Approx(2e9));
  CHECK(a.mecl_speed(1) == doctest::Approx(3e9));
  CHECK(a.mecl_speed(2) == 0.0);
  CHECK(a.cloud_speed(2) == 5e12);
  CHECK(a.fronthaul_bw(2) == 300e6);
  CHECK(a.midhaul_bw(2) == 500e6);
  CHECK(a.mech_speed.isZero());
  CHECK(check_feasibility(t, tasks, d, a).empty());
  CHECK(decision_cost(d, tasks, t) ==
        doctest::Approx(5.0 + 2e6 / 5e12 + 1e6 / 3.0 / 300e6 + 1e6 / 3.0 / 500e6).epsilon(1e-12));
}

TEST_CASE("exact cost equals the relaxed objective of the integer point") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 5), 3);
  const auto& s = inst.scenario;
  for (int code = 0; code < 243; code += 7) {
    Decision d = Decision::uniform(5, Tier::L);
    for (int k = 0, c = code; k < 5; ++k, c /= 3) d.tier[static_cast<std::size_t>(k)] = kAllTiers[c % 3];
    const Allocation a = allocate_given_decision(d, s.tasks, s.topology);
    const double access = (s.tasks.data_bits.array() / inst.rates.array()).sum();
    CHECK(decision_cost(d, s.tasks, s.topology) ==
          doctest::Approx(total_delay(s.topology, s.tasks, d, a, inst.rates) - access).epsilon(1e-12));
  }
}

TEST_CASE("relaxed objective is convex along segments") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(1, 3), 6);
  const auto& s = inst.scenario;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto random_point = [&] {
    RelaxedPoint p;
    p.x = TierWeights(3, 3);
    for (Index k = 0; k < 3; ++k) {
      const Eigen::Vector3d w(u(rng), u(rng), u(rng));
      p.x.row(k) = (w / w.sum()).transpose();
    }
    p.a = 1e9 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.b = 1e10 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.c = 1e12 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.alpha = 1e8 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.beta = 1e8 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.gamma = 1e8 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    return p;
  };
  for (int n = 0; n < 200; ++n) {
    const RelaxedPoint p = random_point(), q = random_point();
    const double theta = u(rng);
    RelaxedPoint m;
    m.x = theta * p.x + (1 - theta) * q.x;
    m.a = theta * p.a + (1 - theta) * q.a;
    m.b = theta * p.b + (1 - theta) * q.b;
    m.c = theta * p.c + (1 - theta) * q.c;
    m.alpha = theta * p.alpha + (1 - theta) * q.alpha;
    m.beta = theta * p.beta + (1 - theta) * q.beta;
    m.gamma = theta * p.gamma + (1 - theta) * q.gamma;
    const double fp = relaxed_objective(p, s.tasks, s.topology);
    const double fq = relaxed_objective(q, s.tasks, s.topology);
    CHECK(relaxed_objective(m, s.tasks, s.topology) <= (theta * fp + (1 - theta) * fq) * (1.0 + 1e-12));
  }
  // perspective closure: zero weight costs nothing even with zero resource
  RelaxedPoint z = random_point();
  z.x.setZero();
  z.x.col(2).setOnes();
  z.a.setZero();
  z.b.setZero();
  z.alpha.setZero();
  CHECK(std::isfinite(relaxed_objective(z, s.tasks, s.topology)));
}

TEST_CASE("dual value never exceeds any decision's cost") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 4), seed);
    const auto& s = inst.scenario;
    for (Scheme scheme : kAllSchemes) {
      const double opt =
          enumerate_optimal(s.topology, s.tasks, inst.rates, scheme).total_delay_s -
          (s.tasks.data_bits.array() / inst.rates.array()).sum();
      DualState d = initial_duals(s.tasks, s.topology, Scheme::Fog);
      for (int n = 0; n < 20; ++n) {
        DualState r = d;
        r.mu *= u(rng);
        r.lambda *= u(rng);
        r.rho *= u(rng);
        r.nu *= u(rng);
        r.xi *= u(rng);
        CHECK(dual_value(r, s.tasks, s.topology, scheme) <= opt * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("initial duals zero out forbidden edge tiers") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 4), 1);
  const auto& s = inst.scenario;
  const DualState cloud = initial_duals(s.tasks, s.topology, Scheme::Cloud);
  CHECK(cloud.mu.isZero());
  CHECK(cloud.lambda.isZero());
  CHECK(cloud.rho > 0.0);
  CHECK(cloud.valid());
  const DualState fog = initial_duals(s.tasks, s.topology, Scheme::Fog);
  CHECK((fog.mu.array() >= 0.0).all());
  CHECK(fog.rho > 0.0);
}

TEST_CASE("cloud scheme sends everything to the cloud with a square-root split") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 6), 4);
  const auto& s = inst.scenario;
  const SolveResult r = solve(s.topology, s.tasks, inst.rates, Scheme::Cloud);
  CHECK(r.converged);
  CHECK(r.decision == Decision::uniform(6, Tier::C));
  const Eigen::VectorXd expected = sqrt_split(s.tasks.data_bits.cwiseProduct(s.tasks.cycles_per_bit),
                                              s.topology.cloud_capacity_hz);
  for (Index k = 0; k < 6; ++k) CHECK(r.allocation.cloud_speed(k) == doctest::Approx(expected(k)));
  CHECK(r.total_delay_s == doctest::Approx(objective_of(r.decision, s.topology, s.tasks, inst.rates)));
}

TEST_CASE("fixed-decision dual iterates become tight") {
  // With a single allowed tier the decision never changes, so the recovered
  // primal must approach the capacity of every used pool.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 5), seed);
    const auto& s = inst.scenario;
    SolverConfig cfg;
    cfg.max_iters = 500;
    cfg.epsilon = 1e-12;
    const SolveResult r = solve(s.topology, s.tasks, inst.rates, Scheme::Cloud, cfg);
    REQUIRE(!r.trace.empty());
    CHECK(r.trace.back().max_residual < 1e-3);
  }
}

TEST_CASE("solver output is always feasible and deterministic") {
  ScenarioSpec spec;
  spec.num_users = 15;
  spec.mecl_capacity_hz = {1e9, 5e9};
  spec.mech_capacity_hz = {10e9, 50e9};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = fogran::testing::make_instance(spec, seed);
    const auto& s = inst.scenario;
    for (Scheme scheme : kAllSchemes) {
      const SolveResult a = solve(s.topology, s.tasks, inst.rates, scheme);
      const auto violations = check_feasibility(s.topology, s.tasks, a.decision, a.allocation);
      CHECK(violations.empty());
      for (Index k = 0; k < s.tasks.size(); ++k) CHECK(allows(scheme, a.decision[k]));
      if (seed < 3) {
        const SolveResult b = solve(s.topology, s.tasks, inst.rates, scheme);
        CHECK(a.decision == b.decision);
        CHECK(a.total_delay_s == b.total_delay_s);
        CHECK(a.iterations == b.iterations);
      }
    }
  }
}

TEST_CASE("fog is never worse than the baselines") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(1 + seed % 2, 1 + seed % 5), seed);
    const auto& s = inst.scenario;
    const double fog = solve(s.topology, s.tasks, inst.rates, Scheme::Fog).total_delay_s;
    for (Scheme scheme : {Scheme::Cloud, Scheme::CloudDU, Scheme::CloudRU}) {
      CHECK(fog <= solve(s.topology, s.tasks, inst.rates, scheme).total_delay_s * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("iteration limit still returns a feasible plan") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(2, 5), 9);
  const auto& s = inst.scenario;
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.local_search = false;
  const SolveResult r = solve(s.topology, s.tasks, inst.rates, Scheme::Fog, cfg);
  CHECK(r.iterations == 1);
  CHECK(check_feasibility(s.topology, s.tasks, r.decision, r.allocation).empty());
  CHECK(std::isfinite(r.total_delay_s));
}

TEST_CASE("empty task set") {
  const auto t = make_topology({0}, {});
  const SolveResult r = solve(t, make_tasks({}, {}), Eigen::VectorXd(0), Scheme::Fog);
  CHECK(r.converged);
  CHECK(r.total_delay_s == 0.0);
  CHECK(r.decision.size() == 0);
}

TEST_CASE("bad configuration is rejected") {
  const auto inst = fogran::testing::make_instance(fogran::testing::small_spec(1, 2), 1);
  const auto& s = inst.scenario;
  SolverConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(solve(s.topology, s.tasks, inst.rates, Scheme::Fog, cfg), std::invalid_argument);
  CHECK_THROWS_AS(solve(s.topology, s.tasks, Eigen::VectorXd::Ones(1), Scheme::Fog), std::invalid_argument);
}
