#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "qprad/qp_dynamics.hpp"
#include "qprad/qubit_observables.hpp"

using namespace qprad;

TEST_SUITE("qp_dynamics") {
  TEST_CASE("steady state") {
    CHECK(steady_state_xqp(QpParams<double>{1e5, 0, 1e-3}).x == doctest::Approx(std::sqrt(1e-3 / 1e5)).epsilon(1e-14));
    CHECK(steady_state_xqp(QpParams<double>{1e5, 1e2, 0}).x == 0.0);
    const QpParams<double> p{1e5, 1e2, 1e-3};
    const double ref = oracle::bisect([&](double x) { return rate_equation_rhs(x, p); }, 0.0, 1.0);
    CHECK(std::abs(steady_state_xqp(p).x - ref) <= 1e-10 * ref);
    CHECK(steady_state_xqp(QpParams<double>{0, 10, 1e-3}).x == doctest::Approx(1e-4));
    CHECK_THROWS_AS(steady_state_xqp(QpParams<double>{0, 0, 1}), ContractViolation);
    CHECK_THROWS_AS(steady_state_xqp(QpParams<double>{-1, 0, 1}), ContractViolation);
  }

  TEST_CASE("steady state scales as sqrt(g) without trapping") {
    const double x1 = steady_state_xqp(QpParams<double>{2e8, 0, 1e-8}).x;
    const double x2 = steady_state_xqp(QpParams<double>{2e8, 0, 2e-8}).x;
    CHECK(x2 / x1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("closed form limits") {
    const QpState<double> x0{5e-6};
    CHECK(evolve_xqp_closed(x0, 2e8, 100.0, 0.0).x == x0.x);
    for (double t : {1e-6, 1e-4, 1e-3}) {
      const double tiny_s = evolve_xqp_closed(x0, 2e8, 1e-9, t).x;
      const double no_s = evolve_xqp_closed(x0, 2e8, 0.0, t).x;
      CHECK(std::abs(tiny_s - no_s) <= 1e-8 * no_s);
    }
    CHECK(evolve_xqp_closed(x0, 0.0, 1e3, 1e-3).x == doctest::Approx(5e-6 * std::exp(-1.0)));
    CHECK_THROWS_AS(evolve_xqp_closed(x0, 1.0, 1.0, -1.0), ContractViolation);
  }

  TEST_CASE("closed form agrees with a long double integrator") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
      const double x0 = std::pow(10.0, -7 + 2 * u(rng));
      const double r = std::pow(10.0, 6 + 3 * u(rng));
      const double s = trial % 3 == 0 ? 0.0 : std::pow(10.0, 1 + 3 * u(rng));
      const double t = 5.0 / (s + r * x0);
      const double ref = oracle::integrate_rate_equation(x0, r, s, [](double) { return 0.0; }, t, 20000);
      CHECK(evolve_xqp_closed(QpState<double>{x0}, r, s, t).x == doctest::Approx(ref).epsilon(1e-9));
    }
  }

  TEST_CASE("numeric integrator matches the closed form for g = 0") {
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(51, 0.0, 1e-3);
    const auto num = evolve_xqp_numeric(QpState<double>{5e-6}, 2e8, 300.0, [](double) { return 0.0; }, grid);
    const auto closed = evolve_xqp_closed(QpState<double>{5e-6}, 2e8, 300.0, grid);
    CHECK(((num - closed).abs() <= 1e-9 * closed.abs().maxCoeff()).all());
  }

  TEST_CASE("steady state is a fixed point of the integrator") {
    const QpParams<double> p{2e8, 50.0, 1e-8};
    const double xs = steady_state_xqp(p).x;
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(11, 0.0, 10.0);
    const auto traj = evolve_xqp_numeric(QpState<double>{xs}, p.r, p.s, [&](double) { return p.g; }, grid);
    CHECK(((traj - xs).abs() <= 1e-9 * xs).all());
  }

  TEST_CASE("approach to steady state is monotone") {
    const QpParams<double> p{2e8, 50.0, 1e-8};
    const double xs = steady_state_xqp(p).x;
    Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(200, 0.0, 0.05);
    for (double start : {0.0, 0.2 * xs, 5 * xs}) {
      const auto traj = evolve_xqp_numeric(QpState<double>{start}, p.r, p.s, [&](double) { return p.g; }, grid);
      for (Eigen::Index i = 1; i < traj.size(); ++i) {
        if (start < xs) {
          CHECK(traj[i] >= traj[i - 1]);
          CHECK(traj[i] <= xs * (1 + 1e-12));
        } else {
          CHECK(traj[i] <= traj[i - 1]);
          CHECK(traj[i] >= xs * (1 - 1e-12));
        }
      }
    }
  }

  TEST_CASE("time-dependent generation matches the oracle") {
    auto g = [](double t) { return 1e-8 * (1 + std::sin(2 * constants::pi * 50 * t)); };
    Eigen::ArrayXd grid(2);
    grid << 0.0, 0.05;
    const auto num = evolve_xqp_numeric(QpState<double>{1e-7}, 2e8, 30.0, g, grid);
    const double ref = oracle::integrate_rate_equation(1e-7, 2e8, 30.0, g, 0.05, 200000);
    CHECK(num[1] == doctest::Approx(ref).epsilon(1e-8));
  }

  TEST_CASE("thermal density") {
    const SuperconductorConstants<double> sc;
    CHECK(thermal_xqp(0.040, sc).x == doctest::Approx(7e-24).epsilon(0.1));
    CHECK(thermal_xqp(1e-3, sc).x == 0.0);
    const double x120 = thermal_xqp(0.120, sc).x;
    CHECK(std::abs(std::log10(x120 / 7e-9)) < 0.5);
    double prev = 0;
    for (double t = 0.01; t < 0.3; t += 0.01) {
      const double x = thermal_xqp(t, sc).x;
      CHECK(x > prev);
      prev = x;
    }
    CHECK_THROWS_AS(thermal_xqp(0.0, sc), ContractViolation);
  }

  TEST_CASE("generation from power reproduces the power law") {
    const SuperconductorConstants<double> sc;
    QubitParams<double> q{2 * constants::pi * 3.48e9, 0.0, sc};
    for (double p : {0.1, 10.0, 3.5e4}) {
      const double g = generation_from_power(p, 5.4e-3, sc, 2e8);
      const double x = steady_state_xqp(QpParams<double>{2e8, 0, g}).x;
      CHECK(gamma_qp(QpState<double>{x}, q) == doctest::Approx(gamma1_from_power(5.4e-3, q, p)).epsilon(1e-10));
    }
    const double g0 = generation_from_power(3.5e4, 5.4e-3, sc, 2e8);
    CHECK(steady_state_xqp(QpParams<double>{2e8, 0, g0}).x == doctest::Approx(7.3e-9).epsilon(0.03));
  }

  TEST_CASE("templated on scalar") {
    const auto xf = steady_state_xqp(QpParams<long double>{1e5L, 1e2L, 1e-3L});
    CHECK(static_cast<double>(xf.x) == doctest::Approx(steady_state_xqp(QpParams<double>{1e5, 1e2, 1e-3}).x));
  }
}
