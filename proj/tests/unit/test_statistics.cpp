#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "../oracles.hpp"
#include "qprad/errors.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/statistics.hpp"

using namespace qprad;

TEST_SUITE("statistics") {
  TEST_CASE("wilcoxon: all positive") {
    std::vector<double> d{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto w = wilcoxon_signed_rank(d);
    CHECK(w.exact);
    CHECK(w.p_value == doctest::Approx(1.0 / 1024).epsilon(1e-12));
    CHECK(w.w_plus == 55.0);
  }

  TEST_CASE("wilcoxon: exact branch matches enumeration") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.3, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> d;
      const int size = 5 + trial % 12;
      for (int i = 0; i < size; ++i) d.push_back(std::round(n(rng) * 4) / 4);  // ties and zeros
      bool all_zero = true;
      for (double v : d) all_zero = all_zero && v == 0;
      if (all_zero) continue;
      CHECK(wilcoxon_signed_rank(d).p_value == doctest::Approx(oracle::wilcoxon_brute_force_p(d)).epsilon(1e-9));
    }
  }

  TEST_CASE("wilcoxon: large sample normal approximation") {
    // Ranks 1..n, positive ranks picked greedily from the top so W+ = 2.5e7 exactly.
    const int n = 9846;
    std::vector<double> d(n);
    double remaining = 2.5e7;
    for (int rank = n; rank >= 1; --rank) {
      const bool positive = rank <= remaining;
      if (positive) remaining -= rank;
      d[static_cast<std::size_t>(rank - 1)] = positive ? rank : -rank;
    }
    REQUIRE(remaining == 0.0);
    const auto w = wilcoxon_signed_rank(d);
    CHECK_FALSE(w.exact);
    CHECK(w.w_plus == 2.5e7);
    CHECK(w.p_value > 0.001);
    CHECK(w.p_value < 0.01);
  }

  TEST_CASE("wilcoxon: invariant to monotone transforms") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.2, 1.0);
    std::vector<double> d, t;
    for (int i = 0; i < 200; ++i) {
      d.push_back(n(rng));
      t.push_back(std::copysign(std::pow(std::abs(d.back()), 3) * 7, d.back()));
    }
    CHECK(wilcoxon_signed_rank(d).p_value == doctest::Approx(wilcoxon_signed_rank(t).p_value).epsilon(1e-12));
    CHECK_THROWS_AS(wilcoxon_signed_rank({0.0, 0.0}), DataError);
  }

  TEST_CASE("wilcoxon: exact and normal branches agree near the limit") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.4, 1.0);
    std::vector<double> d;
    for (int i = 0; i < 25; ++i) d.push_back(n(rng));
    CHECK(wilcoxon_signed_rank(d).p_value == doctest::Approx(wilcoxon_signed_rank_normal(d).p_value).epsilon(0.1));
  }

  TEST_CASE("median interval coverage") {
    std::mt19937_64 rng(17);
    std::exponential_distribution<double> e(1.0);
    const double true_median = std::log(2.0);
    int covered = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> v(60);
      for (double& x : v) x = e(rng);
      const auto ci = median_with_ci(v);
      covered += ci.lower <= true_median && true_median <= ci.upper;
    }
    CHECK(covered >= 920);
    CHECK(covered <= 980);
  }

  TEST_CASE("median interval edge cases") {
    const auto same = median_with_ci(std::vector<double>(20, 4.0));
    CHECK(same.median == 4.0);
    CHECK(same.lower == 4.0);
    CHECK(same.upper == 4.0);
    std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5};
    std::vector<double> w;
    for (double x : v) w.push_back(2.5 * x - 7);
    const auto a = median_with_ci(v), b = median_with_ci(w);
    CHECK(b.median == doctest::Approx(2.5 * a.median - 7));
    CHECK(b.lower == doctest::Approx(2.5 * a.lower - 7));
    CHECK(b.upper == doctest::Approx(2.5 * a.upper - 7));
    CHECK(median_with_ci({1, 2, 3, 4, 5}).exact);
  }

  TEST_CASE("spectral estimation") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 1);
    Eigen::ArrayXd white(1 << 14);
    for (auto& x : white) x = n(rng);
    CHECK(std::abs(power_law_fit(psd_estimate(white, 1.0)).alpha) < 0.1);

    const DriftModel drift{1.5, 3.4e4 * std::pow(1.0 / 900, 1.5), 9.0};
    const auto series = synth_onef_drift(drift, 1 << 16, 4);
    CHECK(power_law_fit(psd_estimate(series, 9.0)).alpha == doctest::Approx(1.5).epsilon(0.1));

    Eigen::ArrayXd sine(4096);
    for (Eigen::Index i = 0; i < sine.size(); ++i) sine[i] = std::sin(2 * constants::pi * 0.125 * static_cast<double>(i));
    const auto psd = psd_estimate(sine, 1.0);
    Eigen::Index peak = 0;
    psd.density.maxCoeff(&peak);
    CHECK(psd.frequency_hz[peak] == doctest::Approx(0.125).epsilon(0.02));
  }

  TEST_CASE("band power") {
    const PowerLaw flat{0.0, 2.0};
    CHECK(noise_power_in_band(flat, 1.0, 3.0) == doctest::Approx(4.0));
    const PowerLaw p{1.5, 1.0}, p2{1.5, 2.0};
    CHECK(noise_power_in_band(p2, 1e-4, 1e-2) == doctest::Approx(2 * noise_power_in_band(p, 1e-4, 1e-2)));
    const PowerLaw pink{1.0, 1.0};
    CHECK(noise_power_in_band(pink, 1.0, std::exp(1.0)) == doctest::Approx(1.0));
  }

  TEST_CASE("non-uniform timestamps are rejected") {
    Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(256, 0, 255);
    t[100] += 0.5;
    CHECK_THROWS_AS(psd_estimate(Eigen::ArrayXd::Zero(256), t), DataError);
  }
}
