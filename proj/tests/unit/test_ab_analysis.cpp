#include <doctest.h>

#include <cmath>

#include "qprad/ab_analysis.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/io/config.hpp"

using namespace qprad;

namespace {

constexpr double omega_q1 = 2 * constants::pi * 3.48e9;

std::vector<AbRecord> two_blocks(double t1_up, double t1_down, int n, double omega = omega_q1) {
  std::vector<AbRecord> out;
  for (int k = 0; k < n; ++k) out.push_back({"Q1", omega, 0, ShieldState::up, k, t1_up, 9.0 * k});
  for (int k = 0; k < n; ++k) out.push_back({"Q1", omega, 0, ShieldState::down, k, t1_down, 9.0 * (n + k)});
  return out;
}

double sd(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_SUITE("ab_analysis") {
  TEST_CASE("pairing of explicit records") {
    AnalysisConfig cfg;
    const auto same = pair_and_normalize(two_blocks(40, 40, 10), cfg);
    REQUIRE(same.pairs.size() == 10);
    for (double d : same.deltas()) CHECK(d == 0.0);

    const auto r = pair_and_normalize(two_blocks(40, 39.9, 10), cfg);
    for (double d : r.deltas()) CHECK(d == doctest::Approx(1e6 / 39.9 - 1e6 / 40).epsilon(1e-12));
    CHECK(r.deltas()[0] == doctest::Approx(62.7).epsilon(1e-3));

    const auto swapped = pair_and_normalize(two_blocks(39.9, 40, 10), cfg);
    for (std::size_t i = 0; i < r.pairs.size(); ++i) CHECK(swapped.pairs[i].delta == doctest::Approx(-r.pairs[i].delta));
  }

  TEST_CASE("frequency normalisation") {
    AnalysisConfig cfg;
    const auto r = pair_and_normalize(two_blocks(40, 39.9, 4, 4 * omega_q1), cfg);
    CHECK(r.pairs[0].delta == doctest::Approx((1e6 / 39.9 - 1e6 / 40) / 2).epsilon(1e-12));
  }

  TEST_CASE("cutoff and unmatched records") {
    AnalysisConfig cfg;
    auto recs = two_blocks(40, 39.9, 6);
    recs[0].t1_us = 10.0;
    recs.push_back({"Q1", omega_q1, 0, ShieldState::up, 6, 40, 0});
    const auto r = pair_and_normalize(recs, cfg);
    CHECK(r.removed_cutoff == 1);
    CHECK(r.unmatched == 1);
    CHECK(r.pairs.size() == 5);
  }

  TEST_CASE("asymmetry") {
    RatePair p{"Q1", 0, 0, 1000.0, 1010.0, 10.0};
    const auto a = asymmetry_stats({p});
    CHECK(a.values[0] == doctest::Approx(0.00995).epsilon(1e-3));
    CHECK(a.median == a.values[0]);
  }

  TEST_CASE("histogram conserves counts") {
    std::vector<double> v{1, 2, 2, 3, 10, -4};
    const auto h = make_histogram(v, 7);
    CHECK(h.counts.sum() == 6.0);
    CHECK(h.edges.size() == 8);
  }

  TEST_CASE("default campaign detects the shield effect and controls stay quiet") {
    const auto cfg = io::default_config();
    const auto recs = synth_ab_campaign(cfg.ab_campaign(cfg.seed, 2));
    auto acfg = cfg.analysis.analysis;
    const auto real = analyze_ab(recs, acfg);
    CHECK(real.wilcoxon.p_value < 0.05);
    CHECK(real.median.median > 0);

    int quiet = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
      acfg.mode = PairingMode::shuffled;
      acfg.seed = s;
      quiet += analyze_ab(recs, acfg).wilcoxon.p_value > 0.2;
    }
    CHECK(quiet >= 7);

    acfg.mode = PairingMode::real;
    const auto grid = robustness_map(recs, cfg.analysis.robustness_cutoffs_us, cfg.analysis.robustness_sigmas, acfg);
    int valid = 0, significant = 0;
    for (const auto& c : grid) {
      valid += c.valid;
      significant += c.valid && c.p_value < 0.05;
    }
    REQUIRE(valid > 0);
    CHECK(significant >= 0.8 * valid);
  }

  TEST_CASE("equal efficiencies without drift give no effect") {
    auto cfg = io::default_config();
    auto campaign = cfg.ab_campaign(7, 2);
    campaign.scenario.eta_up = campaign.scenario.eta_down = 0.3;
    campaign.drift.s_const = 0;
    const auto recs = synth_ab_campaign(campaign);
    auto acfg = cfg.analysis.analysis;
    const auto rep = analyze_ab(recs, acfg);
    CHECK(rep.wilcoxon.p_value > 0.01);
    CHECK(rep.median.lower <= 0.0);
    CHECK(rep.median.upper >= 0.0);
  }

  TEST_CASE("drift inflates the spread of paired differences") {
    const auto cfg = io::default_config();
    auto campaign = cfg.ab_campaign(11, 2);
    const auto with_drift = pair_and_normalize(synth_ab_campaign(campaign), cfg.analysis.analysis).deltas();
    campaign.drift.s_const = 0;
    const auto without = pair_and_normalize(synth_ab_campaign(campaign), cfg.analysis.analysis).deltas();
    CHECK(sd(without) < sd(with_drift));
  }

  TEST_CASE("median estimator bias across seeds") {
    const auto cfg = io::default_config();
    const auto& q1 = cfg.qubit(cfg.analysis.reference_qubit).params;
    auto campaign = cfg.ab_campaign(0, 2);
    QubitParams<double> ref = q1;
    const double expected = delta_gamma_shield(campaign.scenario, ref);
    double sum = 0;
    const int n = 60;
    for (int s = 1; s <= n; ++s) {
      campaign.seed = static_cast<std::uint64_t>(s);
      sum += analyze_ab(synth_ab_campaign(campaign), cfg.analysis.analysis).median.median;
    }
    CHECK(std::abs(sum / n - expected) < 0.05 * expected);
  }

  TEST_CASE("tuned scenario reproduces the median asymmetry") {
    auto cfg = io::load_config(QPRAD_SOURCE_DIR "/configs/asymmetry_bound.json");
    const auto recs = synth_ab_campaign(cfg.ab_campaign(cfg.seed, 2));
    const auto rep = analyze_ab(recs, cfg.analysis.analysis);
    CHECK(rep.asymmetry.median == doctest::Approx(0.0028).epsilon(0.2));
  }
}
