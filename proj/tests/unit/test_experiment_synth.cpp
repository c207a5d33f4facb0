#include <doctest.h>

#include <cmath>

#include "qprad/experiment_synth.hpp"
#include "qprad/io/config.hpp"

using namespace qprad;

namespace {

QubitParams<double> q1(double gamma_other) {
  return {2 * constants::pi * 3.48e9, gamma_other, SuperconductorConstants<double>{}};
}

double variance(const Eigen::ArrayXd& v) { return (v - v.mean()).square().mean(); }

}  // namespace

TEST_SUITE("experiment_synth") {
  TEST_CASE("drift series scale with the spectral constant") {
    DriftModel zero{1.5, 0.0, 9.0};
    CHECK((synth_onef_drift(zero, 1024, 1) == 0).all());
    const DriftModel one{1.5, 2.0, 9.0}, two{1.5, 4.0, 9.0};
    const auto a = synth_onef_drift(one, 1024, 5);
    const auto b = synth_onef_drift(two, 1024, 5);
    CHECK(variance(b) == doctest::Approx(2 * variance(a)).epsilon(1e-10));
    CHECK_THROWS_AS(synth_onef_drift(one, 1000, 5), ContractViolation);
  }

  TEST_CASE("decay traces stay physical") {
    TraceConfig cfg;
    cfg.delays_s = Eigen::ArrayXd::LinSpaced(21, 0, 200e-6);
    cfg.shots = 200;
    cfg.repeats = 5;
    cfg.gamma1_jitter_rel = 0.5;
    const auto tr = synth_decay_trace(1 / 40e-6, cfg, 9);
    CHECK((tr.population >= 0).all());
    CHECK((tr.population <= 1).all());
    CHECK((tr.ci_lower <= tr.ci_upper).all());
  }

  TEST_CASE("rate jitter fattens the late-time tail") {
    TraceConfig base;
    base.delays_s = Eigen::ArrayXd::LinSpaced(9, 0, 160e-6);
    base.shots = 4000;
    base.repeats = 10;
    base.residual_excited = 0.0;
    TraceConfig jittered = base;
    jittered.gamma1_jitter_rel = 0.4;
    const auto plain = synth_decay_trace(1 / 40e-6, base, 3);
    const auto wide = synth_decay_trace(1 / 40e-6, jittered, 3);
    const Eigen::Index last = base.delays_s.size() - 1;
    CHECK(wide.population[last] > plain.population[last]);
    CHECK(plain.population[last] == doctest::Approx(std::exp(-4.0)).epsilon(0.25));
  }

  TEST_CASE("A/B synthesis is independent of the thread count") {
    const auto cfg = io::default_config();
    auto campaign = cfg.ab_campaign(42, 1);
    const auto serial = synth_ab_campaign(campaign);
    campaign.threads = 4;
    const auto parallel = synth_ab_campaign(campaign);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].t1_us == parallel[i].t1_us);
      CHECK(serial[i].qubit_id == parallel[i].qubit_id);
    }
    for (const auto& r : serial) CHECK(r.t1_us >= cfg.shield_ab.t1_floor_us);
  }

  TEST_CASE("injection series relaxes to the background rate") {
    const auto q = q1(1e6 / 35.0);
    Eigen::ArrayXd t(3);
    t << 0.0, 1e-3, 1e4;
    const auto s = synth_injection_series(5e-6, 2e8, 0.0, q, t, 0.0, 1);
    CHECK(s.gamma1[2] == doctest::Approx(q.gamma_other).epsilon(1e-5));
    CHECK(s.gamma1[0] > s.gamma1[1]);
    CHECK((s.sigma == 0).all());
  }

  TEST_CASE("exposure without sources is flat") {
    const auto cfg = io::default_config();
    const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(50, 0, 400 * 3600.0);
    ExposureConfig ec;
    ec.noise = ExposureNoise::none;
    const auto s = synth_exposure_campaign(SourceInventory{}, cfg.environment, cfg.qubit("Q1").params, cfg.a, t, ec, 1);
    CHECK((s.p_src == 0).all());
    CHECK((s.gamma1_true == s.gamma1_true[0]).all());
    CHECK((s.gamma1_measured == s.gamma1_true).all());
  }

  TEST_CASE("exposure follows the source decay") {
    const auto cfg = io::default_config();
    const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(201, 0, 400 * 3600.0);
    ExposureConfig ec;
    ec.noise = ExposureNoise::none;
    const auto s = synth_exposure_campaign(cfg.inventory, cfg.environment, cfg.qubit("Q1").params, cfg.a, t, ec, 1);
    CHECK(1e6 / s.gamma1_true[0] == doctest::Approx(5.7).epsilon(0.05));
    CHECK(1e6 / s.gamma1_true[200] == doctest::Approx(35.0).epsilon(0.1));
    for (Eigen::Index i = 1; i < t.size(); ++i) CHECK(s.gamma1_true[i] <= s.gamma1_true[i - 1]);
  }
}
