// Acceptance checks. One PASS/FAIL line per criterion. Criteria listed with
// --known-red=ID[,ID...] still print FAIL but do not fail the run; a listed
// criterion that passes is an error so the list cannot go stale.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qprad/ab_analysis.hpp"
#include "qprad/constants.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/inference.hpp"
#include "qprad/io/config.hpp"
#include "qprad/qp_dynamics.hpp"
#include "qprad/qubit_observables.hpp"
#include "qprad/source_model.hpp"
#include "qprad/statistics.hpp"
#include "../oracles.hpp"

using namespace qprad;

namespace {

std::set<int> known_red;
int unexpected = 0;
int red = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  const bool known = known_red.count(id) != 0;
  std::printf("%s [%d] %s: %s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(),
              !pass && known ? " (known red)" : "");
  if (pass && known) std::printf("NOTE [%d] listed as known red but passes\n", id);
  std::fflush(stdout);
  red += !pass;
  unexpected += pass == known;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

QubitParams<double> qubit_ghz(double ghz, double gamma_other = 0.0) {
  return {2 * constants::pi * ghz * 1e9, gamma_other, {}};
}

void gamma1_limits() {
  const auto q1 = qubit_ghz(3.48), q2 = qubit_ghz(4.6);
  const double g1 = gamma1_from_power(5.4e-3, q1, 0.10);
  const double g2 = gamma1_from_power(5.4e-3, q2, 0.10);
  const double t1 = 1e6 / g1, t2 = 1e6 / g2;
  const bool ok1 = within_rel(g1, 1e6 / 3950.0, 0.02);
  const bool ok2 = within_rel(g2, 1e6 / 3130.0, 0.02);
  report(1, "Gamma1 limits at P = 0.10", ok1 && ok2,
         fmt("Q1 1/%.0f us (target 1/3950, %s), Q2 1/%.0f us (target 1/3130, %s), tol 2%%", t1,
             ok1 ? "ok" : "out", t2, ok2 ? "ok" : "out"));
}

void qp_density() {
  const auto q1 = qubit_ghz(3.48);
  const double x = xqp_from_gamma(gamma1_from_power(5.4e-3, q1, 0.10), q1).x;
  const double xt = thermal_xqp(0.040, SuperconductorConstants<double>{}).x;
  const bool ok = within_rel(x, 7e-9, 0.10) && within_rel(xt, 7e-24, 0.10);
  report(2, "Quasiparticle density", ok,
         fmt("x_qp(Q1 limit) = %.3g (target 7e-9), thermal(40 mK) = %.3g (target 7e-24), tol 10%%", x, xt));
}

void shield_prediction() {
  const auto q1 = qubit_ghz(3.48);
  const ShieldScenario<double> sc{5.4e-3, 0.0, 0.10, 0.461, 0.02};
  const double dg = delta_gamma_shield(sc, q1);
  const auto p_int = solve_internal_power(sc, q1, 1e3 / 22.7);
  const double ratio = p_int ? *p_int / sc.p_ext : NAN;
  const bool ok = within_rel(dg, 1e3 / 15.5, 0.05) && p_int && std::abs(ratio - 0.81) <= 0.05;
  report(3, "Shield prediction and inversion", ok,
         fmt("dGamma(P_int=0) = 1/%.2f ms (target 1/15.5, tol 5%%); P_int/P_ext = %.3f (target 0.81 +- 0.05)",
             1e3 / dg, ratio));
}

void pint_bound() {
  const double eff = pint_bound_from_asymmetry(0.0028, 0.461, 0.02, 0.10);
  const double net = internal_power_from_bound(eff, 1e6 / 200.0, 5.4e-3, 2 * constants::pi * 3.48e9);
  const bool ok = within_rel(eff, 7.9, 0.05) && within_rel(net, 1.6, 0.10);
  report(4, "P_int bound from asymmetry", ok,
         fmt("effective %.3f (target 7.9, tol 5%%); after Gamma_other term %.3f (target 1.6, tol 10%%)", eff, net));
}

void shield_efficiency() {
  EnvironmentComponent gammas{"gamma", {{"Al", 0.060}},
                              {{ShieldState::none, 0.0}, {ShieldState::up, 0.784}, {ShieldState::down, 0.0}}};
  EnvironmentComponent cosmics{"cosmic", {{"Al", 0.042}},
                               {{ShieldState::none, 0.0}, {ShieldState::up, 0.0}, {ShieldState::down, 0.0}}};
  const EnvironmentModel env({gammas, cosmics}, 0.0);
  const double eta = effective_shield_efficiency(env, ShieldState::up, "Al");
  report(5, "Weighted shield efficiency", std::abs(eta - 0.461) <= 0.02,
         fmt("eta_up = %.4f (target 0.461 +- 0.02)", eta));
}

void ode_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const int variant = i % 3;  // recombination only, trapping only, both
    const double r = variant == 1 ? 0.0 : std::pow(10.0, 6 + 3 * u(rng));
    const double s = variant == 0 ? 0.0 : std::pow(10.0, 1 + 3 * u(rng));
    const double x0 = std::pow(10.0, -8 + 4 * u(rng));
    const double rate = s + r * x0;
    const double t_end = (0.5 + 4.5 * u(rng)) / rate;
    const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(11, 0.0, t_end);
    const Eigen::ArrayXd numeric =
        evolve_xqp_numeric(QpState<double>{x0}, r, s, [](double) { return 0.0; }, grid);
    const Eigen::ArrayXd closed = evolve_xqp_closed(QpState<double>{x0}, r, s, grid);
    worst = std::max(worst, ((numeric - closed).abs() / closed.abs()).maxCoeff());
  }
  double worst_ss = 0;
  for (int i = 0; i < 100; ++i) {
    const QpParams<double> p{std::pow(10.0, 6 + 3 * u(rng)), i % 4 == 0 ? 0.0 : std::pow(10.0, 4 * u(rng)),
                             std::pow(10.0, -10 + 6 * u(rng))};
    const double x = steady_state_xqp(p).x;
    worst_ss = std::max(worst_ss, std::abs(rate_equation_rhs(x, p)) / p.g);
  }
  report(6, "Closed form vs numerical integration", worst < 1e-6 && worst_ss < 1e-12,
         fmt("max relative error %.2e (< 1e-6), steady-state residual %.2e (< 1e-12)", worst, worst_ss));
}

void wilcoxon_checks() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.3, 1.0);
  std::uniform_int_distribution<int> size(1, 12);
  double worst_exact = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> d(static_cast<std::size_t>(size(rng)));
    for (auto& v : d) v = normal(rng);
    const double p = wilcoxon_signed_rank(d, Alternative::greater).p_value;
    worst_exact = std::max(worst_exact, std::abs(p - oracle::wilcoxon_brute_force_p(d)));
  }
  double worst_approx = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> d(25);
    for (auto& v : d) v = normal(rng);
    const double exact = wilcoxon_signed_rank(d, Alternative::greater, 25).p_value;
    const double approx = wilcoxon_signed_rank_normal(d, Alternative::greater).p_value;
    worst_approx = std::max(worst_approx, std::abs(exact - approx));
  }
  report(7, "Wilcoxon exact and approximate", worst_exact < 1e-12 && worst_approx <= 0.01,
         fmt("max |exact - enumeration| %.1e over 100 instances n<=12; max |exact - normal| at n=25 %.4f (<= 0.01)",
             worst_exact, worst_approx));
}

void round_trips() {
  const io::ScenarioConfig cfg = io::default_config();
  const auto& q1 = cfg.qubit("Q1").params;
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(201, 0.0, 400.0) * constants::seconds_per_hour;

  ExposureConfig clean = cfg.exposure.synth;
  clean.noise = ExposureNoise::none;
  const ExposureSeries s0 = synth_exposure_campaign(cfg.inventory, cfg.environment, q1, cfg.a, t, clean, 1);
  const FitResult f0 = fit_power_law_model(s0.p_tot, s0.gamma1_measured, {}, q1.omega_q);
  const double ea = std::abs(f0.value("a") / cfg.a - 1);
  const double eo = std::abs(f0.value("gamma_other") / q1.gamma_other - 1);
  const bool clean_ok = f0.converged && ea < 1e-6 && eo < 1e-6;

  int cover_a = 0, cover_o = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const ExposureSeries s = synth_exposure_campaign(cfg.inventory, cfg.environment, q1, cfg.a, t,
                                                     cfg.exposure.synth, seed);
    const FitResult f = fit_power_law_model(s.p_tot, s.gamma1_measured, s.gamma1_stderr, q1.omega_q);
    if (!f.converged) continue;
    cover_a += std::abs(f.value("a") - cfg.a) <= 1.959964 * f.stderr_of("a");
    cover_o += std::abs(f.value("gamma_other") - q1.gamma_other) <= 1.959964 * f.stderr_of("gamma_other");
  }
  const bool cover_ok = cover_a >= 90 && cover_o >= 90;

  const auto& in = cfg.injection;
  QubitParams<double> qi = cfg.qubit(in.qubit).params;
  qi.gamma_other = in.gamma_other_per_us * 1e6;
  const Eigen::ArrayXd delays = Eigen::ArrayXd::LinSpaced(in.n_delays, 0.0, in.delay_max_ms * 1e-3);
  const InjectionSeries inj = synth_injection_series(in.x0, in.r_per_s, 0.0, qi, delays, in.noise_rel, cfg.seed);
  double s_over_r = NAN;
  for (const auto& f : fit_injection(inj.t_s, inj.gamma1, inj.sigma, qi)) {
    if (f.model == InjectionModel::full) s_over_r = f.fit.value("s") / f.fit.value("r");
  }
  const bool inj_ok = s_over_r <= 1e-3;

  report(8, "Round-trip inference", clean_ok && cover_ok && inj_ok,
         fmt("noiseless rel err a %.1e, Gamma_other %.1e (< 1e-6); 95%% CI coverage a %d/100, Gamma_other %d/100 "
             "(>= 90); injection s/r = %.2e (<= 1e-3)",
             ea, eo, cover_a, cover_o, s_over_r));
}

void dicke_rejection() {
  const io::ScenarioConfig cfg = io::default_config();
  const auto& sab = cfg.shield_ab;
  DriftModel drift{sab.drift_alpha, sab.drift_psd_us2_per_hz * std::pow(sab.drift_reference_hz, sab.drift_alpha),
                   9.0};
  const Eigen::ArrayXd series = synth_onef_drift(drift, 1 << 16, 5);
  const PowerLaw fitted = power_law_fit(psd_estimate(series, drift.dt_s, 8));
  const auto& lock = cfg.analysis.bands.at(0);
  const auto& seq = cfg.analysis.bands.at(1);
  const double p_lock = noise_power_in_band(fitted, lock.f_lo_hz, lock.f_hi_hz);
  const double p_seq = noise_power_in_band(fitted, seq.f_lo_hz, seq.f_hi_hz);
  const double ratio = p_seq / p_lock;
  const bool ratio_ok = ratio >= 14.7 / 1.5 && ratio <= 14.7 * 1.5;

  int detected = 0;
  AnalysisConfig acfg = cfg.analysis.analysis;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto records = synth_ab_campaign(cfg.ab_campaign(seed, 1));
    const AbReport rep = analyze_ab(records, acfg);
    detected += rep.median.median > 0;
  }
  report(9, "Drift rejection by lock-in pairing", ratio_ok && detected >= 95,
         fmt("synthesized drift alpha %.2f; band noise %.1f vs %.1f us^2, ratio %.1f (14.7 within x1.5); "
             "sign detected in %d/100 campaigns (>= 95)",
             fitted.alpha, p_lock, p_seq, ratio, detected));
}

void resonator_trend() {
  const double half_life_h = 12.7;
  const SourceInventory inv("2021-01-01T00:00:00Z",
                            {{Isotope("Cu-64", half_life_h * constants::seconds_per_hour, {{"Al", 5.86e-3}}),
                              162.0 * constants::bq_per_uci}});
  const SuperconductorConstants<double> sc{};
  const double r = 2e8;
  const ResonatorParams<double> res{2 * constants::pi * 6e9, 0.05};
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(101, 0.0, 150.0) * constants::seconds_per_hour;
  Eigen::ArrayXd shift(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double p = source_power_density(inv, t[i], "Al");
    const double g = generation_from_power(p, 5.4e-3, sc, r);
    const double x = steady_state_xqp(QpParams<double>{r, 0.0, g}).x;
    shift[i] = std::abs(resonator_frequency_shift(x, res));
  }
  const FitResult f = fit_halflife(t / constants::seconds_per_hour, shift);
  const double fitted = f.value("t_half");
  report(10, "Resonator shift half-life", f.converged && within_rel(fitted, 2 * half_life_h, 0.05),
         fmt("fitted %.2f h (target %.1f h, tol 5%%)", fitted, 2 * half_life_h));
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const std::string prefix = "--known-red=";
    if (arg.rfind(prefix, 0) != 0) {
      std::fprintf(stderr, "unknown argument %s\n", argv[i]);
      return 2;
    }
    std::stringstream list(arg.substr(prefix.size()));
    for (std::string id; std::getline(list, id, ',');) known_red.insert(std::stoi(id));
  }
  const std::vector<std::function<void()>> checks{gamma1_limits, qp_density,     shield_prediction, pint_bound,
                                                  shield_efficiency, ode_oracle, wilcoxon_checks, round_trips,
                                                  dicke_rejection, resonator_trend};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "criterion raised", false, e.what());
    }
  }
  std::printf("%d criterion(s) failing, %d unexpected\n", red, unexpected);
  return unexpected == 0 ? 0 : 1;
}
