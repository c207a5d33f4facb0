#include "qprad/experiment_synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "qprad/errors.hpp"
#include "qprad/inference.hpp"
#include "qprad/rng.hpp"

namespace qprad {

namespace {

constexpr double z95 = 1.959963984540054;

std::pair<double, double> wilson_interval(double successes, double trials, double z) {
  const double p = successes / trials;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * trials)) / (1 + z2 / trials);
  const double half = z * std::sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) /
                      (1 + z2 / trials);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<long>(n / 2)));
}

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 64;
  while (p < n) p *= 2;
  return p;
}

}  // namespace

void TraceConfig::validate() const {
  if (delays_s.size() == 0) throw ConfigError("trace delay grid is empty");
  if (!(delays_s >= 0).all()) throw ConfigError("trace delays must be >= 0");
  if (shots < 1) throw ConfigError("trace shots must be >= 1");
  if (repeats < 1) throw ConfigError("trace repeats must be >= 1");
  if (!(residual_excited >= 0 && residual_excited < 0.5)) {
    throw ConfigError("residual excited population must lie in [0, 0.5)");
  }
  if (!(gamma1_jitter_rel >= 0)) throw ConfigError("gamma1 jitter must be >= 0");
}

DecayTrace synth_decay_trace(double gamma1, const TraceConfig& cfg, std::uint64_t seed) {
  if (!(gamma1 > 0)) throw ContractViolation("synth_decay_trace: gamma1 must be > 0");
  cfg.validate();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  const Eigen::Index n = cfg.delays_s.size();
  DecayTrace out;
  out.delay_s = cfg.delays_s;
  out.population.resize(n);
  out.ci_lower.resize(n);
  out.ci_upper.resize(n);
  out.sigma.resize(n);
  const double res = cfg.residual_excited;
  const double pooled_trials = static_cast<double>(cfg.shots) * cfg.repeats;

  std::vector<double> fractions(static_cast<std::size_t>(cfg.repeats));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = cfg.delays_s[i];
    double pooled = 0;
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      int excited = 0;
      if (cfg.gamma1_jitter_rel == 0) {
        const double p = (1 - res) * std::exp(-gamma1 * t) + res;
        excited = std::binomial_distribution<int>(cfg.shots, p)(rng);
      } else {
        for (int shot = 0; shot < cfg.shots; ++shot) {
          double g;
          do {
            g = gamma1 * (1 + cfg.gamma1_jitter_rel * normal(rng));
          } while (!(g > 0));
          const double p = (1 - res) * std::exp(-g * t) + res;
          if (uniform(rng) < p) ++excited;
        }
      }
      pooled += excited;
      fractions[static_cast<std::size_t>(rep)] = static_cast<double>(excited) / cfg.shots;
    }
    out.population[i] = median_of(fractions);
    const auto [lo, hi] = wilson_interval(pooled, pooled_trials, z95);
    out.ci_lower[i] = lo;
    out.ci_upper[i] = hi;
    // Median of repeats is ~1.25x noisier than the pooled mean.
    out.sigma[i] = std::max(1.2533 * (hi - lo) / (2 * z95), 1.0 / pooled_trials);
  }
  return out;
}

ExposureNoise exposure_noise_from_string(const std::string& text) {
  if (text == "none") return ExposureNoise::none;
  if (text == "gamma") return ExposureNoise::gamma;
  if (text == "trace") return ExposureNoise::trace;
  throw ConfigError("unknown exposure noise mode '" + text + "' (expected none, gamma or trace)");
}

ExposureSeries synth_exposure_campaign(const SourceInventory& inventory,
                                       const EnvironmentModel& env,
                                       const QubitParams<double>& qubit, double a,
                                       const Eigen::ArrayXd& times_s, const ExposureConfig& cfg,
                                       std::uint64_t seed) {
  qubit.validate();
  if (!(a > 0)) throw ConfigError("power-law coefficient a must be > 0");
  if (!(cfg.gamma_noise_rel >= 0)) throw ConfigError("gamma noise must be >= 0");
  const Eigen::Index n = times_s.size();

  ExposureSeries out;
  out.t_s = times_s;
  out.p_src = source_power_density(inventory, times_s, cfg.material);
  out.p_tot = total_power_density(inventory, env, ShieldState::none, times_s, cfg.material);
  out.gamma1_true = gamma1_from_power(a, qubit, out.p_tot);
  out.gamma1_measured = out.gamma1_true;
  out.gamma1_stderr = Eigen::ArrayXd::Zero(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    const double g = out.gamma1_true[i];
    switch (cfg.noise) {
      case ExposureNoise::none:
        break;
      case ExposureNoise::gamma: {
        Rng rng = make_rng(seed, "exposure", index);
        std::normal_distribution<double> normal;
        out.gamma1_measured[i] = g * (1 + cfg.gamma_noise_rel * normal(rng));
        out.gamma1_stderr[i] = g * cfg.gamma_noise_rel;
        break;
      }
      case ExposureNoise::trace: {
        TraceConfig tc = cfg.trace;
        if (tc.delays_s.size() == 0) tc.delays_s = Eigen::ArrayXd::LinSpaced(20, 0.0, 4.0 / g);
        const DecayTrace trace = synth_decay_trace(g, tc, derive_seed(seed, "exposure", index));
        const FitResult fit = fit_exponential(trace.delay_s, trace.population, trace.sigma);
        out.gamma1_measured[i] = fit.converged ? fit.value("gamma1") : std::nan("");
        out.gamma1_stderr[i] = fit.converged ? fit.stderr_of("gamma1") : std::nan("");
        break;
      }
    }
  }
  return out;
}

void AbCampaignConfig::validate() const {
  if (groups.empty()) throw ConfigError("A/B campaign has no qubit groups");
  std::set<std::string> ids;
  for (const auto& g : groups) {
    if (g.qubits.empty()) throw ConfigError("A/B group has no qubits");
    if (g.cycles < 1) throw ConfigError("A/B cycles must be >= 1");
    if (g.n_per_position < 1) throw ConfigError("A/B measurements per position must be >= 1");
    if (!(g.sample_interval_s > 0)) throw ConfigError("A/B sample interval must be > 0");
    for (const auto& q : g.qubits) {
      q.params.validate();
      if (!ids.insert(q.id).second) throw ConfigError("duplicate qubit id '" + q.id + "'");
    }
  }
  scenario.validate();
  if (!(scenario.a > 0)) throw ConfigError("shield scenario coefficient a must be > 0");
  if (!(t1_noise_rel >= 0)) throw ConfigError("t1 noise must be >= 0");
  if (!(t1_floor_us > 0)) throw ConfigError("t1 floor must be > 0");
  DriftModel d = drift;
  d.dt_s = 1.0;
  d.validate();
}

std::vector<AbRecord> synth_ab_campaign(const AbCampaignConfig& cfg) {
  cfg.validate();

  struct Job {
    const AbGroup* group;
    const AbQubit* qubit;
  };
  std::vector<Job> jobs;
  for (const auto& g : cfg.groups) {
    for (const auto& q : g.qubits) jobs.push_back({&g, &q});
  }
  std::vector<std::vector<AbRecord>> per_qubit(jobs.size());

  auto run = [&](std::size_t j) {
    const AbGroup& g = *jobs[j].group;
    const AbQubit& q = *jobs[j].qubit;
    const int n_pos = g.n_per_position;
    const Eigen::Index samples = static_cast<Eigen::Index>(g.cycles) * 2 * n_pos;

    DriftModel drift = cfg.drift;
    drift.dt_s = g.sample_interval_s;
    const Eigen::ArrayXd offsets =
        synth_onef_drift(drift, next_pow2(samples), derive_seed(cfg.seed, "drift:" + q.id, 0));

    const double t1_up = 1e6 / gamma1_from_power(cfg.scenario.a, q.params, cfg.scenario.power(true));
    const double t1_down =
        1e6 / gamma1_from_power(cfg.scenario.a, q.params, cfg.scenario.power(false));

    auto& out = per_qubit[j];
    out.reserve(static_cast<std::size_t>(samples));
    for (int c = 0; c < g.cycles; ++c) {
      Rng rng = make_rng(cfg.seed, q.id, static_cast<std::uint64_t>(c) + 1);
      std::normal_distribution<double> normal;
      for (int half = 0; half < 2; ++half) {
        const ShieldState pos = half == 0 ? ShieldState::up : ShieldState::down;
        for (int k = 0; k < n_pos; ++k) {
          const Eigen::Index idx = (static_cast<Eigen::Index>(c) * 2 + half) * n_pos + k;
          double t1 = (pos == ShieldState::up ? t1_up : t1_down) + offsets[idx];
          t1 *= 1 + cfg.t1_noise_rel * normal(rng);
          AbRecord rec;
          rec.qubit_id = q.id;
          rec.omega_q = q.params.omega_q;
          rec.cycle = c;
          rec.position = pos;
          rec.repetition = k;
          rec.t1_us = std::max(t1, cfg.t1_floor_us);
          rec.timestamp_s = g.start_time_s + static_cast<double>(idx) * g.sample_interval_s;
          out.push_back(std::move(rec));
        }
      }
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.threads, 1)), 1, jobs.size());
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j = w; j < jobs.size(); j += workers) run(j);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<AbRecord> records;
  for (auto& v : per_qubit) {
    records.insert(records.end(), std::make_move_iterator(v.begin()),
                   std::make_move_iterator(v.end()));
  }
  return records;
}

InjectionSeries synth_injection_series(double x0, double r, double s,
                                       const QubitParams<double>& qubit,
                                       const Eigen::ArrayXd& delays_s, double noise_rel,
                                       std::uint64_t seed) {
  qubit.validate();
  if (!(x0 >= 0 && x0 <= 1)) throw ContractViolation("injection x0 must lie in [0, 1]");
  if (!(delays_s >= 0).all()) throw ContractViolation("injection delays must be >= 0");
  if (!(noise_rel >= 0)) throw ContractViolation("injection noise must be >= 0");
  const Eigen::Index n = delays_s.size();
  const Eigen::ArrayXd x = evolve_xqp_closed(QpState<double>{x0}, r, s, delays_s);
  const Eigen::ArrayXd truth = gamma_qp(x, qubit) + qubit.gamma_other;

  InjectionSeries out;
  out.t_s = delays_s;
  out.gamma1 = truth;
  out.sigma = noise_rel * truth;
  if (noise_rel > 0) {
    Rng rng = make_rng(seed, "injection", 0);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < n; ++i) out.gamma1[i] = truth[i] * (1 + noise_rel * normal(rng));
  }
  return out;
}

}  // namespace qprad
