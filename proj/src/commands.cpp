#include "qprad/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

#include "qprad/ab_analysis.hpp"
#include "qprad/constants.hpp"
#include "qprad/errors.hpp"
#include "qprad/experiment_synth.hpp"
#include "qprad/inference.hpp"
#include "qprad/io/table.hpp"
#include "qprad/rng.hpp"
#include "qprad/spectrum.hpp"

namespace qprad::cli {

namespace {

using nlohmann::json;
using io::format_double;
using io::Table;

constexpr double z95 = 1.959963984540054;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

io::OutputFile data_file(const std::string& stem, const Table& table, OutputFormat fmt) {
  if (fmt == OutputFormat::json) return {stem + ".json", io::to_json(table).dump(1) + "\n"};
  return {stem + ".csv", io::to_csv(table)};
}

io::OutputFile json_file(const std::string& name, const json& j) { return {name, j.dump(2) + "\n"}; }

json fit_to_json(const FitResult& fit) {
  json params = json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double v = fit.values[k];
    const double se = fit.stderr_[k];
    params[fit.names[i]] = {{"value", number_or_null(v)},
                            {"stderr", number_or_null(se)},
                            {"ci95", {number_or_null(v - z95 * se), number_or_null(v + z95 * se)}}};
  }
  return {{"parameters", params},
          {"rss", number_or_null(fit.rss)},
          {"n_points", fit.n_points},
          {"dof", fit.dof()},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"message", fit.message}};
}

double reference_epoch(const io::ScenarioConfig& cfg) {
  const std::string& ref = cfg.inventory.reference_time_utc();
  return ref.empty() ? 0.0 : io::parse_iso8601_utc(ref);
}

std::vector<std::string> utc_column(double epoch, const Eigen::ArrayXd& t_s) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(t_s.size()));
  for (double t : t_s) out.push_back(io::iso8601_utc(epoch + t));
  return out;
}

std::vector<AbRecord> records_from_table(const Table& t) {
  t.require_columns({"qubit_id", "omega_q_rad_per_s", "cycle", "position", "t1_us"});
  const auto ids = t.text("qubit_id");
  const Eigen::ArrayXd omega = t.numeric("omega_q_rad_per_s");
  const Eigen::ArrayXd cycle = t.numeric("cycle");
  const auto pos = t.text("position");
  const Eigen::ArrayXd t1 = t.numeric("t1_us");
  const bool has_rep = t.has_column("repetition");
  const bool has_ts = t.has_column("timestamp_s");
  const Eigen::ArrayXd rep = has_rep ? t.numeric("repetition") : Eigen::ArrayXd();
  const Eigen::ArrayXd ts = has_ts ? t.numeric("timestamp_s") : Eigen::ArrayXd();

  std::vector<AbRecord> out;
  out.reserve(t.rows());
  std::map<std::tuple<std::string, int, int>, int> counters;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const std::string line = t.source + ": line " + std::to_string(i + 2);
    AbRecord r;
    r.qubit_id = ids[i];
    r.omega_q = omega[k];
    r.cycle = static_cast<int>(cycle[k]);
    if (pos[i] == "up") {
      r.position = ShieldState::up;
    } else if (pos[i] == "down") {
      r.position = ShieldState::down;
    } else {
      throw DataError(line + ": position must be 'up' or 'down', got '" + pos[i] + "'");
    }
    r.t1_us = t1[k];
    if (!(r.t1_us > 0)) throw DataError(line + ": t1_us must be > 0");
    if (!(r.omega_q > 0)) throw DataError(line + ": omega_q_rad_per_s must be > 0");
    const auto key = std::make_tuple(r.qubit_id, r.cycle, static_cast<int>(r.position));
    r.repetition = has_rep ? static_cast<int>(rep[k]) : counters[key]++;
    r.timestamp_s = has_ts ? ts[k] : static_cast<double>(i);
    out.push_back(std::move(r));
  }
  return out;
}

// Simple line-plus-continuum toy shapes standing in for transport templates.
EnergyTemplate toy_template(const std::string& name, const std::vector<std::pair<double, double>>& lines,
                            double bin_kev, double max_kev, double total) {
  const auto n = static_cast<Eigen::Index>(std::round(max_kev / bin_kev));
  EnergyTemplate t;
  t.name = name;
  t.edges_kev = Eigen::ArrayXd::LinSpaced(n + 1, 0.0, bin_kev * static_cast<double>(n));
  t.counts = Eigen::ArrayXd::Zero(n);
  for (const auto& [e, intensity] : lines) {
    const auto peak = std::min<Eigen::Index>(static_cast<Eigen::Index>(e / bin_kev), n - 1);
    t.counts[peak] += 0.3 * intensity;
    const double edge = e * (1.0 - 1.0 / (1.0 + 2.0 * e / 511.0));
    const auto last = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(edge / bin_kev));
    for (Eigen::Index k = 0; k < last; ++k) t.counts[k] += 0.7 * intensity / static_cast<double>(last);
  }
  t.counts *= total / t.counts.sum();
  return t;
}

std::vector<EnergyTemplate> toy_templates(const io::SpectrumSettings& s) {
  return {toy_template("K-40", {{1460.8, 1.0}}, s.bin_kev, s.max_kev, s.counts_scale),
          toy_template("Th-232", {{238.6, 0.43}, {583.2, 0.30}, {911.2, 0.26}, {2614.5, 0.36}},
                       s.bin_kev, s.max_kev, s.counts_scale),
          toy_template("U-238", {{351.9, 0.36}, {609.3, 0.45}, {1120.3, 0.15}, {1764.5, 0.15}},
                       s.bin_kev, s.max_kev, s.counts_scale)};
}

Table template_table(const EnergyTemplate& t) {
  const Eigen::Index n = t.counts.size();
  Table out;
  out.add_column("e_lo_kev", Eigen::ArrayXd(t.edges_kev.head(n)));
  out.add_column("e_hi_kev", Eigen::ArrayXd(t.edges_kev.tail(n)));
  out.add_column("counts", t.counts);
  return out;
}

EnergyTemplate template_from_table(const Table& t, const std::string& name) {
  t.require_columns({"e_lo_kev", "e_hi_kev", "counts"});
  const Eigen::ArrayXd lo = t.numeric("e_lo_kev");
  const Eigen::ArrayXd hi = t.numeric("e_hi_kev");
  EnergyTemplate out;
  out.name = name;
  out.counts = t.numeric("counts");
  const Eigen::Index n = out.counts.size();
  if (n == 0) throw DataError(t.source + ": template has no rows");
  out.edges_kev.resize(n + 1);
  out.edges_kev.head(n) = lo;
  out.edges_kev[n] = hi[n - 1];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(hi[i] - lo[i + 1]) > 1e-9 * std::max(1.0, std::abs(hi[i]))) {
      throw DataError(t.source + ": line " + std::to_string(i + 2) + ": bins are not contiguous");
    }
  }
  out.validate();
  return out;
}

SpectrumModel toy_truth(const io::SpectrumSettings& s) {
  SpectrumModel m = s.initial;
  m.c0 += 1.0;
  m.c1 *= 1.005;
  m.var0 *= 1.2;
  m.weights = s.true_weights;
  return m;
}

}  // namespace

std::vector<std::string> verbs() {
  return {"simulate-exposure", "fit-exposure",  "simulate-shield-ab", "analyze-ab",
          "inject-qp",         "fit-spectrum",  "simulate-spectrum"};
}

CommandResult simulate_exposure(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt) {
  const auto& ex = cfg.exposure;
  const auto& qubit = cfg.qubit(ex.qubit).params;
  const auto n = static_cast<Eigen::Index>(std::floor((ex.stop_h - ex.start_h) / ex.step_h + 1e-9)) + 1;
  const Eigen::ArrayXd t_run =
      (ex.start_h + Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) * ex.step_h) *
      constants::seconds_per_hour;
  const double offset = ex.measurement_offset_h * constants::seconds_per_hour;
  const Eigen::ArrayXd t_inv = t_run + offset;

  ExposureConfig synth = ex.synth;
  synth.material = cfg.material;
  const ExposureSeries s =
      synth_exposure_campaign(cfg.inventory, cfg.environment, qubit, cfg.a, t_inv, synth, seed);
  const double epoch = reference_epoch(cfg);
  const auto utc = utc_column(epoch, t_inv);

  Table exposure;
  exposure.add_column("t_s", t_run);
  exposure.add_column("time_utc", utc);
  exposure.add_column("P_src", s.p_src);
  exposure.add_column("P_tot", s.p_tot);
  exposure.add_column("gamma1_true", s.gamma1_true);
  exposure.add_column("gamma1_measured", s.gamma1_measured);
  exposure.add_column("gamma1_stderr", s.gamma1_stderr);

  Table power;
  power.add_column("t_s", t_run);
  power.add_column("time_utc", utc);
  for (const auto& e : cfg.inventory.entries()) {
    Eigen::ArrayXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      col[i] = decayed_activity(e.activity_bq, e.isotope.half_life_s(), t_inv[i]) *
               e.isotope.coefficient(cfg.material);
    }
    power.add_column("P_src_" + e.isotope.name(), col);
  }
  const double p_env = environment_power_density(cfg.environment, ShieldState::none, cfg.material);
  power.add_column("P_env", Eigen::ArrayXd::Constant(n, p_env));
  power.add_column("P_tot", s.p_tot);
  Eigen::ArrayXd x(n), shift(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xq = xqp_from_gamma(s.gamma1_true[i] - qubit.gamma_other, qubit);
    x[i] = xq.x;
    shift[i] = qubit_frequency_shift(xq, qubit) / (2 * constants::pi);
  }
  power.add_column("x_qp", x);
  power.add_column("qubit_shift_hz", shift);

  CommandResult r;
  r.files.push_back(data_file("exposure", exposure, fmt));
  r.files.push_back(data_file("power", power, fmt));
  const long bad = (!s.gamma1_measured.isFinite()).count();
  if (bad > 0) {
    r.warnings.push_back(std::to_string(bad) + " trace fit(s) did not converge; rows carry nan");
  }
  return r;
}

CommandResult fit_exposure(const io::ScenarioConfig& cfg, const std::filesystem::path& path) {
  const Table t = io::read_table(path);
  t.require_columns({"P_tot", "gamma1_measured", "gamma1_stderr"});
  const Eigen::ArrayXd p_all = t.numeric("P_tot");
  const Eigen::ArrayXd g_all = t.numeric("gamma1_measured");
  const Eigen::ArrayXd s_all = t.numeric("gamma1_stderr");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p_all.size(); ++i) {
    if (std::isfinite(g_all[i]) && p_all[i] > 0) keep.push_back(i);
  }
  if (keep.size() < 3) throw DataError(path.string() + ": fewer than 3 usable rows");
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::ArrayXd p(n), g(n), s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = p_all[keep[static_cast<std::size_t>(i)]];
    g[i] = g_all[keep[static_cast<std::size_t>(i)]];
    s[i] = s_all[keep[static_cast<std::size_t>(i)]];
  }
  const bool weighted = (s > 0).all() && s.isFinite().all();
  const Eigen::ArrayXd sigma = weighted ? s : Eigen::ArrayXd();
  const auto& qubit = cfg.qubit(cfg.exposure.qubit);

  const FitResult free_fit = fit_power_law_model(p, g, sigma, qubit.params.omega_q);
  PowerLawFitOptions fixed;
  fixed.fix_gamma_other_zero = true;
  const FitResult zero_fit = fit_power_law_model(p, g, sigma, qubit.params.omega_q, fixed);

  json out;
  out["qubit"] = qubit.id;
  out["omega_q_rad_per_s"] = qubit.params.omega_q;
  out["n_rows_used"] = n;
  out["weighted"] = weighted;
  out["model"] = "gamma1 = a sqrt(omega P) + gamma_other";
  out["units"] = {{"a", "sqrt(mm^3/keV)"}, {"gamma_other", "1/s"}};
  out["fit"] = fit_to_json(free_fit);
  out["fit_gamma_other_zero"] = fit_to_json(zero_fit);

  CommandResult r;
  r.files.push_back(json_file("fit.json", out));
  r.converged = free_fit.converged;
  if (!free_fit.converged) r.warnings.push_back("power-law fit: " + free_fit.message);
  if (!zero_fit.converged) r.warnings.push_back("gamma_other = 0 fit: " + zero_fit.message);
  return r;
}

CommandResult simulate_shield_ab(const io::ScenarioConfig& cfg, std::uint64_t seed, int threads,
                                 OutputFormat fmt) {
  const auto records = synth_ab_campaign(cfg.ab_campaign(seed, threads));
  const double epoch = reference_epoch(cfg);
  Table t({"qubit_id", "omega_q_rad_per_s", "cycle", "position", "repetition", "t1_us",
           "timestamp_s", "time_utc"});
  for (const auto& r : records) {
    t.add_row({r.qubit_id, format_double(r.omega_q), io::format_int(r.cycle),
               std::string(to_string(r.position)), io::format_int(r.repetition), format_double(r.t1_us),
               format_double(r.timestamp_s), io::iso8601_utc(epoch + r.timestamp_s)});
  }
  CommandResult out;
  out.files.push_back(data_file("ab_records", t, fmt));
  return out;
}

CommandResult analyze_ab(const io::ScenarioConfig& cfg, const std::filesystem::path& path,
                         std::uint64_t seed, OutputFormat fmt) {
  const auto records = records_from_table(io::read_table(path));
  const auto& as = cfg.analysis;
  AnalysisConfig acfg = as.analysis;
  acfg.seed = seed;
  CommandResult out;

  const AbReport rep = analyze_ab(records, acfg);
  json j;
  j["input"] = {{"records", records.size()},
                {"pairing", to_string(acfg.mode)},
                {"aggregation", to_string(acfg.aggregation)},
                {"t1_cutoff_us", acfg.t1_cutoff_us},
                {"outlier_sigma", acfg.outlier_sigma},
                {"reference_qubit", as.reference_qubit},
                {"omega_ref_rad_per_s", acfg.omega_ref}};
  j["pairs"] = {{"n", rep.pairing.pairs.size()},
                {"removed_cutoff", rep.pairing.removed_cutoff},
                {"removed_outlier", rep.pairing.removed_outlier},
                {"unmatched", rep.pairing.unmatched}};
  j["delta_gamma1_per_s"] = {{"median", rep.median.median},
                             {"ci_lower", rep.median.lower},
                             {"ci_upper", rep.median.upper},
                             {"ci_level", acfg.ci_level},
                             {"ci_exact", rep.median.exact},
                             {"median_inverse_ms", number_or_null(1e3 / rep.median.median)}};
  j["wilcoxon"] = {{"alternative", "greater (down rates exceed up rates)"},
                   {"w_plus", rep.wilcoxon.w_plus},
                   {"p_value", rep.wilcoxon.p_value},
                   {"n_effective", rep.wilcoxon.n_effective},
                   {"exact", rep.wilcoxon.exact},
                   {"z", rep.wilcoxon.z}};

  // Internal-power estimates.
  const QubitParams<double> ref_qubit{acfg.omega_ref, 0.0, cfg.superconductor};
  const ShieldScenario<double> shield{as.a, 0.0, as.p_ext, as.eta_up, as.eta_down};
  json pint;
  pint["asymmetry_median"] = rep.asymmetry.median;
  if (rep.asymmetry.median > 0) {
    const double eff = pint_bound_from_asymmetry(rep.asymmetry.median, as.eta_up, as.eta_down, as.p_ext);
    pint["effective_bound_kev_per_s_mm3"] = eff;
    pint["bound_minus_gamma_other_term"] =
        internal_power_from_bound(eff, as.gamma_other_ref_per_us * 1e6, as.a, acfg.omega_ref);
  } else {
    pint["effective_bound_kev_per_s_mm3"] = nullptr;
    pint["bound_minus_gamma_other_term"] = nullptr;
    out.warnings.push_back("median asymmetry is not positive; P_int bound undefined");
  }
  auto solve = [&](double dg) -> json {
    const auto v = solve_internal_power(shield, ref_qubit, dg);
    return v ? json(*v) : json(nullptr);
  };
  pint["from_median_kev_per_s_mm3"] = solve(rep.median.median);
  pint["from_ci_upper_kev_per_s_mm3"] = solve(rep.median.upper);  // smallest P_int
  pint["from_ci_lower_kev_per_s_mm3"] = solve(rep.median.lower);
  if (auto v = solve_internal_power(shield, ref_qubit, rep.median.median)) {
    pint["ratio_to_p_ext"] = *v / as.p_ext;
  } else {
    pint["ratio_to_p_ext"] = nullptr;
  }
  pint["prediction_at_zero_p_int_per_s"] = delta_gamma_shield(shield, ref_qubit);
  json curve = json::array();
  for (int i = 0; i < as.pint_curve_points; ++i) {
    const double ratio =
        as.pint_curve_points == 1 ? 0.0 : as.pint_curve_max_ratio * i / (as.pint_curve_points - 1);
    ShieldScenario<double> s = shield;
    s.p_int = ratio * as.p_ext;
    curve.push_back({{"p_int_over_p_ext", ratio}, {"delta_gamma1_per_s", delta_gamma_shield(s, ref_qubit)}});
  }
  pint["curve"] = curve;
  j["internal_power"] = pint;
  j["reference_values"] = {{"median_delta_gamma1_per_s", 1e3 / 22.7},
                           {"ci_per_s", {1e3 / 75.8, 1e3 / 12.4}},
                           {"wilcoxon_p", 0.006},
                           {"wilcoxon_w", 2.5e7},
                           {"n_pairs", 9846},
                           {"asymmetry_median", 0.0028},
                           {"p_int_kev_per_s_mm3", 0.081}};

  // Drift spectra per qubit.
  json noise = json::object();
  Table psd_table({"qubit_id", "frequency_hz", "psd_us2_per_hz"});
  std::map<std::string, std::vector<const AbRecord*>> by_qubit;
  for (const auto& r : records) by_qubit[r.qubit_id].push_back(&r);
  for (auto& [id, v] : by_qubit) {
    std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->timestamp_s < b->timestamp_s; });
    Eigen::ArrayXd series(static_cast<Eigen::Index>(v.size())), ts(series.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      series[static_cast<Eigen::Index>(i)] = v[i]->t1_us;
      ts[static_cast<Eigen::Index>(i)] = v[i]->timestamp_s;
    }
    try {
      const Psd psd = psd_estimate(series, ts, as.psd_segments);
      const PowerLaw law = power_law_fit(psd);
      json q = {{"alpha", law.alpha}, {"s_const_us2_hz_alpha_minus_1", law.s_const}};
      for (const auto& b : as.bands) q["band_power_us2"][b.name] = noise_power_in_band(law, b.f_lo_hz, b.f_hi_hz);
      noise[id] = q;
      for (Eigen::Index k = 1; k < psd.frequency_hz.size(); ++k) {
        psd_table.add_row({id, format_double(psd.frequency_hz[k]), format_double(psd.density[k])});
      }
    } catch (const DataError& e) {
      out.warnings.push_back("drift spectrum skipped for " + id + ": " + e.what());
    }
  }
  const auto& sab = cfg.shield_ab;
  const PowerLaw configured{sab.drift_alpha,
                            sab.drift_psd_us2_per_hz * std::pow(sab.drift_reference_hz, sab.drift_alpha)};
  json model = {{"alpha", configured.alpha}, {"s_const_us2_hz_alpha_minus_1", configured.s_const}};
  for (const auto& b : as.bands) {
    model["band_power_us2"][b.name] = noise_power_in_band(configured, b.f_lo_hz, b.f_hi_hz);
  }
  noise["configured_model"] = model;
  j["drift_noise"] = noise;

  // Robustness grid across pairing modes.
  Table grid({"mode", "t1_cutoff_us", "outlier_sigma", "n_pairs", "p_value", "median_delta_gamma1_per_s",
              "valid"});
  for (PairingMode mode : {PairingMode::real, PairingMode::no_move, PairingMode::shuffled}) {
    AnalysisConfig c = acfg;
    c.mode = mode;
    for (const auto& cell : robustness_map(records, as.robustness_cutoffs_us, as.robustness_sigmas, c)) {
      grid.add_row({to_string(mode), format_double(cell.t1_cutoff_us), format_double(cell.outlier_sigma),
                    io::format_int(cell.n_pairs), format_double(cell.valid ? cell.p_value : NAN),
                    format_double(cell.valid ? cell.median_delta : NAN), cell.valid ? "1" : "0"});
    }
  }

  Table hist({"quantity", "bin_lo", "bin_hi", "count"});
  auto add_hist = [&](const std::string& name, const Histogram& h) {
    for (Eigen::Index k = 0; k < h.counts.size(); ++k) {
      hist.add_row({name, format_double(h.edges[k]), format_double(h.edges[k + 1]),
                    format_double(h.counts[k])});
    }
  };
  add_hist("delta_gamma1_per_s", rep.delta_histogram);
  add_hist("asymmetry", rep.asymmetry.histogram);

  if (rep.pairing.unmatched > 0) {
    out.warnings.push_back(std::to_string(rep.pairing.unmatched) + " record(s) had no partner");
  }
  out.files.push_back(json_file("report.json", j));
  out.files.push_back(data_file("histogram", hist, fmt));
  out.files.push_back(data_file("robustness_grid", grid, fmt));
  out.files.push_back(data_file("psd", psd_table, fmt));
  return out;
}

CommandResult inject_qp(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt) {
  const auto& in = cfg.injection;
  QubitParams<double> q = cfg.qubit(in.qubit).params;
  q.gamma_other = in.gamma_other_per_us * 1e6;
  const Eigen::ArrayXd delays = Eigen::ArrayXd::LinSpaced(in.n_delays, 0.0, in.delay_max_ms * 1e-3);
  const InjectionSeries s = synth_injection_series(in.x0, in.r_per_s, in.s_per_s, q, delays, in.noise_rel, seed);
  const auto fits = fit_injection(s.t_s, s.gamma1, in.noise_rel > 0 ? s.sigma : Eigen::ArrayXd(), q);

  Table t;
  t.add_column("t_qp_s", s.t_s);
  t.add_column("gamma1", s.gamma1);
  t.add_column("sigma", s.sigma);
  const double coupling = qp_coupling(q.omega_q, q.sc);
  json ranking = json::array();
  bool full_ok = true;
  for (std::size_t rank = 0; rank < fits.size(); ++rank) {
    const auto& f = fits[rank];
    const double x0 = f.fit.value("x0"), r = f.fit.value("r"), sp = f.fit.value("s"),
                 other = f.fit.value("gamma_other");
    Eigen::ArrayXd pred(s.t_s.size());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      pred[i] = coupling * evolve_xqp_closed(QpState<double>{x0}, r, sp, s.t_s[i]).x + other;
    }
    t.add_column("fit_" + to_string(f.model), pred);
    json entry = fit_to_json(f.fit);
    entry["model"] = to_string(f.model);
    entry["rank"] = rank + 1;
    entry["n_free_parameters"] = f.n_parameters;
    ranking.push_back(entry);
    if (f.model == InjectionModel::full) full_ok = f.fit.converged;
  }
  json j;
  j["truth"] = {{"x0", in.x0}, {"r_per_s", in.r_per_s}, {"s_per_s", in.s_per_s},
                {"gamma_other_per_s", q.gamma_other}, {"noise_rel", in.noise_rel}};
  j["qubit"] = in.qubit;
  j["ranking_by_rss"] = ranking;

  CommandResult out;
  out.files.push_back(data_file("injection", t, fmt));
  out.files.push_back(json_file("fits.json", j));
  out.converged = full_ok;
  if (!full_ok) out.warnings.push_back("full injection model did not converge");
  return out;
}

CommandResult simulate_spectrum(const io::ScenarioConfig& cfg, std::uint64_t seed, OutputFormat fmt) {
  const auto& s = cfg.spectrum;
  const auto templates = toy_templates(s);
  if (s.true_weights.size() != templates.size()) {
    throw ConfigError("spectrum.toy.true_weights needs " + std::to_string(templates.size()) + " entries");
  }
  const SpectrumModel truth = toy_truth(s);
  const Eigen::ArrayXd expected = spectrum_prediction(templates, truth, s.n_channels);
  Rng rng = make_rng(seed, "spectrum", 0);
  Table hist;
  Eigen::ArrayXd counts(expected.size());
  for (Eigen::Index k = 0; k < expected.size(); ++k) {
    counts[k] = expected[k] > 0 ? static_cast<double>(std::poisson_distribution<long>(expected[k])(rng)) : 0.0;
  }
  hist.add_column("channel", Eigen::ArrayXd::LinSpaced(expected.size(), 0.0, static_cast<double>(expected.size() - 1)));
  hist.add_column("counts", counts);

  CommandResult out;
  out.files.push_back(data_file("hist", hist, fmt));
  json names = json::array();
  for (const auto& t : templates) {
    out.files.push_back(data_file("templates/" + t.name, template_table(t), fmt));
    names.push_back(t.name);
  }
  json truth_j = {{"c0", truth.c0}, {"c1", truth.c1}, {"c2", truth.c2},
                  {"var0", truth.var0}, {"var1", truth.var1}, {"var2", truth.var2}};
  for (std::size_t i = 0; i < templates.size(); ++i) truth_j["w_" + templates[i].name] = truth.weights[i];
  out.files.push_back(json_file("truth.json", {{"templates", names}, {"parameters", truth_j}}));
  return out;
}

CommandResult fit_spectrum(const io::ScenarioConfig& cfg, const std::filesystem::path& histogram,
                           const std::filesystem::path& templates_dir) {
  const Table h = io::read_table(histogram);
  h.require_columns({"channel", "counts"});
  const Eigen::ArrayXd ch = h.numeric("channel");
  const Eigen::ArrayXd c = h.numeric("counts");
  const Eigen::Index n_ch = std::max<Eigen::Index>(cfg.spectrum.n_channels,
                                                   static_cast<Eigen::Index>(ch.maxCoeff()) + 1);
  Eigen::ArrayXd measured = Eigen::ArrayXd::Zero(n_ch);
  for (Eigen::Index i = 0; i < ch.size(); ++i) {
    if (!(ch[i] >= 0) || ch[i] != std::floor(ch[i])) {
      throw DataError(h.source + ": line " + std::to_string(i + 2) + ": channel must be a non-negative integer");
    }
    if (!(c[i] >= 0)) throw DataError(h.source + ": line " + std::to_string(i + 2) + ": negative counts");
    measured[static_cast<Eigen::Index>(ch[i])] += c[i];
  }

  if (!std::filesystem::is_directory(templates_dir)) {
    throw DataError("templates directory not found: " + templates_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(templates_dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EnergyTemplate> templates;
  for (const auto& f : files) templates.push_back(template_from_table(io::read_table(f), f.stem().string()));
  if (templates.size() < 3) {
    throw DataError(templates_dir.string() + ": need at least 3 templates, found " + std::to_string(templates.size()));
  }

  SpectrumFitOptions opts;
  opts.ranges = cfg.spectrum.ranges;
  opts.degeneracy_cosine = cfg.spectrum.degeneracy_cosine;
  const SpectrumFitReport rep = qprad::fit_spectrum(measured, templates, cfg.spectrum.initial, opts);

  json j;
  json names = json::array();
  for (const auto& t : templates) names.push_back(t.name);
  j["templates"] = names;
  // Sub-range failures are reported as warnings; the exit status follows the
  // widest range.
  json fits = json::array();
  const RangeFit* widest = &rep.fits.front();
  for (const auto& f : rep.fits) {
    json e = fit_to_json(f.fit);
    e["range_kev"] = {f.range.lo_kev, f.range.hi_kev};
    fits.push_back(e);
    if (f.range.hi_kev - f.range.lo_kev > widest->range.hi_kev - widest->range.lo_kev) widest = &f;
  }
  const bool all_ok = widest->fit.converged;
  j["fits"] = fits;
  json spread = json::object();
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double w_full = widest->fit.values[6 + k];
    spread[templates[i].name] = {{"spread", rep.weight_spread[k]},
                                 {"relative_spread", number_or_null(rep.weight_spread[k] / w_full)}};
  }
  j["range_systematic"] = spread;
  j["warnings"] = rep.warnings;

  CommandResult out;
  out.files.push_back(json_file("spectrum_fit.json", j));
  out.warnings = rep.warnings;
  out.converged = all_ok;
  return out;
}

int run(const std::string& verb, const GlobalOptions& options, const CommandInputs& inputs,
        std::ostream& err) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto started = std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  try {
    const io::ScenarioConfig cfg = options.config ? io::load_config(*options.config) : io::default_config();
    const std::uint64_t seed = options.seed.value_or(cfg.seed);
    const int threads = std::max(options.threads, 1);

    CommandResult result;
    if (verb == "simulate-exposure") {
      result = simulate_exposure(cfg, seed, options.format);
    } else if (verb == "fit-exposure") {
      result = fit_exposure(cfg, inputs.table);
    } else if (verb == "simulate-shield-ab") {
      result = simulate_shield_ab(cfg, seed, threads, options.format);
    } else if (verb == "analyze-ab") {
      result = analyze_ab(cfg, inputs.table, seed, options.format);
    } else if (verb == "inject-qp") {
      result = inject_qp(cfg, seed, options.format);
    } else if (verb == "simulate-spectrum") {
      result = simulate_spectrum(cfg, seed, options.format);
    } else if (verb == "fit-spectrum") {
      result = fit_spectrum(cfg, inputs.table, inputs.templates_dir);
    } else {
      throw ConfigError("unknown command '" + verb + "'");
    }

    io::RunManifest m;
    m.command = verb;
    m.tool_version = tool_version;
    m.config_hash = io::sha256_hex(cfg.canonical.dump());
    m.seed = seed;
    m.started_utc = io::iso8601_utc(started);
    m.exit_code = result.converged ? exit_ok : exit_nonconvergence;
    m.warnings = result.warnings;
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    io::commit_run(options.out, result.files, m);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    if (!result.converged) err << "error: fit did not converge; results written with flags\n";
    return m.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ContractViolation& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return exit_data;
  } catch (const NumericalInstability& e) {
    err << "numerical error: " << e.what() << "\n";
    return exit_nonconvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace qprad::cli
