#include "qprad/io/config.hpp"

#include <cmath>
#include <set>

#include "qprad/constants.hpp"
#include "qprad/errors.hpp"
#include "qprad/io/table.hpp"

namespace qprad::io {

namespace {

using nlohmann::json;

// Object view that records which keys were read, so leftovers can be
// reported as unknown.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_->contains(key);
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = (*j_)[key];
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = (*j_)[key];
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v.get<long long>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = (*j_)[key];
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const json& v = (*j_)[key];
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return (*j_)[key];
  }

  Node child(const std::string& key) { return Node(raw(key), at(key)); }

  std::vector<Node> children(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of objects");
    std::vector<Node> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.emplace_back(v[i], at(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  std::map<std::string, double> number_map(const std::string& key) {
    Node m = child(key);
    std::map<std::string, double> out;
    for (const auto& [k, v] : m.j_->items()) out[k] = m.number(k, 0.0);
    m.finish();
    return out;
  }

  void finish() const {
    std::string unknown;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) unknown += (unknown.empty() ? "" : ", ") + at(k);
    }
    if (!unknown.empty()) throw ConfigError("unknown configuration key(s): " + unknown);
  }

  const std::string& path() const { return path_; }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

double omega_from_ghz(double ghz) { return 2 * constants::pi * ghz * 1e9; }

NamedQubit make_qubit(const std::string& id, double ghz, double gamma_other_per_us) {
  NamedQubit q;
  q.id = id;
  q.params.omega_q = omega_from_ghz(ghz);
  q.params.gamma_other = gamma_other_per_us * 1e6;
  return q;
}

Isotope make_isotope(const std::string& name, double half_life_h, double coeff_al, double coeff_si) {
  return Isotope(name, half_life_h * constants::seconds_per_hour, {{"Al", coeff_al}, {"Si", coeff_si}});
}

void parse_qubits(Node& root, ScenarioConfig& c) {
  if (!root.has("qubits")) return;
  c.qubits.clear();
  for (Node q : root.children("qubits")) {
    if (!q.has("id")) throw ConfigError(q.path() + ": missing id");
    if (!q.has("frequency_ghz")) throw ConfigError(q.path() + ": missing frequency_ghz");
    NamedQubit nq = make_qubit(q.text("id", ""), q.number("frequency_ghz", 0),
                               q.number("gamma_other_per_us", 0));
    nq.params.sc = c.superconductor;
    try {
      nq.params.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(q.path() + ": " + e.what());
    }
    q.finish();
    c.qubits.push_back(std::move(nq));
  }
}

void parse_inventory(Node& root, ScenarioConfig& c) {
  if (!root.has("inventory")) return;
  Node inv = root.child("inventory");
  const std::string ref = inv.text("reference_time_utc", c.inventory.reference_time_utc());
  parse_iso8601_utc(ref);
  std::vector<InventoryEntry> entries = c.inventory.entries();
  if (inv.has("isotopes")) {
    entries.clear();
    for (Node iso : inv.children("isotopes")) {
      const std::string name = iso.text("name", "");
      if (name.empty()) throw ConfigError(iso.path() + ": missing name");
      if (!iso.has("half_life_h")) throw ConfigError(iso.path() + ": missing half_life_h");
      const double half_life_h = iso.number("half_life_h", 0);
      const bool uci = iso.has("activity_uci");
      const bool bq = iso.has("activity_bq");
      if (uci == bq) throw ConfigError(iso.path() + ": give exactly one of activity_uci, activity_bq");
      const double activity =
          uci ? iso.number("activity_uci", 0) * constants::bq_per_uci : iso.number("activity_bq", 0);
      if (!iso.has("power_coeff_kev_per_s_mm3_per_bq")) {
        throw ConfigError(iso.path() + ": missing power_coeff_kev_per_s_mm3_per_bq");
      }
      auto coeff = iso.number_map("power_coeff_kev_per_s_mm3_per_bq");
      iso.finish();
      try {
        entries.push_back({Isotope(name, half_life_h * constants::seconds_per_hour, coeff), activity});
      } catch (const std::exception& e) {
        throw ConfigError(iso.path() + ": " + e.what());
      }
    }
  }
  inv.finish();
  try {
    c.inventory = SourceInventory(ref, std::move(entries));
  } catch (const std::exception& e) {
    throw ConfigError(inv.path() + ": " + e.what());
  }
}

void parse_environment(Node& root, ScenarioConfig& c) {
  if (!root.has("environment")) return;
  Node env = root.child("environment");
  const double p_int = env.number("internal_power_kev_per_s_mm3", c.environment.internal_power());
  std::vector<EnvironmentComponent> comps = c.environment.components();
  if (env.has("components")) {
    comps.clear();
    for (Node comp : env.children("components")) {
      EnvironmentComponent ec;
      ec.name = comp.text("name", "");
      if (ec.name.empty()) throw ConfigError(comp.path() + ": missing name");
      if (!comp.has("power_density_kev_per_s_mm3")) {
        throw ConfigError(comp.path() + ": missing power_density_kev_per_s_mm3");
      }
      ec.power_density = comp.number_map("power_density_kev_per_s_mm3");
      ec.efficiency[ShieldState::none] = 0.0;
      ec.efficiency[ShieldState::up] = comp.number("eta_up", 0.0);
      ec.efficiency[ShieldState::down] = comp.number("eta_down", 0.0);
      comp.finish();
      comps.push_back(std::move(ec));
    }
  }
  env.finish();
  try {
    c.environment = EnvironmentModel(std::move(comps), p_int);
  } catch (const std::exception& e) {
    throw ConfigError(env.path() + ": " + e.what());
  }
}

void parse_trace(Node& n, TraceConfig& t) {
  t.shots = static_cast<int>(n.integer("shots", t.shots));
  t.repeats = static_cast<int>(n.integer("repeats", t.repeats));
  t.residual_excited = n.number("residual_excited", t.residual_excited);
  t.gamma1_jitter_rel = n.number("gamma1_jitter_rel", t.gamma1_jitter_rel);
  if (n.has("delays_us")) {
    const auto d = n.numbers("delays_us", {});
    t.delays_s = Eigen::Map<const Eigen::ArrayXd>(d.data(), static_cast<Eigen::Index>(d.size())) * 1e-6;
  }
  n.finish();
}

void parse_exposure(Node& root, ScenarioConfig& c) {
  if (!root.has("exposure")) return;
  Node n = root.child("exposure");
  auto& e = c.exposure;
  e.qubit = n.text("qubit", e.qubit);
  e.start_h = n.number("start_h", e.start_h);
  e.stop_h = n.number("stop_h", e.stop_h);
  e.step_h = n.number("step_h", e.step_h);
  e.measurement_offset_h = n.number("measurement_offset_h", e.measurement_offset_h);
  e.synth.noise = exposure_noise_from_string(
      n.text("noise", e.synth.noise == ExposureNoise::none    ? "none"
                      : e.synth.noise == ExposureNoise::gamma ? "gamma"
                                                              : "trace"));
  e.synth.gamma_noise_rel = n.number("gamma_noise_rel", e.synth.gamma_noise_rel);
  if (n.has("trace")) {
    Node t = n.child("trace");
    parse_trace(t, e.synth.trace);
  }
  n.finish();
  if (!(e.step_h > 0) || !(e.stop_h >= e.start_h)) {
    throw ConfigError(n.path() + ": need step_h > 0 and stop_h >= start_h");
  }
  if (!(e.synth.gamma_noise_rel >= 0)) throw ConfigError(n.at("gamma_noise_rel") + ": must be >= 0");
}

void parse_scenario(Node& n, ShieldScenario<double>& s) {
  s.p_int = n.number("p_int_kev_per_s_mm3", s.p_int);
  s.p_ext = n.number("p_ext_kev_per_s_mm3", s.p_ext);
  s.eta_up = n.number("eta_up", s.eta_up);
  s.eta_down = n.number("eta_down", s.eta_down);
  s.a = n.number("a_sqrt_mm3_per_kev", s.a);
  n.finish();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(n.path() + ": " + e.what());
  }
}

void parse_shield_ab(Node& root, ScenarioConfig& c) {
  if (!root.has("shield_ab")) return;
  Node n = root.child("shield_ab");
  auto& s = c.shield_ab;
  if (n.has("scenario")) {
    Node sc = n.child("scenario");
    parse_scenario(sc, s.scenario);
  }
  s.gamma_other_per_us = n.number("gamma_other_per_us", s.gamma_other_per_us);
  if (n.has("groups")) {
    s.groups.clear();
    for (Node g : n.children("groups")) {
      AbGroupSettings gs;
      gs.qubits = g.strings("qubits", {});
      gs.cycles = static_cast<int>(g.integer("cycles", 1));
      gs.n_per_position = static_cast<int>(g.integer("n_per_position", 1));
      gs.sample_interval_s = g.number("sample_interval_s", 9.0);
      gs.start_h = g.number("start_h", 0.0);
      g.finish();
      s.groups.push_back(std::move(gs));
    }
  }
  if (n.has("drift")) {
    Node d = n.child("drift");
    s.drift_alpha = d.number("alpha", s.drift_alpha);
    s.drift_psd_us2_per_hz = d.number("psd_us2_per_hz", s.drift_psd_us2_per_hz);
    s.drift_reference_hz = d.number("reference_hz", s.drift_reference_hz);
    d.finish();
  }
  s.t1_noise_rel = n.number("t1_noise_rel", s.t1_noise_rel);
  s.t1_floor_us = n.number("t1_floor_us", s.t1_floor_us);
  n.finish();
}

void parse_analysis(Node& root, ScenarioConfig& c) {
  if (!root.has("analysis")) return;
  Node n = root.child("analysis");
  auto& a = c.analysis;
  a.analysis.t1_cutoff_us = n.number("t1_cutoff_us", a.analysis.t1_cutoff_us);
  a.analysis.outlier_sigma = n.number("outlier_sigma", a.analysis.outlier_sigma);
  a.analysis.ci_level = n.number("ci_level", a.analysis.ci_level);
  a.reference_qubit = n.text("reference_qubit", a.reference_qubit);
  a.analysis.mode = pairing_mode_from_string(n.text("pairing", to_string(a.analysis.mode)));
  a.analysis.aggregation =
      aggregation_from_string(n.text("aggregation", to_string(a.analysis.aggregation)));
  a.analysis.histogram_bins = static_cast<int>(n.integer("histogram_bins", a.analysis.histogram_bins));
  if (n.has("robustness")) {
    Node r = n.child("robustness");
    a.robustness_cutoffs_us = r.numbers("t1_cutoffs_us", a.robustness_cutoffs_us);
    a.robustness_sigmas = r.numbers("outlier_sigmas", a.robustness_sigmas);
    r.finish();
  }
  if (n.has("pint")) {
    Node p = n.child("pint");
    a.eta_up = p.number("eta_up", a.eta_up);
    a.eta_down = p.number("eta_down", a.eta_down);
    a.p_ext = p.number("p_ext_kev_per_s_mm3", a.p_ext);
    a.a = p.number("a_sqrt_mm3_per_kev", a.a);
    a.gamma_other_ref_per_us = p.number("gamma_other_ref_per_us", a.gamma_other_ref_per_us);
    a.pint_curve_max_ratio = p.number("curve_max_ratio", a.pint_curve_max_ratio);
    a.pint_curve_points = static_cast<int>(p.integer("curve_points", a.pint_curve_points));
    p.finish();
  }
  if (n.has("psd")) {
    Node p = n.child("psd");
    a.psd_segments = static_cast<int>(p.integer("segments", a.psd_segments));
    if (p.has("bands")) {
      a.bands.clear();
      for (Node b : p.children("bands")) {
        NoiseBand nb;
        nb.name = b.text("name", "");
        nb.f_lo_hz = b.number("f_lo_hz", 0);
        nb.f_hi_hz = b.number("f_hi_hz", 0);
        b.finish();
        if (!(nb.f_lo_hz > 0 && nb.f_hi_hz > nb.f_lo_hz)) {
          throw ConfigError(b.path() + ": need 0 < f_lo_hz < f_hi_hz");
        }
        a.bands.push_back(std::move(nb));
      }
    }
    p.finish();
  }
  n.finish();
  try {
    a.analysis.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(n.path() + ": " + e.what());
  }
}

void parse_injection(Node& root, ScenarioConfig& c) {
  if (!root.has("injection")) return;
  Node n = root.child("injection");
  auto& i = c.injection;
  i.qubit = n.text("qubit", i.qubit);
  i.x0 = n.number("x0", i.x0);
  i.r_per_s = n.number("r_per_s", i.r_per_s);
  i.s_per_s = n.number("s_per_s", i.s_per_s);
  i.gamma_other_per_us = n.number("gamma_other_per_us", i.gamma_other_per_us);
  i.delay_max_ms = n.number("delay_max_ms", i.delay_max_ms);
  i.n_delays = static_cast<int>(n.integer("n_delays", i.n_delays));
  i.noise_rel = n.number("noise_rel", i.noise_rel);
  n.finish();
  if (!(i.x0 >= 0 && i.x0 <= 1)) throw ConfigError(n.at("x0") + ": must lie in [0, 1]");
  if (!(i.r_per_s >= 0) || !(i.s_per_s >= 0)) throw ConfigError(n.path() + ": rates must be >= 0");
  if (i.n_delays < 6) throw ConfigError(n.at("n_delays") + ": need at least 6");
  if (!(i.delay_max_ms > 0)) throw ConfigError(n.at("delay_max_ms") + ": must be > 0");
}

void parse_spectrum(Node& root, ScenarioConfig& c) {
  if (!root.has("spectrum")) return;
  Node n = root.child("spectrum");
  auto& s = c.spectrum;
  s.n_channels = static_cast<Eigen::Index>(n.integer("n_channels", s.n_channels));
  if (n.has("calibration")) {
    Node k = n.child("calibration");
    s.initial.c0 = k.number("c0_ch", s.initial.c0);
    s.initial.c1 = k.number("c1_ch_per_kev", s.initial.c1);
    s.initial.c2 = k.number("c2_ch_per_kev2", s.initial.c2);
    k.finish();
  }
  if (n.has("resolution")) {
    Node k = n.child("resolution");
    s.initial.var0 = k.number("var0_ch2", s.initial.var0);
    s.initial.var1 = k.number("var1_ch2_per_kev", s.initial.var1);
    s.initial.var2 = k.number("var2_ch2_per_kev2", s.initial.var2);
    k.finish();
  }
  if (n.has("ranges_kev")) {
    const json& r = n.raw("ranges_kev");
    if (!r.is_array()) throw ConfigError(n.at("ranges_kev") + ": expected [[lo, hi], ...]");
    s.ranges.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_array() || r[i].size() != 2 || !r[i][0].is_number() || !r[i][1].is_number()) {
        throw ConfigError(n.at("ranges_kev") + "[" + std::to_string(i) + "]: expected [lo, hi]");
      }
      s.ranges.push_back({r[i][0].get<double>(), r[i][1].get<double>()});
    }
  }
  s.degeneracy_cosine = n.number("degeneracy_cosine", s.degeneracy_cosine);
  if (n.has("toy")) {
    Node t = n.child("toy");
    s.true_weights = t.numbers("true_weights", s.true_weights);
    s.counts_scale = t.number("counts_scale", s.counts_scale);
    s.bin_kev = t.number("bin_kev", s.bin_kev);
    s.max_kev = t.number("max_kev", s.max_kev);
    t.finish();
  }
  n.finish();
  if (s.n_channels < 16) throw ConfigError(n.at("n_channels") + ": need at least 16");
}

void check_references(const ScenarioConfig& c) {
  c.qubit(c.exposure.qubit);
  c.qubit(c.injection.qubit);
  c.qubit(c.analysis.reference_qubit);
  for (const auto& g : c.shield_ab.groups) {
    for (const auto& id : g.qubits) c.qubit(id);
  }
  for (const auto& e : c.inventory.entries()) e.isotope.coefficient(c.material);
  c.ab_campaign(0, 1).validate();
}

}  // namespace

const NamedQubit& ScenarioConfig::qubit(const std::string& id) const {
  for (const auto& q : qubits) {
    if (q.id == id) return q;
  }
  throw ConfigError("unknown qubit id '" + id + "'");
}

AbCampaignConfig ScenarioConfig::ab_campaign(std::uint64_t run_seed, int threads) const {
  AbCampaignConfig cfg;
  cfg.scenario = shield_ab.scenario;
  cfg.drift.alpha = shield_ab.drift_alpha;
  cfg.drift.s_const =
      shield_ab.drift_psd_us2_per_hz * std::pow(shield_ab.drift_reference_hz, shield_ab.drift_alpha);
  cfg.t1_noise_rel = shield_ab.t1_noise_rel;
  cfg.t1_floor_us = shield_ab.t1_floor_us;
  cfg.seed = run_seed;
  cfg.threads = threads;
  for (const auto& g : shield_ab.groups) {
    AbGroup group;
    group.cycles = g.cycles;
    group.n_per_position = g.n_per_position;
    group.sample_interval_s = g.sample_interval_s;
    group.start_time_s = g.start_h * constants::seconds_per_hour;
    for (const auto& id : g.qubits) {
      AbQubit q{id, qubit(id).params};
      q.params.gamma_other = shield_ab.gamma_other_per_us * 1e6;
      group.qubits.push_back(std::move(q));
    }
    cfg.groups.push_back(std::move(group));
  }
  return cfg;
}

ScenarioConfig default_config() {
  ScenarioConfig c;
  c.qubits = {make_qubit("Q1", 3.48, 1.0 / 40.0), make_qubit("Q2", 4.6, 1.0 / 40.0),
              make_qubit("Q3", 4.0, 1.0 / 40.0),  make_qubit("Q4", 4.2, 1.0 / 40.0),
              make_qubit("Q5", 4.4, 1.0 / 40.0),  make_qubit("Q6", 4.8, 1.0 / 40.0),
              make_qubit("Q7", 5.0, 1.0 / 40.0)};

  // Per-Bq coefficients: the Cu-64 value reproduces the initial relaxation
  // rate; impurities reuse its scale. Si values are the Al ones / 2.393.
  constexpr double coeff_al = 5.86e-3;
  constexpr double si_ratio = 2.393;
  c.inventory = SourceInventory(
      "2021-01-01T00:00:00Z",
      {{make_isotope("Cu-64", 12.7, coeff_al, coeff_al / si_ratio), 162.0 * constants::bq_per_uci},
       {make_isotope("Au-198", 64.66, coeff_al, coeff_al / si_ratio), 1.65 * constants::bq_per_uci},
       {make_isotope("Ag-110m", 5996.0, coeff_al, coeff_al / si_ratio),
        0.0725 * constants::bq_per_uci}});

  EnvironmentComponent gammas{"gamma", {{"Al", 0.060}, {"Si", 0.060 * 1.07}},
                              {{ShieldState::none, 0.0}, {ShieldState::up, 0.784}, {ShieldState::down, 0.034}}};
  EnvironmentComponent cosmics{"cosmic", {{"Al", 0.042}, {"Si", 0.042 * 1.07}},
                               {{ShieldState::none, 0.0}, {ShieldState::up, 0.0}, {ShieldState::down, 0.0}}};
  c.environment = EnvironmentModel({gammas, cosmics}, 0.0);

  c.exposure.synth.trace.shots = 1000;
  c.exposure.synth.trace.repeats = 20;
  c.exposure.synth.trace.residual_excited = 0.017;
  c.exposure.synth.trace.gamma1_jitter_rel = 0.1;

  c.shield_ab.scenario = {5.4e-3, 0.081, 0.10, 0.461, 0.02};
  c.shield_ab.groups = {{{"Q1", "Q2"}, 65, 50, 9.0, 0.0},
                        {{"Q3", "Q4", "Q5", "Q6", "Q7"}, 85, 10, 45.0, 24.0}};

  c.analysis.analysis.omega_ref = omega_from_ghz(3.48);
  c.analysis.robustness_cutoffs_us = {0, 10, 20, 30, 40, 50, 60};
  c.analysis.robustness_sigmas = {3, 5, 7, 10, 15, 20};
  c.analysis.bands = {{"lock_in", 1.0 / 900.0, 1.0 / 90.0},
                      {"sequential", 1.0 / (85.0 * 900.0), 1.0 / 90.0}};

  c.spectrum.initial.c0 = 5.0;
  c.spectrum.initial.c1 = 0.3;
  c.spectrum.initial.c2 = 1e-6;
  c.spectrum.initial.var0 = 4.0;
  c.spectrum.initial.var1 = 0.01;
  c.spectrum.initial.var2 = 1e-6;
  c.spectrum.ranges = {{200, 1300}, {1300, 2900}, {200, 2900}};
  c.spectrum.true_weights = {1.0, 0.6, 0.8};

  c.canonical = json::object();
  return c;
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig c = default_config();
  Node root(doc, "$");
  c.seed = static_cast<std::uint64_t>(root.integer("seed", static_cast<long long>(c.seed)));
  c.material = root.text("material", c.material);
  if (root.has("superconductor")) {
    Node s = root.child("superconductor");
    c.superconductor.delta_ev = s.number("gap_uev", c.superconductor.delta_ev * 1e6) * 1e-6;
    c.superconductor.n_cp_per_um3 = s.number("n_cp_per_um3", c.superconductor.n_cp_per_um3);
    s.finish();
    c.superconductor.validate();
    for (auto& q : c.qubits) q.params.sc = c.superconductor;
  }
  parse_qubits(root, c);
  if (root.has("power_law")) {
    Node p = root.child("power_law");
    c.a = p.number("a_sqrt_mm3_per_kev", c.a);
    p.finish();
    if (!(c.a > 0)) throw ConfigError("$.power_law.a_sqrt_mm3_per_kev: must be > 0");
  }
  parse_inventory(root, c);
  parse_environment(root, c);
  parse_exposure(root, c);
  parse_shield_ab(root, c);
  parse_analysis(root, c);
  parse_injection(root, c);
  parse_spectrum(root, c);
  root.finish();
  c.analysis.analysis.omega_ref = c.qubit(c.analysis.reference_qubit).params.omega_q;
  check_references(c);
  c.canonical = doc;
  return c;
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text, path.string());
}

}  // namespace qprad::io
