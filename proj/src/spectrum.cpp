#include "qprad/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "qprad/errors.hpp"

namespace qprad {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * inv_sqrt2); }

// Adds the smeared template into `out`; returns false on a non-positive variance.
bool smear_into(const EnergyTemplate& tmpl, const SpectrumModel& m, double weight,
                Eigen::ArrayXd& out) {
  const Eigen::Index n_ch = out.size();
  const Eigen::Index n = tmpl.counts.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = tmpl.counts[i];
    if (c == 0) continue;
    const double e = 0.5 * (tmpl.edges_kev[i] + tmpl.edges_kev[i + 1]);
    const double var = m.variance(e);
    if (!(var > 0) || !std::isfinite(var)) return false;
    const double mu = m.channel(e);
    const double sd = std::sqrt(var);
    const double amount = weight * c;
    if (sd < 1e-9) {
      const auto k = static_cast<Eigen::Index>(std::floor(mu));
      if (k >= 0 && k < n_ch) out[k] += amount;
      continue;
    }
    const Eigen::Index lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(mu - 8 * sd)));
    const Eigen::Index hi =
        std::min<Eigen::Index>(n_ch - 1, static_cast<Eigen::Index>(std::floor(mu + 8 * sd)));
    if (hi < lo) continue;
    double prev = normal_cdf((static_cast<double>(lo) - mu) / sd);
    for (Eigen::Index k = lo; k <= hi; ++k) {
      const double next = normal_cdf((static_cast<double>(k + 1) - mu) / sd);
      out[k] += amount * (next - prev);
      prev = next;
    }
  }
  return true;
}

std::vector<std::string> parameter_names(const std::vector<EnergyTemplate>& templates) {
  std::vector<std::string> names{"c0", "c1", "c2", "var0", "var1", "var2"};
  for (const auto& t : templates) names.push_back("w_" + t.name);
  return names;
}

SpectrumModel unpack(const Eigen::VectorXd& p, std::size_t n_templates) {
  SpectrumModel m;
  m.c0 = p[0];
  m.c1 = p[1];
  m.c2 = p[2];
  m.var0 = p[3];
  m.var1 = p[4];
  m.var2 = p[5];
  m.weights.assign(p.data() + 6, p.data() + 6 + n_templates);
  return m;
}

std::pair<Eigen::Index, Eigen::Index> channel_window(const SpectrumModel& m, EnergyRange r,
                                                     Eigen::Index n_channels) {
  const double a = m.channel(r.lo_kev);
  const double b = m.channel(r.hi_kev);
  const auto lo = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(std::min(a, b))), 0,
                                           n_channels - 1);
  const auto hi = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(std::max(a, b))), 0,
                                           n_channels - 1);
  return {lo, hi};
}

}  // namespace

void EnergyTemplate::validate() const {
  if (counts.size() == 0) throw DataError("template '" + name + "' is empty");
  if (edges_kev.size() != counts.size() + 1) {
    throw DataError("template '" + name + "' needs one more edge than bins");
  }
  for (Eigen::Index i = 1; i < edges_kev.size(); ++i) {
    if (!(edges_kev[i] > edges_kev[i - 1])) {
      throw DataError("template '" + name + "' edges must increase");
    }
  }
  if (!(counts >= 0).all()) throw DataError("template '" + name + "' has negative counts");
}

Eigen::ArrayXd EnergyTemplate::centres() const {
  const Eigen::Index n = counts.size();
  return 0.5 * (edges_kev.head(n) + edges_kev.tail(n));
}

Eigen::ArrayXd smear_template(const EnergyTemplate& tmpl, const SpectrumModel& model,
                              Eigen::Index n_channels, double weight) {
  tmpl.validate();
  if (n_channels < 1) throw ContractViolation("smear_template: need at least one channel");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n_channels);
  if (!smear_into(tmpl, model, weight, out)) {
    throw ContractViolation("smear_template: resolution variance is not positive over template '" +
                            tmpl.name + "'");
  }
  return out;
}

Eigen::ArrayXd spectrum_prediction(const std::vector<EnergyTemplate>& templates,
                                   const SpectrumModel& model, Eigen::Index n_channels) {
  if (model.weights.size() != templates.size()) {
    throw ContractViolation("spectrum model needs one weight per template");
  }
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n_channels);
  for (std::size_t i = 0; i < templates.size(); ++i) {
    out += smear_template(templates[i], model, n_channels, model.weights[i]);
  }
  return out;
}

FitResult fit_spectrum_range(const Eigen::ArrayXd& measured,
                             const std::vector<EnergyTemplate>& templates,
                             const SpectrumModel& initial, EnergyRange range,
                             const LsqOptions& options) {
  if (templates.empty()) throw DataError("fit_spectrum: no templates");
  for (const auto& t : templates) t.validate();
  const Eigen::Index n_ch = measured.size();
  if (n_ch < 2) throw DataError("fit_spectrum: histogram is empty");
  if (!(range.hi_kev > range.lo_kev)) throw ContractViolation("fit_spectrum: empty energy range");

  const auto [lo, hi] = channel_window(initial, range, n_ch);
  const Eigen::Index m = hi - lo + 1;
  const std::size_t k = templates.size();
  if (m < static_cast<Eigen::Index>(6 + k)) {
    throw DataError("fit_spectrum: range covers too few channels for the model");
  }
  const Eigen::ArrayXd data = measured.segment(lo, m);
  const Eigen::ArrayXd sigma = data.max(1.0).sqrt();

  // Linear estimate of the weights under the starting calibration.
  std::vector<double> w0 = initial.weights;
  if (w0.size() != k) {
    Eigen::MatrixXd design(m, static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      design.col(static_cast<Eigen::Index>(i)) =
          (smear_template(templates[i], initial, n_ch).segment(lo, m) / sigma).matrix();
    }
    const Eigen::VectorXd sol =
        design.colPivHouseholderQr().solve((data / sigma).matrix());
    const double floor = 1e-3 * std::max(sol.cwiseAbs().maxCoeff(), 1e-12);
    w0.resize(k);
    for (std::size_t i = 0; i < k; ++i) w0[i] = std::max(sol[static_cast<Eigen::Index>(i)], floor);
  }

  LsqProblem problem;
  problem.names = parameter_names(templates);
  problem.domains = {ParamDomain::free, ParamDomain::positive, ParamDomain::free,
                     ParamDomain::positive, ParamDomain::free, ParamDomain::free};
  problem.domains.insert(problem.domains.end(), k, ParamDomain::nonnegative);
  problem.initial.resize(static_cast<Eigen::Index>(6 + k));
  problem.initial << initial.c0, initial.c1, initial.c2, initial.var0, initial.var1, initial.var2,
      Eigen::Map<const Eigen::VectorXd>(w0.data(), static_cast<Eigen::Index>(k));
  problem.n_residuals = m;
  problem.absolute_sigma = true;
  problem.residuals = [&, lo = lo, m = m](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const SpectrumModel model = unpack(p, k);
    Eigen::ArrayXd pred = Eigen::ArrayXd::Zero(n_ch);
    for (std::size_t i = 0; i < k; ++i) {
      if (!smear_into(templates[i], model, model.weights[i], pred)) {
        r.setConstant(1e150);
        return;
      }
    }
    r = ((pred.segment(lo, m) - data) / sigma).matrix();
  };
  return solve_least_squares(problem, options);
}

SpectrumFitReport fit_spectrum(const Eigen::ArrayXd& measured,
                               const std::vector<EnergyTemplate>& templates,
                               const SpectrumModel& initial, const SpectrumFitOptions& options) {
  if (templates.size() < 3) throw DataError("fit_spectrum: need at least 3 templates");
  if (options.ranges.empty()) throw ContractViolation("fit_spectrum: no fit ranges");
  SpectrumFitReport report;

  // Degeneracy check on the smeared templates under the starting model.
  const Eigen::Index n_ch = measured.size();
  std::vector<Eigen::ArrayXd> shapes;
  for (const auto& t : templates) shapes.push_back(smear_template(t, initial, n_ch));
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    for (std::size_t j = i + 1; j < shapes.size(); ++j) {
      const double denom = shapes[i].matrix().norm() * shapes[j].matrix().norm();
      const double cosine = denom > 0 ? shapes[i].matrix().dot(shapes[j].matrix()) / denom : 1.0;
      if (cosine > options.degeneracy_cosine) {
        std::ostringstream msg;
        msg << "templates '" << templates[i].name << "' and '" << templates[j].name
            << "' are nearly degenerate (cosine " << cosine << "); weights are ill-conditioned";
        report.warnings.push_back(msg.str());
      }
    }
  }

  const auto k = static_cast<Eigen::Index>(templates.size());
  Eigen::VectorXd wmin = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  Eigen::VectorXd wmax = -wmin;
  for (const auto& range : options.ranges) {
    FitResult fit = fit_spectrum_range(measured, templates, initial, range, options.lsq);
    if (!fit.converged) {
      std::ostringstream msg;
      msg << "fit over " << range.lo_kev << "-" << range.hi_kev << " keV did not converge: "
          << fit.message;
      report.warnings.push_back(msg.str());
    }
    const Eigen::VectorXd w = fit.values.tail(k);
    wmin = wmin.cwiseMin(w);
    wmax = wmax.cwiseMax(w);
    report.fits.push_back({range, std::move(fit)});
  }
  report.weight_spread = wmax - wmin;
  return report;
}

}  // namespace qprad
