#include "qprad/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "qprad/errors.hpp"

namespace qprad {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_same_length(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, const char* what) {
  if (a.size() != b.size()) {
    throw DataError(std::string(what) + ": column lengths differ (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
}

Eigen::ArrayXd weights_or_ones(const Eigen::ArrayXd& sigma, Eigen::Index n, const char* what) {
  if (sigma.size() == 0) return Eigen::ArrayXd::Ones(n);
  if (sigma.size() != n) throw DataError(std::string(what) + ": sigma column has wrong length");
  if (!(sigma > 0).all()) throw DataError(std::string(what) + ": sigma must be positive");
  return sigma;
}

FitResult unidentifiable(std::vector<std::string> names, Eigen::VectorXd values, Eigen::Index n,
                         std::string why) {
  FitResult out;
  const auto k = static_cast<Eigen::Index>(names.size());
  out.names = std::move(names);
  out.values = std::move(values);
  out.stderr_ = Eigen::VectorXd::Constant(k, nan);
  out.covariance = Eigen::MatrixXd::Constant(k, k, nan);
  out.n_points = n;
  out.converged = false;
  out.message = std::move(why);
  return out;
}

struct ExpSeed {
  double rate = 0;
  double amplitude = 0;
  double offset = 0;
  bool ok = false;
};

// Log-linear regression on offset-subtracted data. Handles rising and
// falling curves.
ExpSeed seed_exponential(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y) {
  ExpSeed seed;
  const double lo = y.minCoeff();
  const double hi = y.maxCoeff();
  const double range = hi - lo;
  if (!(range > 0)) return seed;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(t.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return t[i] < t[j]; });
  const std::size_t q = std::max<std::size_t>(1, order.size() / 4);
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < q; ++i) {
    head += y[order[i]];
    tail += y[order[order.size() - 1 - i]];
  }
  const double sign = head >= tail ? 1.0 : -1.0;
  const double c0 = sign > 0 ? lo - 0.01 * range : hi + 0.01 * range;

  double st = 0, sz = 0, stt = 0, stz = 0;
  int m = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double d = sign * (y[i] - c0);
    if (d <= 0) continue;
    const double z = std::log(d);
    st += t[i];
    sz += z;
    stt += t[i] * t[i];
    stz += t[i] * z;
    ++m;
  }
  const double den = m * stt - st * st;
  if (m < 2 || !(den > 0)) return seed;
  const double slope = (m * stz - st * sz) / den;
  const double intercept = (sz - slope * st) / m;
  if (!(slope < 0)) return seed;
  seed.rate = -slope;
  seed.amplitude = sign * std::exp(intercept);
  seed.offset = c0;
  seed.ok = true;
  return seed;
}

}  // namespace

FitResult fit_exponential(const Eigen::ArrayXd& t, const Eigen::ArrayXd& population,
                          const Eigen::ArrayXd& sigma, const LsqOptions& options) {
  check_same_length(t, population, "fit_exponential");
  const Eigen::Index n = t.size();
  if (n < 3) throw DataError("fit_exponential: need at least 3 points");
  const Eigen::ArrayXd w = weights_or_ones(sigma, n, "fit_exponential");
  std::vector<std::string> names{"gamma1", "amplitude", "offset"};

  const ExpSeed seed = seed_exponential(t, population);
  if (!seed.ok || seed.amplitude <= 0) {
    Eigen::VectorXd v(3);
    v << nan, 0.0, population.mean();
    return unidentifiable(std::move(names), v, n, "data do not decay");
  }

  LsqProblem problem;
  problem.names = names;
  problem.domains = {ParamDomain::positive, ParamDomain::free, ParamDomain::free};
  problem.n_residuals = n;
  problem.absolute_sigma = sigma.size() != 0;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r = ((p[1] * (-p[0] * t).exp() + p[2] - population) / w).matrix();
  };

  std::vector<Eigen::VectorXd> starts;
  for (double scale : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd s(3);
    s << seed.rate * scale, seed.amplitude, seed.offset;
    starts.push_back(s);
  }
  Eigen::VectorXd zero_offset(3);
  zero_offset << seed.rate, population.maxCoeff(), 0.0;
  starts.push_back(zero_offset);
  return solve_multistart(problem, starts, options);
}

FitResult fit_power_law_model(const Eigen::ArrayXd& power, const Eigen::ArrayXd& gamma1,
                              const Eigen::ArrayXd& sigma, double omega_q,
                              const PowerLawFitOptions& options) {
  check_same_length(power, gamma1, "fit_power_law_model");
  const Eigen::Index n = power.size();
  if (n < 3) throw DataError("fit_power_law_model: need at least 3 points");
  if (!(power > 0).all()) throw DataError("fit_power_law_model: power densities must be > 0");
  if (!(omega_q > 0)) throw ContractViolation("fit_power_law_model: omega must be > 0");
  const Eigen::ArrayXd w = weights_or_ones(sigma, n, "fit_power_law_model");
  const Eigen::ArrayXd root = (omega_q * power).sqrt();

  LsqProblem problem;
  problem.n_residuals = n;
  problem.absolute_sigma = sigma.size() != 0;
  const bool fixed = options.fix_gamma_other_zero;
  if (fixed) {
    problem.names = {"a"};
    problem.domains = {ParamDomain::positive};
    problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
      r = ((p[0] * root - gamma1) / w).matrix();
    };
  } else {
    problem.names = {"a", "gamma_other"};
    problem.domains = {ParamDomain::positive, ParamDomain::free};
    problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
      r = ((p[0] * root + p[1] - gamma1) / w).matrix();
    };
  }

  std::vector<Eigen::VectorXd> starts;
  const int k = std::max(options.a_grid_points, 1);
  for (int i = 0; i < k; ++i) {
    const double e = k == 1 ? -2.0 : -4.0 + 3.0 * i / (k - 1);
    Eigen::VectorXd s(fixed ? 1 : 2);
    s[0] = std::pow(10.0, e);
    if (!fixed) s[1] = 0.0;
    starts.push_back(s);
  }
  FitResult fit = solve_multistart(problem, starts, options.lsq);

  const std::set<double> distinct(power.begin(), power.end());
  if (distinct.size() < 3 && fit.converged) {
    fit.converged = false;
    fit.message = "fewer than 3 distinct power values; rank-deficient design";
  }
  if (fixed) {
    // Report gamma_other as a pinned parameter so both variants share a schema.
    fit.names.push_back("gamma_other");
    fit.values.conservativeResize(2);
    fit.values[1] = 0.0;
    fit.stderr_.conservativeResize(2);
    fit.stderr_[1] = 0.0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = fit.covariance(0, 0);
    fit.covariance = cov;
  }
  return fit;
}

std::string to_string(InjectionModel model) {
  switch (model) {
    case InjectionModel::full: return "full";
    case InjectionModel::recombination: return "recombination";
    case InjectionModel::recombination_no_other: return "recombination_no_gamma_other";
    case InjectionModel::trapping: return "trapping";
    case InjectionModel::trapping_no_other: return "trapping_no_gamma_other";
  }
  return "unknown";
}

std::vector<InjectionFit> fit_injection(const Eigen::ArrayXd& t, const Eigen::ArrayXd& gamma1,
                                        const Eigen::ArrayXd& sigma,
                                        const QubitParams<double>& qubit,
                                        const LsqOptions& options) {
  check_same_length(t, gamma1, "fit_injection");
  const Eigen::Index n = t.size();
  if (n < 6) throw DataError("fit_injection: need at least 6 delay points");
  if (!(t >= 0).all()) throw DataError("fit_injection: delays must be >= 0");
  qubit.validate();
  const Eigen::ArrayXd w = weights_or_ones(sigma, n, "fit_injection");
  const double coupling = qp_coupling(qubit.omega_q, qubit.sc);

  // Starting values from the first point and the half-decay time of the excess.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return t[i] < t[j]; });
  auto initial_guess = [&](double other) {
    const double e0 = gamma1[order.front()] - other;
    double t_half = t[order.back()] - t[order.front()];
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (gamma1[order[k]] - other <= 0.5 * e0) {
        t_half = std::max(t[order[k]] - t[order.front()], 1e-12);
        break;
      }
    }
    const double x0 = std::max(e0, 1e-12) / coupling;
    return std::array<double, 3>{x0, 1.0 / (x0 * t_half), std::log(2.0) / t_half};
  };
  const double other0 = gamma1.minCoeff();

  const InjectionModel models[] = {InjectionModel::full, InjectionModel::recombination,
                                   InjectionModel::recombination_no_other,
                                   InjectionModel::trapping, InjectionModel::trapping_no_other};
  std::vector<InjectionFit> fits;
  for (InjectionModel model : models) {
    const bool has_r = model != InjectionModel::trapping && model != InjectionModel::trapping_no_other;
    const bool has_s = model == InjectionModel::full || model == InjectionModel::trapping ||
                       model == InjectionModel::trapping_no_other;
    const bool has_other = model == InjectionModel::full || model == InjectionModel::recombination ||
                           model == InjectionModel::trapping;

    LsqProblem problem;
    problem.n_residuals = n;
    problem.absolute_sigma = sigma.size() != 0;
    problem.names.push_back("x0");
    problem.domains.push_back(ParamDomain::positive);
    if (has_r) {
      problem.names.push_back("r");
      problem.domains.push_back(ParamDomain::positive);
    }
    if (has_s) {
      problem.names.push_back("s");
      problem.domains.push_back(model == InjectionModel::full ? ParamDomain::nonnegative
                                                              : ParamDomain::positive);
    }
    if (has_other) {
      problem.names.push_back("gamma_other");
      problem.domains.push_back(ParamDomain::free);
    }
    const auto k = static_cast<Eigen::Index>(problem.names.size());

    auto unpack = [=](const Eigen::VectorXd& p) {
      Eigen::Index i = 0;
      const double x0 = p[i++];
      const double r = has_r ? p[i++] : 0.0;
      const double s = has_s ? p[i++] : 0.0;
      const double other = has_other ? p[i++] : 0.0;
      return std::array<double, 4>{x0, r, s, other};
    };
    problem.residuals = [&, unpack](const Eigen::VectorXd& p, Eigen::VectorXd& res) {
      const auto [x0, r, s, other] = unpack(p);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = evolve_xqp_closed(QpState<double>{x0}, r, s, t[i]).x;
        res[i] = (coupling * x + other - gamma1[i]) / w[i];
      }
    };

    const auto guess = initial_guess(has_other ? other0 : 0.0);
    std::vector<Eigen::VectorXd> starts;
    for (double scale : {1.0, 0.3, 3.0}) {
      for (double s_share : {0.5, 0.05}) {
        Eigen::VectorXd s(k);
        Eigen::Index i = 0;
        s[i++] = guess[0];
        if (has_r) s[i++] = guess[1] * scale * (has_s ? 1.0 - s_share : 1.0);
        if (has_s) s[i++] = guess[2] * scale * (has_r ? s_share : 1.0);
        if (has_other) s[i++] = other0;
        starts.push_back(s);
        if (!(has_r && has_s)) break;
      }
    }
    FitResult fit = solve_multistart(problem, starts, options);

    // Expand to the common (x0, r, s, gamma_other) layout.
    FitResult wide;
    wide.names = {"x0", "r", "s", "gamma_other"};
    wide.values = Eigen::VectorXd::Zero(4);
    wide.stderr_ = Eigen::VectorXd::Zero(4);
    wide.covariance = Eigen::MatrixXd::Zero(4, 4);
    std::vector<Eigen::Index> slot;
    slot.push_back(0);
    if (has_r) slot.push_back(1);
    if (has_s) slot.push_back(2);
    if (has_other) slot.push_back(3);
    for (Eigen::Index a = 0; a < k; ++a) {
      wide.values[slot[a]] = fit.values[a];
      wide.stderr_[slot[a]] = fit.stderr_[a];
      for (Eigen::Index b = 0; b < k; ++b) wide.covariance(slot[a], slot[b]) = fit.covariance(a, b);
    }
    wide.rss = fit.rss;
    wide.n_points = fit.n_points;
    wide.iterations = fit.iterations;
    wide.converged = fit.converged;
    wide.message = fit.message;
    fits.push_back({model, static_cast<int>(k), std::move(wide)});
  }
  std::stable_sort(fits.begin(), fits.end(),
                   [](const InjectionFit& a, const InjectionFit& b) { return a.fit.rss < b.fit.rss; });
  return fits;
}

FitResult fit_halflife(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y, const Eigen::ArrayXd& sigma,
                       const LsqOptions& options) {
  check_same_length(t, y, "fit_halflife");
  const Eigen::Index n = t.size();
  if (n < 4) throw DataError("fit_halflife: need at least 4 points");
  const Eigen::ArrayXd w = weights_or_ones(sigma, n, "fit_halflife");
  std::vector<std::string> names{"t_half", "y_inf", "amplitude"};

  const ExpSeed seed = seed_exponential(t, y);
  if (!seed.ok) {
    Eigen::VectorXd v(3);
    v << nan, y.mean(), 0.0;
    return unidentifiable(std::move(names), v, n, "no exponential trend; half-life unidentifiable");
  }

  LsqProblem problem;
  problem.names = names;
  problem.domains = {ParamDomain::positive, ParamDomain::free, ParamDomain::free};
  problem.n_residuals = n;
  problem.absolute_sigma = sigma.size() != 0;
  problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r = ((p[1] + p[2] * (-std::log(2.0) / p[0] * t).exp() - y) / w).matrix();
  };
  std::vector<Eigen::VectorXd> starts;
  for (double scale : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd s(3);
    s << std::log(2.0) / (seed.rate * scale), seed.offset, seed.amplitude;
    starts.push_back(s);
  }
  return solve_multistart(problem, starts, options);
}

}  // namespace qprad
