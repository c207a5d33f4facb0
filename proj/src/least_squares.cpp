#include "qprad/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "qprad/errors.hpp"

namespace qprad {

namespace {

double to_natural(ParamDomain d, double u) {
  switch (d) {
    case ParamDomain::positive: return std::exp(u);
    case ParamDomain::nonnegative: return u * u;
    case ParamDomain::free: break;
  }
  return u;
}

double to_internal(ParamDomain d, double p) {
  switch (d) {
    case ParamDomain::positive:
      if (!(p > 0)) throw ContractViolation("initial value of a positive parameter must be > 0");
      return std::log(p);
    case ParamDomain::nonnegative:
      if (!(p >= 0)) throw ContractViolation("initial value of a nonnegative parameter must be >= 0");
      return std::sqrt(p);
    case ParamDomain::free: break;
  }
  return p;
}

struct InternalFunctor : Eigen::DenseFunctor<double> {
  const LsqProblem* problem;
  std::vector<ParamDomain> domains;
  std::vector<bool> reject_negative;  // free coordinates that must stay >= 0

  InternalFunctor(const LsqProblem& pr, std::vector<ParamDomain> d, std::vector<bool> reject = {})
      : Eigen::DenseFunctor<double>(static_cast<int>(pr.initial.size()),
                                    static_cast<int>(pr.n_residuals)),
        problem(&pr),
        domains(std::move(d)),
        reject_negative(std::move(reject)) {}

  Eigen::VectorXd natural(const Eigen::VectorXd& u) const {
    Eigen::VectorXd p(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) p[i] = to_natural(domains[i], u[i]);
    return p;
  }

  int operator()(const Eigen::VectorXd& u, Eigen::VectorXd& fvec) const {
    fvec.resize(values());
    for (std::size_t j = 0; j < reject_negative.size(); ++j) {
      if (reject_negative[j] && u[static_cast<Eigen::Index>(j)] < 0) {
        fvec.setConstant(1e150);
        return 0;
      }
    }
    problem->residuals(natural(u), fvec);
    for (Eigen::Index i = 0; i < fvec.size(); ++i) {
      if (!std::isfinite(fvec[i])) fvec[i] = 1e150;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& u, Eigen::MatrixXd& fjac) const {
    fjac = numeric_jacobian([this](const Eigen::VectorXd& x, Eigen::VectorXd& f) { (*this)(x, f); },
                            u, values(), reject_negative);
    return 0;
  }
};

}  // namespace

Eigen::Index FitResult::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw ContractViolation("fit has no parameter named '" + name + "'");
}

Eigen::MatrixXd numeric_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& p, Eigen::Index n_residuals, const std::vector<bool>& nonnegative) {
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::MatrixXd jac(n_residuals, p.size());
  Eigen::VectorXd plus(n_residuals), minus(n_residuals);
  Eigen::VectorXd x = p;
  const double roundoff = 1e3 * std::numeric_limits<double>::epsilon();
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const bool bounded = static_cast<std::size_t>(j) < nonnegative.size() &&
                         nonnegative[static_cast<std::size_t>(j)];
    double h = eps * (p[j] != 0 ? std::abs(p[j]) : 1e-3);
    bool forward = false;
    // A relative step on a tiny value can vanish in the residuals' roundoff.
    for (int attempt = 0;; ++attempt) {
      forward = bounded && p[j] - h < 0;
      x[j] = p[j] + h;
      fn(x, plus);
      x[j] = forward ? p[j] : p[j] - h;
      fn(x, minus);
      x[j] = p[j];
      const double scale = std::max(plus.norm(), minus.norm());
      if (attempt == 4 || (plus - minus).norm() > roundoff * scale || scale == 0) break;
      h *= 1e3;
    }
    jac.col(j) = (plus - minus) / (forward ? h : 2.0 * h);
  }
  return jac;
}

FitResult solve_least_squares(const LsqProblem& problem, const LsqOptions& options) {
  const Eigen::Index n_par = problem.initial.size();
  if (n_par == 0) throw ContractViolation("least squares problem has no parameters");
  if (static_cast<Eigen::Index>(problem.names.size()) != n_par) {
    throw ContractViolation("parameter names and initial values differ in length");
  }
  if (problem.n_residuals < n_par) {
    throw DataError("fewer data points (" + std::to_string(problem.n_residuals) +
                    ") than parameters (" + std::to_string(n_par) + ")");
  }
  std::vector<ParamDomain> domains = problem.domains;
  if (domains.empty()) domains.assign(static_cast<std::size_t>(n_par), ParamDomain::free);

  InternalFunctor functor(problem, domains);
  Eigen::VectorXd u(n_par);
  for (Eigen::Index i = 0; i < n_par; ++i) u[i] = to_internal(domains[i], problem.initial[i]);

  auto run_lm_with = [&](InternalFunctor& fn, Eigen::VectorXd& start, int& iterations) {
    Eigen::LevenbergMarquardt<InternalFunctor> lm(fn);
    lm.setXtol(options.xtol);
    lm.setFtol(options.ftol);
    lm.setGtol(options.gtol);
    lm.setMaxfev(50 * options.max_iterations);
    auto st = lm.minimizeInit(start);
    iterations = 0;
    while (st == Eigen::LevenbergMarquardtSpace::Running || st == Eigen::LevenbergMarquardtSpace::NotStarted) {
      if (iterations >= options.max_iterations) break;
      st = lm.minimizeOneStep(start);
      ++iterations;
    }
    return st;
  };
  auto run_lm = [&](Eigen::VectorXd& start, int& iterations) { return run_lm_with(functor, start, iterations); };
  auto rss_at = [&](const Eigen::VectorXd& uu) {
    Eigen::VectorXd f(problem.n_residuals);
    functor(uu, f);
    return f.squaredNorm();
  };

  // Scale-free stationarity: cosine between residual and each Jacobian column,
  // falling back to a negligible Gauss-Newton step when residuals are at the
  // roundoff floor. Also returns the half-gradient J^T r.
  auto stationarity = [&](const Eigen::VectorXd& uu) {
    Eigen::VectorXd rr(problem.n_residuals);
    functor(uu, rr);
    Eigen::MatrixXd ju;
    functor.df(uu, ju);
    const Eigen::VectorXd cn = ju.colwise().norm().transpose().cwiseMax(1e-300);
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n_par);
    if (ju.allFinite()) {
      step = cn.cwiseInverse().asDiagonal() *
             (ju * cn.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(rr);
    }
    bool ok = true;
    const double rnorm = rr.norm();
    if (rnorm > 0) {
      for (Eigen::Index j = 0; j < n_par; ++j) {
        if (ju.col(j).norm() == 0) continue;
        if (std::abs(ju.col(j).dot(rr)) / (cn[j] * rnorm) > options.stationarity_tol) ok = false;
      }
    }
    if (!ok) ok = (step.array().abs() <= 1e-6 * uu.array().abs().max(1.0)).all();
    return std::pair{ok, Eigen::VectorXd(ju.transpose() * rr)};
  };

  int iterations = 0;
  auto status = run_lm(u, iterations);
  auto [stationary, grad] = stationarity(u);

  // Minima on the boundary of a nonnegative parameter are approached only
  // linearly in the squared coordinate; retry with such a parameter pinned at 0.
  if (!stationary) {
    for (Eigen::Index j = 0; j < n_par; ++j) {
      if (domains[static_cast<std::size_t>(j)] != ParamDomain::nonnegative || u[j] == 0) continue;
      if (grad[j] * u[j] <= 0) continue;  // descent does not head for the boundary
      Eigen::VectorXd pinned = u;
      pinned[j] = 0;
      int extra = 0;
      const auto st = run_lm(pinned, extra);
      if (pinned.allFinite() && rss_at(pinned) <= rss_at(u)) {
        u = pinned;
        status = st;
        iterations += extra;
      }
    }
    std::tie(stationary, grad) = stationarity(u);
  }

  // The squared coordinate also crawls towards interior minima that sit close
  // to zero. Polish with such parameters free (negative values rejected).
  if (!stationary) {
    std::vector<ParamDomain> relaxed = domains;
    std::vector<bool> reject(static_cast<std::size_t>(n_par), false);
    Eigen::VectorXd v = u;
    bool any = false;
    for (Eigen::Index j = 0; j < n_par; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (domains[jj] != ParamDomain::nonnegative || u[j] == 0) continue;
      relaxed[jj] = ParamDomain::free;
      reject[jj] = true;
      v[j] = u[j] * u[j];
      any = true;
    }
    if (any) {
      InternalFunctor polish(problem, relaxed, reject);
      int extra = 0;
      const auto st = run_lm_with(polish, v, extra);
      Eigen::VectorXd back = v;
      for (Eigen::Index j = 0; j < n_par; ++j) {
        if (reject[static_cast<std::size_t>(j)]) back[j] = std::sqrt(std::max(v[j], 0.0));
      }
      if (back.allFinite() && rss_at(back) <= rss_at(u)) {
        u = back;
        status = st;
        iterations += extra;
        std::tie(stationary, grad) = stationarity(u);
      }
    }
  }

  FitResult out;
  out.names = problem.names;
  out.values = functor.natural(u);
  out.n_points = problem.n_residuals;
  out.iterations = iterations;

  Eigen::VectorXd r(problem.n_residuals);
  problem.residuals(out.values, r);
  out.rss = r.squaredNorm();

  const bool finite = out.values.allFinite() && std::isfinite(out.rss);
  const bool lm_ok = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                     status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;

  // Covariance in natural coordinates.
  std::vector<bool> bounded(static_cast<std::size_t>(n_par), false);
  for (Eigen::Index j = 0; j < n_par; ++j) {
    bounded[static_cast<std::size_t>(j)] = domains[static_cast<std::size_t>(j)] != ParamDomain::free;
  }
  const Eigen::MatrixXd jn = numeric_jacobian(problem.residuals, out.values, problem.n_residuals, bounded);
  // Equilibrate columns so parameters of very different magnitude do not
  // masquerade as rank deficiency.
  const Eigen::VectorXd col_norm = jn.colwise().norm().transpose();
  bool full_rank = (col_norm.array() > 0).all() && col_norm.allFinite();
  Eigen::MatrixXd js = jn;
  if (full_rank) {
    js = jn * col_norm.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(js);
    qr.setThreshold(1e-10);
    full_rank = qr.rank() == n_par;
  }
  out.covariance = Eigen::MatrixXd::Constant(n_par, n_par, std::numeric_limits<double>::quiet_NaN());
  if (full_rank) {
    const Eigen::MatrixXd inv_s =
        (js.transpose() * js).ldlt().solve(Eigen::MatrixXd::Identity(n_par, n_par));
    out.covariance = col_norm.cwiseInverse().asDiagonal() * inv_s * col_norm.cwiseInverse().asDiagonal();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    if (!problem.absolute_sigma && out.dof() > 0) {
      out.covariance *= out.rss / static_cast<double>(out.dof());
    }
  }
  out.stderr_ = out.covariance.diagonal().cwiseAbs().cwiseSqrt();

  if (!finite) {
    out.message = "non-finite parameters or residuals";
  } else if (!full_rank) {
    out.message = "rank-deficient Jacobian; parameters not identifiable";
  } else if (!lm_ok && iterations >= options.max_iterations) {
    out.message = "iteration limit reached";
  } else if (!lm_ok && status != Eigen::LevenbergMarquardtSpace::Running) {
    out.message = "optimizer stopped with status " + std::to_string(static_cast<int>(status));
  } else if (!stationary) {
    out.message = "gradient not zero at the returned point";
  }
  out.converged = out.message.empty();
  return out;
}

FitResult solve_multistart(LsqProblem problem, const std::vector<Eigen::VectorXd>& starts,
                           const LsqOptions& options) {
  if (starts.empty()) throw ContractViolation("multi-start needs at least one starting point");
  FitResult best;
  bool have = false;
  for (const auto& start : starts) {
    problem.initial = start;
    FitResult fit = solve_least_squares(problem, options);
    const bool better = !have || (fit.converged && !best.converged) ||
                        (fit.converged == best.converged && fit.rss < best.rss);
    if (better) {
      best = std::move(fit);
      have = true;
    }
  }
  return best;
}

}  // namespace qprad
