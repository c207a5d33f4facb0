#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) driver shared by every fit.
// Bounded parameters are mapped to an unconstrained internal coordinate;
// covariances and standard errors are always reported for the natural
// parameters.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qprad {

enum class ParamDomain {
  free,         // identity
  positive,     // p = exp(u)
  nonnegative,  // p = u^2, may settle on the boundary
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  Eigen::VectorXd stderr_;
  Eigen::MatrixXd covariance;
  double rss = 0.0;            // sum of squared (weighted) residuals
  Eigen::Index n_points = 0;
  int iterations = 0;
  bool converged = false;
  std::string message;         // empty when converged

  Eigen::Index dof() const { return n_points - static_cast<Eigen::Index>(names.size()); }
  Eigen::Index index_of(const std::string& name) const;
  double value(const std::string& name) const { return values[index_of(name)]; }
  double stderr_of(const std::string& name) const { return stderr_[index_of(name)]; }
};

struct LsqProblem {
  std::vector<std::string> names;
  std::vector<ParamDomain> domains;  // empty: all free
  Eigen::VectorXd initial;           // natural parameters
  Eigen::Index n_residuals = 0;
  // Writes the weighted residuals (model - data) / sigma for natural parameters p.
  std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& residuals)> residuals;
  // true: sigmas are absolute, covariance = (J^T J)^-1. false: scaled by rss / dof.
  bool absolute_sigma = true;
};

struct LsqOptions {
  double xtol = 1e-8;
  double ftol = 1e-12;
  double gtol = 1e-10;
  int max_iterations = 200;
  // Scale-free stationarity test at the optimum (cosine between residual and
  // each Jacobian column in internal coordinates).
  double stationarity_tol = 1e-4;
};

FitResult solve_least_squares(const LsqProblem& problem, const LsqOptions& options = {});

/// Runs solve_least_squares from several starting points and keeps the
/// converged result with the smallest rss (or the smallest rss overall when
/// none converged).
FitResult solve_multistart(LsqProblem problem, const std::vector<Eigen::VectorXd>& starts,
                           const LsqOptions& options = {});

/// Central-difference Jacobian of `fn` at `p`. Parameters flagged in
/// `nonnegative` switch to a forward difference rather than step below zero.
/// Steps too small to register above roundoff are enlarged.
Eigen::MatrixXd numeric_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& p, Eigen::Index n_residuals,
    const std::vector<bool>& nonnegative = {});

}  // namespace qprad
