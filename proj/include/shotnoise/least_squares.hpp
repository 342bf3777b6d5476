#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

// Small dense Levenberg-Marquardt with box constraints (MPFIT-style pegging)
// and central-difference Jacobians. Callers should scale parameters to O(1).
namespace shotnoise {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LsqOptions {
  int max_iterations = 300;
  double ftol = 1e-14;
  double xtol = 1e-14;
  double gtol = 1e-12;
  double jac_rel_step = 1e-6;
  Eigen::VectorXd lower;  // empty = unbounded
  Eigen::VectorXd upper;
  std::vector<int> frozen;  // parameter indices held at x0
};

struct LsqResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 * chi2/dof over free params
  double chi2 = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::string message;
  int n_free = 0;
  int n_residuals = 0;
};

LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0,
                              const LsqOptions& opts = {});

}  // namespace shotnoise
