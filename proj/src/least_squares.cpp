#include "shotnoise/least_squares.hpp"

#include <algorithm>
#include <cmath>

namespace shotnoise {

namespace {

Eigen::MatrixXd jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& r0, const LsqOptions& opts,
                         const std::vector<bool>& is_frozen) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(r0.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd xp = x;
  const bool bounded = opts.lower.size() == n && opts.upper.size() == n;
  for (int j = 0; j < n; ++j) {
    if (is_frozen[j]) continue;
    const double h = opts.jac_rel_step * std::max(std::abs(x[j]), 1e-3);
    double hi = h, lo = h;
    if (bounded) {
      // stay inside the box; fall back to one-sided at an active bound
      if (x[j] + hi > opts.upper[j]) hi = std::max(0.0, opts.upper[j] - x[j]);
      if (x[j] - lo < opts.lower[j]) lo = std::max(0.0, x[j] - opts.lower[j]);
    }
    if (hi + lo == 0.0) continue;
    xp[j] = x[j] + hi;
    const Eigen::VectorXd rp = fn(xp);
    xp[j] = x[j] - lo;
    const Eigen::VectorXd rm = fn(xp);
    xp[j] = x[j];
    jac.col(j) = (rp - rm) / (hi + lo);
  }
  return jac;
}

}  // namespace

LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x,
                              const LsqOptions& opts) {
  const int n = static_cast<int>(x.size());
  const bool bounded = opts.lower.size() == n && opts.upper.size() == n;
  std::vector<bool> is_frozen(n, false);
  for (int j : opts.frozen) is_frozen[j] = true;

  auto clamp = [&](Eigen::VectorXd& v) {
    if (!bounded) return;
    for (int j = 0; j < n; ++j) v[j] = std::clamp(v[j], opts.lower[j], opts.upper[j]);
  };
  clamp(x);

  LsqResult out;
  Eigen::VectorXd r = fn(x);
  out.n_residuals = static_cast<int>(r.size());
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  int consecutive_fail = 0;
  std::string stop = "max iterations reached";
  bool converged = false;

  Eigen::MatrixXd jac;
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it + 1;
    jac = jacobian(fn, x, r, opts, is_frozen);
    Eigen::VectorXd g = jac.transpose() * r;  // gradient/2
    // peg parameters sitting on a bound with the gradient pushing outward
    std::vector<bool> pegged(n, false);
    if (bounded) {
      for (int j = 0; j < n; ++j) {
        if (is_frozen[j]) continue;
        if (x[j] <= opts.lower[j] && g[j] > 0) pegged[j] = true;
        if (x[j] >= opts.upper[j] && g[j] < 0) pegged[j] = true;
      }
    }
    std::vector<int> free_idx;
    for (int j = 0; j < n; ++j)
      if (!is_frozen[j] && !pegged[j]) free_idx.push_back(j);
    out.gradient_norm = 0.0;
    for (int j = 0; j < n; ++j)
      if (!is_frozen[j] && !pegged[j])
        out.gradient_norm = std::max(out.gradient_norm, std::abs(g[j]));
    if (out.gradient_norm <= opts.gtol) {
      converged = true;
      stop = "gradient below gtol";
      break;
    }
    if (free_idx.empty()) {
      converged = true;
      stop = "all parameters pegged or frozen";
      break;
    }

    const int nf = static_cast<int>(free_idx.size());
    Eigen::MatrixXd jf(jac.rows(), nf);
    for (int c = 0; c < nf; ++c) jf.col(c) = jac.col(free_idx[c]);
    const Eigen::MatrixXd jtj = jf.transpose() * jf;
    const Eigen::VectorXd gf = jf.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd aug = jtj;
      for (int c = 0; c < nf; ++c)
        aug(c, c) += lambda * std::max(jtj(c, c), 1e-30);
      const Eigen::VectorXd step = aug.ldlt().solve(-gf);

      Eigen::VectorXd x_new = x;
      for (int c = 0; c < nf; ++c) x_new[free_idx[c]] += step[c];
      clamp(x_new);
      const Eigen::VectorXd r_new = fn(x_new);
      const double chi2_new = r_new.squaredNorm();

      const Eigen::VectorXd dx_eff = x_new - x;
      const double predicted =
          -2.0 * gf.dot(step) - (jf * step).squaredNorm();  // model decrease
      const double actual = chi2 - chi2_new;
      const double rho = predicted > 0 ? actual / predicted : (actual > 0 ? 1.0 : -1.0);

      if (chi2_new < chi2) {
        const double dchi = chi2 - chi2_new;
        x = x_new;
        r = r_new;
        chi2 = chi2_new;
        accepted = true;
        consecutive_fail = 0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        lambda = std::max(lambda, 1e-14);
        if (dchi <= opts.ftol * std::max(chi2, 1e-300)) {
          converged = true;
          stop = "chi2 decrease below ftol";
        }
        if (dx_eff.norm() <= opts.xtol * (x.norm() + opts.xtol)) {
          converged = true;
          stop = "step below xtol";
        }
      } else {
        ++consecutive_fail;
        lambda *= 2.0 * consecutive_fail;
        if (lambda > 1e16) {
          converged = chi2 < 1e-280 || out.gradient_norm <= opts.gtol * 1e3;
          stop = "damping exhausted";
          accepted = true;  // leave the retry loop; outer loop will stop
          it = opts.max_iterations;
        }
      }
    }
    if (converged || it >= opts.max_iterations) break;
  }

  out.x = x;
  out.chi2 = chi2;
  out.converged = converged;
  out.message = stop;

  // covariance over non-frozen parameters, scaled by reduced chi2
  r = fn(x);
  jac = jacobian(fn, x, r, opts, is_frozen);
  std::vector<int> free_idx;
  for (int j = 0; j < n; ++j)
    if (!is_frozen[j]) free_idx.push_back(j);
  out.n_free = static_cast<int>(free_idx.size());
  out.covariance = Eigen::MatrixXd::Zero(n, n);
  if (!free_idx.empty()) {
    Eigen::MatrixXd jf(jac.rows(), out.n_free);
    for (int c = 0; c < out.n_free; ++c) jf.col(c) = jac.col(free_idx[c]);
    Eigen::MatrixXd jtj = jf.transpose() * jf;
    const int dof = std::max(1, static_cast<int>(r.size()) - out.n_free);
    const double scale = out.chi2 / dof;
    // guard rank deficiency with a tiny Tikhonov floor
    const double floor = 1e-300;
    for (int c = 0; c < out.n_free; ++c) jtj(c, c) = std::max(jtj(c, c), floor);
    const Eigen::MatrixXd cov_free =
        jtj.ldlt().solve(Eigen::MatrixXd::Identity(out.n_free, out.n_free)) * scale;
    for (int a = 0; a < out.n_free; ++a)
      for (int b = 0; b < out.n_free; ++b)
        out.covariance(free_idx[a], free_idx[b]) = cov_free(a, b);
  }
  return out;
}

}  // namespace shotnoise
