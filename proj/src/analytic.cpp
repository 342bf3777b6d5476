#include "shotnoise/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "shotnoise/units.hpp"

namespace shotnoise {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

// [cosh(x) - cos(y)] / sinh(x), overflow-free for any x > 0:
// = [expm1(-x)^2 + 4 exp(-x) sin^2(y/2)] / (-expm1(-2x))
double cosh_minus_cos_over_sinh(double x, double y) {
  const double em = std::expm1(-x);
  const double s = std::sin(0.5 * y);
  return (em * em + 4.0 * std::exp(-x) * s * s) / (-std::expm1(-2.0 * x));
}

// 1 / sinh(x) for x > 0
double inv_sinh(double x) {
  return 2.0 * std::exp(-x) / (-std::expm1(-2.0 * x));
}

// tanh(z) without overflow for Re z >= 0
cplx tanh_stable(cplx z) {
  const cplx e = std::exp(-2.0 * z);
  return (1.0 - e) / (1.0 + e);
}

// log(cosh(z) + zeta sinh(z)) up to multiples of 2 pi i (real part exact)
cplx log_cosh_plus_zeta_sinh(cplx z, cplx zeta) {
  const cplx arg = 0.5 * (1.0 + zeta) + 0.5 * (1.0 - zeta) * std::exp(-2.0 * z);
  if (std::abs(arg) < 1e-300)
    throw ConvergenceError(
        "log argument cosh + zeta sinh crossed zero; rate undefined here",
        std::abs(arg), 0);
  return z + std::log(arg);
}

}  // namespace

double reduction_factor_thermal(double dt, const ResonatorQubitParams& params) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("reduction_factor_thermal: dt must be positive");
  const double x = params.kappa * dt;
  const double r = params.two_chi_over_kappa();
  const double ratio = cosh_minus_cos_over_sinh(x, 2.0 * params.chi * dt);
  return 1.0 - ratio / (0.5 * x * (1.0 + r * r));
}

double gamma_thermal_prefactor(double n_th, const ResonatorQubitParams& params) {
  params.validate();
  const double r = params.two_chi_over_kappa();
  return 4.0 * params.chi * params.chi * n_th / (params.kappa * (1.0 + r * r));
}

double gamma_thermal(double dt, double n_th, const ResonatorQubitParams& params) {
  if (n_th < 0.0) throw ConfigError("gamma_thermal: n_th must be nonnegative");
  return gamma_thermal_prefactor(n_th, params) * reduction_factor_thermal(dt, params);
}

double gamma_lowfreq_thermal_exact(double n_th, const ResonatorQubitParams& params) {
  params.validate();
  if (n_th < 0.0) throw ConfigError("gamma_lowfreq_thermal_exact: n_th must be nonnegative");
  const double r = params.two_chi_over_kappa();
  const cplx u = 1.0 - I * r;
  const cplx root = std::sqrt(u * u - 4.0 * I * r * n_th);  // principal, Re >= 0
  return 0.5 * params.kappa * (root.real() - 1.0);
}

ModerateThermalSolution gamma_thermal_moderate(double dt, double n_th,
                                               const ResonatorQubitParams& params) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("gamma_thermal_moderate: dt must be positive");
  if (n_th < 0.0) throw ConfigError("gamma_thermal_moderate: n_th must be nonnegative");

  const double kappa = params.kappa;
  const double chi = params.chi;

  ModerateThermalSolution sol;
  if (chi == 0.0) {
    // no dispersive coupling: stationary thermal variance, zero rate
    sol.v_tp = 0.5 * (2.0 * n_th + 1.0);
    sol.vartheta = 0.5 * kappa;
    sol.zeta = 1.0;
    sol.gamma = 0.0;
    return sol;
  }

  cplx vt = 0.5 * std::sqrt(cplx(kappa * kappa - 4.0 * chi * chi,
                                 -4.0 * chi * kappa * (2.0 * n_th + 1.0)));
  if (vt.real() < 0.0) vt = -vt;
  if (!(vt.real() > 0.0))
    throw ConvergenceError("gamma_thermal_moderate: Re(vartheta) not positive",
                           vt.real(), 0);
  sol.vartheta = vt;

  const cplx tanh_vdt = tanh_stable(vt * dt);
  const auto propagate = [&](cplx v) {
    const cplx z = (kappa - 4.0 * I * chi * v) / (2.0 * vt);
    return (I * vt / (2.0 * chi)) * (tanh_vdt + z) / (1.0 + z * tanh_vdt) -
           I * kappa / (4.0 * chi);
  };
  // fixed point of V -> conj(propagate(V))
  const auto step = [&](cplx v) { return std::conj(propagate(v)); };

  // seed: stationary Riccati root, equal to the vacuum value 1/2 at n_th = 0
  cplx v = (kappa - 2.0 * vt) / (4.0 * I * chi);
  const double tol = 1e-12;
  constexpr int max_iter = 1000;
  double res = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const cplx next = step(v);
    res = std::abs(next - v) / std::max(1.0, std::abs(v));
    if (res < tol) {
      v = next;
      break;
    }
    v = 0.5 * v + 0.5 * next;  // damping 0.5
  }

  if (res >= tol) {
    // 2-D Newton on h(V) = step(V) - V with numeric Jacobian
    for (int nit = 0; nit < 100; ++nit) {
      const cplx h0 = step(v) - v;
      res = std::abs(h0) / std::max(1.0, std::abs(v));
      if (res < tol) break;
      const double d = 1e-8 * std::max(1.0, std::abs(v));
      const cplx hx = (step(v + d) - (v + d) - h0) / d;
      const cplx hy = (step(v + I * d) - (v + I * d) - h0) / d;
      const double a = hx.real(), c = hx.imag();
      const double b = hy.real(), e = hy.imag();
      const double det = a * e - b * c;
      if (det == 0.0) break;
      const double dx = (-h0.real() * e + h0.imag() * b) / det;
      const double dy = (-a * h0.imag() + c * h0.real()) / det;
      v += cplx(dx, dy);
      ++it;
    }
  }
  res = std::abs(step(v) - v) / std::max(1.0, std::abs(v));
  if (res > 1e-10)
    throw ConvergenceError("gamma_thermal_moderate: fixed point did not converge",
                           res, it);

  sol.v_tp = v;
  sol.iterations = it;
  sol.residual = res;
  sol.zeta = (kappa - 4.0 * I * chi * v) / (2.0 * vt);
  sol.gamma = log_cosh_plus_zeta_sinh(vt * dt, sol.zeta).real() / dt - 0.5 * kappa;
  return sol;
}

std::complex<double> CorrelatorSolution::at(double s) const {
  return std::exp(-kappa_minus * s) * (a_tp - steady) + steady;
}

CorrelatorSolution correlator_steady_state(double dt, double n_th,
                                           const ResonatorQubitParams& params) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("correlator_steady_state: dt must be positive");
  CorrelatorSolution sol;
  sol.dt = dt;
  sol.kappa_minus = cplx(params.kappa, -2.0 * params.chi);
  sol.steady = params.kappa * n_th / sol.kappa_minus;
  const double im_inv = 2.0 * params.chi /
                        (params.kappa * params.kappa + 4.0 * params.chi * params.chi);
  // sinh(k dt) e^{-k dt} = (1 - e^{-2 k dt}) / 2
  const double denom = 0.5 * (-std::expm1(-2.0 * params.kappa * dt));
  sol.a_tp = sol.steady - I * params.kappa * n_th * im_inv *
                              std::conj(1.0 - std::exp(-sol.kappa_minus * dt)) / denom;
  return sol;
}

double reduction_factor_coherent(double dt, const ResonatorQubitParams& params) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("reduction_factor_coherent: dt must be positive");
  const double x = 0.5 * params.kappa * dt;
  const double r = params.two_chi_over_kappa();
  const double c = params.chi / params.kappa;
  const double ratio = cosh_minus_cos_over_sinh(x, params.chi * dt);
  const double frac = ratio / (0.25 * params.kappa * dt * (1.0 + r * r));
  const double bracket =
      1.0 + c * std::sin(params.chi * dt) * inv_sinh(x) - 2.0 * c * c;
  return 1.0 - frac * bracket;
}

double gamma_coherent_prefactor(double n_coh, const ResonatorQubitParams& params) {
  params.validate();
  const double r = params.two_chi_over_kappa();
  return 8.0 * params.chi * params.chi * n_coh / (params.kappa * (1.0 + r * r));
}

double gamma_coherent(double dt, double n_coh, const ResonatorQubitParams& params) {
  if (n_coh < 0.0) throw ConfigError("gamma_coherent: n_coh must be nonnegative");
  if (params.delta_omega_d != 0.0)
    throw ConfigError("gamma_coherent: requires delta_omega_d = 0; use gamma_coherent_detuned");
  return gamma_coherent_prefactor(n_coh, params) * reduction_factor_coherent(dt, params);
}

double gamma_coherent_detuned(double dt, std::complex<double> f_dc,
                              double delta_omega_d,
                              const ResonatorQubitParams& params) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("gamma_coherent_detuned: dt must be positive");
  const double kappa = params.kappa;
  const double chi = params.chi;
  const double f2 = std::norm(f_dc);
  if (f2 == 0.0) return 0.0;

  const cplx g0 = cplx(0.5 * kappa, -(delta_omega_d + chi));
  const cplx g1 = cplx(0.5 * kappa, -(delta_omega_d - chi));
  const auto em = [&](cplx g) { return 1.0 - std::exp(-g * dt); };

  const double B =
      (em(g0) * em(g1) * em(std::conj(g0) + std::conj(g1)) / (g1 * dt) +
       em(std::conj(g0)) * em(std::conj(g1)) * em(g0 + g1) / (std::conj(g0) * dt) -
       em(g0) * em(std::conj(g1)) * em(std::conj(g0) + g1) / ((std::conj(g0) + g1) * dt))
          .real();

  // 4/(k dt) [cosh(k dt/2) - cos(chi dt) cos(dw dt)] sinh(k dt/2) e^{-k dt},
  // rewritten with decaying exponentials only (a = k dt / 2):
  //   cosh(a) sinh(a) e^{-2a} = (1 - e^{-4a})/4
  //   sinh(a) e^{-2a}         = (e^{-a} - e^{-3a})/2
  const double a = 0.5 * kappa * dt;
  const double cc = std::cos(chi * dt) * std::cos(delta_omega_d * dt);
  const double hyper = 0.25 * (-std::expm1(-4.0 * a)) -
                       cc * 0.5 * (std::exp(-a) - std::exp(-3.0 * a));
  const double num = B - 4.0 / (kappa * dt) * hyper;
  const double den = 0.5 * (1.0 + std::exp(-4.0 * a)) -
                     std::cos(2.0 * delta_omega_d * dt) * std::exp(-2.0 * a);
  const double reduction = 1.0 - num / den;

  ResonatorQubitParams p = params;
  p.delta_omega_d = delta_omega_d;
  const auto pops = coherent_populations_detuned(p, f_dc);
  return 8.0 * chi * chi * pops.n_qubit0 * pops.n_qubit1 /
         (kappa * pops.n_max) * reduction;
}

// --- filter functions -----------------------------------------------------

FilterFunctionSpec FilterFunctionSpec::cpmg(int n_pulses, double dt) {
  FilterFunctionSpec s;
  s.n_pulses = n_pulses;
  s.dt = dt;
  s.kind = n_pulses == 1 ? SequenceKind::echo
                         : (n_pulses % 2 == 0 ? SequenceKind::cpmg_even
                                              : SequenceKind::cpmg_odd);
  s.validate();
  return s;
}

FilterFunctionSpec FilterFunctionSpec::ramsey_total(double total_time) {
  FilterFunctionSpec s;
  s.kind = SequenceKind::ramsey;
  s.n_pulses = 1;
  s.dt = total_time;
  s.validate();
  return s;
}

void FilterFunctionSpec::validate() const {
  if (!(dt > 0.0)) throw ConfigError("FilterFunctionSpec: dt must be positive");
  if (n_pulses < 1) throw ConfigError("FilterFunctionSpec: n_pulses must be >= 1");
  if (kind == SequenceKind::echo && n_pulses != 1)
    throw ConfigError("FilterFunctionSpec: echo requires n_pulses = 1");
  if (kind == SequenceKind::cpmg_even && n_pulses % 2 != 0)
    throw ConfigError("FilterFunctionSpec: cpmg_even requires even n_pulses");
  if (kind == SequenceKind::cpmg_odd && (n_pulses % 2 == 0 || n_pulses < 3))
    throw ConfigError("FilterFunctionSpec: cpmg_odd requires odd n_pulses >= 3");
}

namespace {

// sin(N u)/cos(u) for even N as 2[sin((N-1)u) - sin((N-3)u) + ...]; exact at
// the zeros of cos(u), where the plain ratio is 0/0.
double sin_over_cos_even(double u, int n) {
  double s = 0.0;
  double sign = 1.0;
  for (int j = n - 1; j >= 1; j -= 2) {
    s += sign * std::sin(j * u);
    sign = -sign;
  }
  return 2.0 * s;
}

// cos(N u)/cos(u) for odd N as 2[cos((N-1)u) - cos((N-3)u) + ...] +- 1
double cos_over_cos_odd(double u, int n) {
  double s = 0.0;
  double sign = 1.0;
  for (int j = n - 1; j >= 2; j -= 2) {
    s += sign * std::cos(j * u);
    sign = -sign;
  }
  return 2.0 * s + sign;
}

}  // namespace

double filter_function(const FilterFunctionSpec& spec, double omega) {
  spec.validate();
  if (!(omega > 0.0)) throw ConfigError("filter_function: omega must be positive");
  const double w2 = omega * omega;
  switch (spec.kind) {
    case SequenceKind::ramsey: {
      const double s = std::sin(0.5 * omega * spec.total_time());
      return 2.0 * s * s / w2;
    }
    case SequenceKind::echo: {
      const double s = std::sin(0.25 * omega * spec.dt);
      const double s2 = s * s;
      return 8.0 * s2 * s2 / w2;
    }
    case SequenceKind::cpmg_even: {
      const double u = 0.5 * omega * spec.dt;
      const double s = std::sin(0.5 * u);
      const double s2 = s * s;
      const double g = sin_over_cos_even(u, spec.n_pulses);
      return 8.0 * s2 * s2 * g * g / w2;
    }
    case SequenceKind::cpmg_odd: {
      const double u = 0.5 * omega * spec.dt;
      const double s = std::sin(0.5 * u);
      const double s2 = s * s;
      const double g = cos_over_cos_odd(u, spec.n_pulses);
      return 8.0 * s2 * s2 * g * g / w2;
    }
  }
  return 0.0;
}

double photon_noise_spectral_density(double omega, double population,
                                     const ResonatorQubitParams& params,
                                     FilterNoiseKind kind) {
  params.validate();
  const double chi2 = params.chi * params.chi;
  if (kind == FilterNoiseKind::thermal)
    return 16.0 * chi2 * params.kappa * population /
           (params.kappa * params.kappa + omega * omega);
  const double hk = 0.5 * params.kappa;
  return 8.0 * chi2 * params.kappa * population / (hk * hk + omega * omega);
}

double gamma_filterfunction(double dt, double population,
                            const ResonatorQubitParams& params,
                            FilterNoiseKind kind) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("gamma_filterfunction: dt must be positive");
  if (population < 0.0) throw ConfigError("gamma_filterfunction: population must be nonnegative");
  const double chi2 = params.chi * params.chi;
  if (kind == FilterNoiseKind::thermal) {
    const double x = 0.5 * params.kappa * dt;
    return 4.0 * chi2 * population / params.kappa * (1.0 - std::tanh(x) / x);
  }
  const double x = 0.25 * params.kappa * dt;
  return 8.0 * chi2 * population / params.kappa * (1.0 - std::tanh(x) / x);
}

double gamma_filterfunction_harmonic_sum(double dt, double population,
                                         const ResonatorQubitParams& params,
                                         FilterNoiseKind kind) {
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("gamma_filterfunction_harmonic_sum: dt must be positive");
  const double f_s = 1.0 / (2.0 * dt);
  double total = 0.0;
  for (int m = 0;; ++m) {
    const double odd = 2.0 * m + 1.0;
    const double w = units::two_pi * odd * f_s;
    const double term =
        2.0 / (std::numbers::pi * std::numbers::pi) *
        photon_noise_spectral_density(w, population, params, kind) / (odd * odd);
    total += term;
    if (m >= 4 && term < 1e-12 * total) break;
    if (m > 100000000) break;
  }
  return total;
}

double gamma_filterfunction_lowfreq_corrected(double dt, double population,
                                              const ResonatorQubitParams& params,
                                              FilterNoiseKind kind) {
  const double r = params.two_chi_over_kappa();
  return gamma_filterfunction(dt, population, params, kind) / (1.0 + r * r);
}

}  // namespace shotnoise
