#include "shotnoise/types.hpp"

#include <cmath>
#include <limits>

#include "shotnoise/units.hpp"

namespace shotnoise {

void ResonatorQubitParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ConfigError("ResonatorQubitParams: kappa must be positive and finite");
  if (!std::isfinite(chi) || !std::isfinite(delta_omega_d))
    throw ConfigError("ResonatorQubitParams: chi and delta_omega_d must be finite");
}

DriveSpec DriveSpec::thermal(double n) {
  DriveSpec d;
  d.kind = DriveKind::thermal;
  d.n_th = n;
  d.validate();
  return d;
}

DriveSpec DriveSpec::coherent(std::complex<double> f) {
  DriveSpec d;
  d.kind = DriveKind::coherent;
  d.f_dc = f;
  d.validate();
  return d;
}

void DriveSpec::validate() const {
  if (n_th < 0.0 || !std::isfinite(n_th))
    throw ConfigError("DriveSpec: n_th must be nonnegative");
  if (!std::isfinite(f_dc.real()) || !std::isfinite(f_dc.imag()))
    throw ConfigError("DriveSpec: f_dc must be finite");
  if (kind == DriveKind::thermal && std::abs(f_dc) != 0.0)
    throw ConfigError("DriveSpec: thermal drive must have f_dc = 0");
  if (kind == DriveKind::coherent && n_th != 0.0)
    throw ConfigError("DriveSpec: coherent drive must have n_th = 0");
}

std::vector<double> CpmgSchedule::pulse_times() const {
  std::vector<double> t(n_pulses);
  for (int k = 0; k < n_pulses; ++k) t[k] = (k + 0.5) * dt;
  return t;
}

void CpmgSchedule::validate() const {
  if (n_pulses < 1) throw ConfigError("CpmgSchedule: n_pulses must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("CpmgSchedule: dt must be positive");
  if (pulse_duration < 0.0)
    throw ConfigError("CpmgSchedule: pulse_duration must be nonnegative");
  if (pulse_duration >= dt)
    throw ConfigError("CpmgSchedule: pulses overlap (pulse_duration >= dt)");
  if (shape == PulseShape::instantaneous && pulse_duration != 0.0)
    throw ConfigError("CpmgSchedule: instantaneous shape requires pulse_duration = 0");
}

double chi_tilde(const CpmgSchedule& schedule, double chi, double t) {
  // flips at pulse centers (k + 1/2) dt
  const double k = std::floor(t / schedule.dt + 0.5);
  const int flips = static_cast<int>(std::min(k, double(schedule.n_pulses)));
  return (flips % 2 == 0) ? chi : -chi;
}

void CoherenceTrace::validate() const {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (!(p.t > prev)) throw ConfigError("CoherenceTrace: times must be strictly increasing");
    prev = p.t;
    if (!std::isfinite(p.coherence) || p.coherence < 0.0)
      throw ConfigError("CoherenceTrace: coherence must be finite and nonnegative");
    if (p.coherence > 1.0 + 5.0 * p.std_err + 1e-12)
      throw ConfigError("CoherenceTrace: coherence exceeds 1 beyond statistical headroom");
  }
}

void RateCurve::validate() const {
  for (const auto& p : points) {
    if (!(p.f_s > 0.0)) throw ConfigError("RateCurve: f_s must be positive");
    if (p.sigma < 0.0) throw ConfigError("RateCurve: sigma must be nonnegative");
    if (!std::isfinite(p.gamma2)) throw ConfigError("RateCurve: gamma2 must be finite");
  }
}

double thermal_occupation(double omega_res, double temperature) {
  if (!(omega_res > 0.0)) throw std::domain_error("thermal_occupation: omega_res must be positive");
  if (!(temperature > 0.0)) throw std::domain_error("thermal_occupation: temperature must be positive");
  const double x = units::hbar * omega_res / (units::k_boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double coherent_population(const ResonatorQubitParams& params,
                           std::complex<double> f_dc) {
  params.validate();
  const double f2 = std::norm(f_dc);
  const double hk = 0.5 * params.kappa;
  return params.kappa * f2 / (hk * hk + params.chi * params.chi);
}

CoherentPopulations coherent_populations_detuned(
    const ResonatorQubitParams& params, std::complex<double> f_dc) {
  params.validate();
  const double f2 = std::norm(f_dc);
  const double hk = 0.5 * params.kappa;
  CoherentPopulations out;
  const double dp = params.delta_omega_d + params.chi;
  const double dm = params.delta_omega_d - params.chi;
  out.n_qubit0 = params.kappa * f2 / (hk * hk + dp * dp);
  out.n_qubit1 = params.kappa * f2 / (hk * hk + dm * dm);
  out.n_max = params.kappa * f2 / (hk * hk);
  return out;
}

double drive_amplitude_for_population(const ResonatorQubitParams& params,
                                      double n_coh) {
  params.validate();
  if (n_coh < 0.0) throw ConfigError("drive_amplitude_for_population: n_coh must be nonnegative");
  const double hk = 0.5 * params.kappa;
  return std::sqrt(n_coh * (hk * hk + params.chi * params.chi) / params.kappa);
}

}  // namespace shotnoise
