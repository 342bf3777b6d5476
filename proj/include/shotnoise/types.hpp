#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "shotnoise/errors.hpp"

namespace shotnoise {

// Dispersive resonator-qubit constants. kappa is the resonator energy decay
// rate; chi is half the dispersive shift (the qubit shift per photon is
// 2*chi); delta_omega_d = omega_drive - omega_res. All in rad/s.
struct ResonatorQubitParams {
  double kappa = 0.0;
  double chi = 0.0;
  double delta_omega_d = 0.0;

  double two_chi_over_kappa() const { return 2.0 * chi / kappa; }
  void validate() const;
};

enum class DriveKind { none, thermal, coherent };

// Resonator drive. Thermal: white-noise drive with mean intracavity photon
// number n_th. Coherent: constant amplitude f_dc (units s^-1/2), giving
// n_coh = kappa |f_dc|^2 / [(kappa/2)^2 + chi^2] on resonance.
struct DriveSpec {
  DriveKind kind = DriveKind::none;
  double n_th = 0.0;
  std::complex<double> f_dc{0.0, 0.0};

  static DriveSpec none() { return {}; }
  static DriveSpec thermal(double n);
  static DriveSpec coherent(std::complex<double> f);
  void validate() const;
};

enum class PulseShape { instantaneous, raised_cosine };

// CPMG timing: n_pulses pi-pulses centered at (k + 1/2) dt, total duration
// n_pulses * dt. pulse_duration = 0 selects instantaneous pulses.
struct CpmgSchedule {
  int n_pulses = 1;
  double dt = 0.0;
  double pulse_duration = 0.0;
  PulseShape shape = PulseShape::instantaneous;

  double total_time() const { return n_pulses * dt; }
  double sequence_frequency() const { return 1.0 / (2.0 * dt); }  // f_s, Hz
  std::vector<double> pulse_times() const;
  void validate() const;
};

// The conditional dispersive shift chi~(t): +chi before the first pulse
// center, flipping sign at each one.
double chi_tilde(const CpmgSchedule& schedule, double chi, double t);

enum class TraceRoute { analytic, trajectory, lindblad };

struct TracePoint {
  double t = 0.0;          // s, CPMG duration
  double coherence = 0.0;  // dimensionless
  double std_err = 0.0;    // statistical, 0 for deterministic routes
};

struct CoherenceTrace {
  std::vector<TracePoint> points;
  TraceRoute route = TraceRoute::analytic;
  std::uint64_t seed = 0;
  ResonatorQubitParams params;
  CpmgSchedule schedule;

  // Times strictly increasing, coherence finite and nonnegative, and at most
  // 1 + 5 standard errors (Monte-Carlo headroom).
  void validate() const;
};

struct RatePoint {
  double f_s = 0.0;     // Hz, CPMG sequence frequency 1/(2 dt)
  double gamma2 = 0.0;  // 1/s
  double sigma = 0.0;   // 1/s, 0 = unknown
};

struct RateCurve {
  std::vector<RatePoint> points;
  std::string label;

  void validate() const;
};

// Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1).
double thermal_occupation(double omega_res, double temperature);

// Steady-state mean photon number for a resonant coherent drive,
// kappa |f|^2 / [(kappa/2)^2 + chi^2].
double coherent_population(const ResonatorQubitParams& params,
                           std::complex<double> f_dc);

// Per-qubit-state populations for a detuned drive, and the on-peak maximum
// kappa |f|^2 / (kappa/2)^2.
struct CoherentPopulations {
  double n_qubit0 = 0.0;
  double n_qubit1 = 0.0;
  double n_max = 0.0;
};
CoherentPopulations coherent_populations_detuned(
    const ResonatorQubitParams& params, std::complex<double> f_dc);

// Inverse of coherent_population: real amplitude giving the target resonant
// population.
double drive_amplitude_for_population(const ResonatorQubitParams& params,
                                      double n_coh);

}  // namespace shotnoise
