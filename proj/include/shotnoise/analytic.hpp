#pragma once

#include <complex>

#include "shotnoise/types.hpp"

// Closed-form CPMG dephasing rates for photon shot noise in a dispersively
// coupled resonator, valid for arbitrary 2*chi/kappa, plus the Gaussian
// filter-function baseline. Everything here is a pure function of its value
// arguments and can be called from any thread.
namespace shotnoise {

// --- thermal photons, small n_th ---------------------------------------

// CPMG reduction factor R_th(dt) in [0, 1]; -> 0 as dt -> 0, -> 1 as
// dt -> infinity. Stable for kappa*dt from 1e-9 to 1e9.
double reduction_factor_thermal(double dt, const ResonatorQubitParams& params);

// Low-frequency (dt -> infinity) rate 4 chi^2 n_th / (kappa [1+(2chi/kappa)^2]),
// the leading order in n_th.
double gamma_thermal_prefactor(double n_th, const ResonatorQubitParams& params);

// Thermal-photon CPMG dephasing rate, prefactor times reduction factor.
// Exactly linear in n_th; leading order for n_th << 1.
double gamma_thermal(double dt, double n_th, const ResonatorQubitParams& params);

// Exact (all n_th) dephasing rate in the dt -> infinity limit:
// (kappa/2) Re[sqrt((1 - 2i chi/kappa)^2 - 8i chi n_th/kappa) - 1].
double gamma_lowfreq_thermal_exact(double n_th, const ResonatorQubitParams& params);

// --- thermal photons, moderate n_th (Gaussian Wigner ansatz) ------------

struct ModerateThermalSolution {
  std::complex<double> v_tp;      // ansatz variance at a pulse time
  std::complex<double> vartheta;  // Re > 0 branch
  std::complex<double> zeta;
  double gamma = 0.0;
  int iterations = 0;
  double residual = 0.0;  // relative fixed-point residual
};

// Solves the quasi-steady fixed point V(t_p)* = V(t_p + dt) of the variance
// Riccati flow (damped iteration, Newton fallback) and returns the dephasing
// rate Re ln[cosh(vartheta dt) + zeta sinh(vartheta dt)]/dt - kappa/2.
ModerateThermalSolution gamma_thermal_moderate(double dt, double n_th,
                                               const ResonatorQubitParams& params);

// --- quasi-steady cross-correlator A(t) = <alpha_0 alpha_1*> ------------

struct CorrelatorSolution {
  std::complex<double> a_tp;         // A at the pulse time
  std::complex<double> steady;       // kappa n_th / kappa_minus
  std::complex<double> kappa_minus;  // kappa - 2 i chi
  double dt = 0.0;

  // A(t_p + s) for s in [0, dt]
  std::complex<double> at(double s) const;
};

// Closed-form A(t) on one interpulse interval in the quasi-steady regime;
// satisfies A(t_p + dt) = conj(A(t_p)).
CorrelatorSolution correlator_steady_state(double dt, double n_th,
                                           const ResonatorQubitParams& params);

// --- coherent drive ------------------------------------------------------

// CPMG reduction factor for a resonant coherent drive; can exceed 1 for
// 2 chi / kappa > 1.393 near (2 chi / 2 pi) dt odd.
double reduction_factor_coherent(double dt, const ResonatorQubitParams& params);

double gamma_coherent_prefactor(double n_coh, const ResonatorQubitParams& params);

// Resonant-drive CPMG dephasing rate; requires params.delta_omega_d == 0
// (use gamma_coherent_detuned otherwise). Valid while the rate is small
// compared to min(1/dt, kappa).
double gamma_coherent(double dt, double n_coh, const ResonatorQubitParams& params);

// Arbitrary drive detuning. Reduces to gamma_coherent at delta_omega_d = 0
// and to 8 chi^2 n0 n1 / (kappa n_max) as dt -> infinity.
double gamma_coherent_detuned(double dt, std::complex<double> f_dc,
                              double delta_omega_d,
                              const ResonatorQubitParams& params);

// --- Gaussian filter-function baseline ----------------------------------

enum class SequenceKind { cpmg_even, cpmg_odd, echo, ramsey };

struct FilterFunctionSpec {
  SequenceKind kind = SequenceKind::cpmg_even;
  int n_pulses = 2;
  double dt = 0.0;

  double total_time() const { return n_pulses * dt; }
  // picks even/odd/echo from N
  static FilterFunctionSpec cpmg(int n_pulses, double dt);
  static FilterFunctionSpec ramsey_total(double total_time);
  void validate() const;
};

// F(omega) in s^2, engineering single-sided convention:
// 1/T_phi = integral F(w) S(w) dw/2pi / T. Finite everywhere; the removable
// singularities at cos(w dt/2) = 0 are evaluated exactly.
double filter_function(const FilterFunctionSpec& spec, double omega);

enum class FilterNoiseKind { thermal, coherent_resonant };

// Qubit-frequency noise spectral density (single sided): Lorentzian of
// half-width kappa (thermal) or kappa/2 (resonant coherent).
double photon_noise_spectral_density(double omega, double population,
                                     const ResonatorQubitParams& params,
                                     FilterNoiseKind kind);

// Closed-form Gaussian-approximation CPMG rate (valid for |2chi| << kappa).
double gamma_filterfunction(double dt, double population,
                            const ResonatorQubitParams& params,
                            FilterNoiseKind kind);

// Same rate via the odd-harmonic spectral sum, truncated at relative term
// size 1e-12; agrees with the closed form to 1e-6.
double gamma_filterfunction_harmonic_sum(double dt, double population,
                                         const ResonatorQubitParams& params,
                                         FilterNoiseKind kind);

// Phenomenological variant with the [1+(2chi/kappa)^2]^-1 low-frequency
// correction; exposed for comparison curves only.
double gamma_filterfunction_lowfreq_corrected(double dt, double population,
                                              const ResonatorQubitParams& params,
                                              FilterNoiseKind kind);

}  // namespace shotnoise
