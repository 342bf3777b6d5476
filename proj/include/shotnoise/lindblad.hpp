#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "shotnoise/trajectory.hpp"  // RateEstimate, extract_rate
#include "shotnoise/types.hpp"

// Master-equation route: qubit x truncated-Fock-resonator density matrix in
// the drive rotating frame, fixed-step RK4, with finite-duration
// raised-cosine pi-pulses or instantaneous flips. This is the only route
// that models pulse shape.
namespace shotnoise {

struct FockConfig {
  int n_fock = 5;
  double integrator_step = 0.0;       // s; 0 selects the step rule below
  double thermalization_time = 0.0;   // s; 0 selects 100/kappa
  double leak_threshold = 1e-6;       // top Fock level population cap

  void validate() const;
};

struct SystemState {
  Eigen::MatrixXcd rho;  // (2 n_fock)^2, basis |qubit> x |fock>
  int n_fock = 0;

  double trace_error() const;        // |tr rho - 1|
  double hermiticity_error() const;  // max |rho - rho^dagger|
  double min_eigenvalue() const;
  double top_fock_population() const;
};

class LindbladModel {
 public:
  LindbladModel(const ResonatorQubitParams& params, const DriveSpec& drive,
                const FockConfig& fock);

  SystemState vacuum_state() const;
  // drive + dissipator, no pulses, for thermalization_time
  void thermalize(SystemState& state) const;
  void evolve_free(SystemState& state, double duration) const;
  // one raised-cosine pi-pulse occupying [0, tau], centered at tau/2
  void evolve_pulse(SystemState& state, double tau) const;
  // arbitrary sigma_x envelope g(t) over [0, duration]
  void evolve_envelope(SystemState& state, double duration,
                       const std::function<double(double)>& envelope) const;
  void apply_pi_half(SystemState& state) const;  // instantaneous, about Y
  void apply_pi_instantaneous(SystemState& state) const;

  double coherence(const SystemState& state) const;  // 2 |tr_res rho_01|
  // six-phase readout emulation: visibility of the population-difference
  // sinusoid; equals coherence() in this noiseless-readout model
  double coherence_phase_scan(const SystemState& state, int n_phases = 6) const;

  void check_leak(const SystemState& state) const;  // throws TruncationError

  const ResonatorQubitParams& params() const { return params_; }
  double free_step() const { return h_free_; }

 private:
  void rhs(const Eigen::MatrixXcd& rho, double g, Eigen::MatrixXcd& out) const;
  void rk4(SystemState& state, double duration, double h_target,
           const std::function<double(double)>& envelope) const;

  ResonatorQubitParams params_;
  DriveSpec drive_;
  FockConfig fock_;
  int dim_;
  double n_th_;
  double h_free_;
  Eigen::MatrixXcd h0_, sx_, a_, ad_, ada_, aad_;
  mutable Eigen::MatrixXcd w1_, w2_, k1_, k2_, k3_, k4_;
};

// Generic evolution under the model Liouvillian with an optional pulse
// envelope g(t) added to the sigma_x drive over [0, duration].
SystemState evolve(const SystemState& state, const ResonatorQubitParams& params,
                   const DriveSpec& drive, const FockConfig& fock,
                   const std::function<double(double)>& pulse_envelope,
                   double duration);

// Thermalize, apply the initial pi/2, run the CPMG train, and record
// C(N dt) for every N in n_list (ascending).
CoherenceTrace cpmg_experiment(const ResonatorQubitParams& params,
                               const DriveSpec& drive,
                               const CpmgSchedule& schedule,
                               const FockConfig& fock,
                               const std::vector<int>& n_list);

// N values with kappa N dt spanning [4, 12] where reachable, else the
// smallest count values.
std::vector<int> default_n_list(const ResonatorQubitParams& params, double dt,
                                int count = 5);

struct LindbladRateResult {
  RateEstimate rate;
  CoherenceTrace trace;
};

LindbladRateResult rate_from_lindblad(const ResonatorQubitParams& params,
                                      const DriveSpec& drive,
                                      const CpmgSchedule& schedule,
                                      const FockConfig& fock,
                                      std::vector<int> n_list = {},
                                      double t_min = -1.0);

}  // namespace shotnoise
