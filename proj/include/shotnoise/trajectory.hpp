#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "shotnoise/rng.hpp"
#include "shotnoise/types.hpp"

// Monte-Carlo evaluation of the coherence functional: paired resonator
// trajectories alpha_0, alpha_1 driven by one shared complex white noise,
// with the accumulated exponent integral 2 i chi~(t) alpha_0 alpha_1*.
// Pulses are instantaneous; sign flips and readouts land exactly on step
// boundaries. Realizations are independent streams, so the ensemble kernel
// runs serial or OpenMP-parallel with bit-identical results.
namespace shotnoise {

enum class Execution { serial, parallel };

struct TrajectoryConfig {
  double time_step = 0.0;  // s; 0 selects min(dt, 1/kappa)/40
  std::int64_t ensemble_size = 10000;
  std::uint64_t seed = 1;
  Execution execution = Execution::parallel;
  int block_size = 256;  // realizations per reduction block

  bool record_correlator = false;
  double correlator_t0 = 0.0;  // sampling window for <alpha_0 alpha_1*>
  double correlator_t1 = 0.0;
};

// Integration grid: intervals of constant chi~ sign, each subdivided into
// uniform steps no longer than the target step.
struct TimeGrid {
  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    int n_steps = 0;
    double chi_sign = 1.0;
    int readout_index = -1;  // >= 0: segment end is that readout
    int corr_first = -1, corr_last = -2;  // step indices sampled (inclusive)
  };
  std::vector<Segment> segments;
  std::vector<double> readout_times;
  std::vector<double> corr_times;
  double total_time = 0.0;

  static TimeGrid build(const std::vector<double>& pulse_times,
                        const std::vector<double>& readout_times,
                        double total_time, double target_step,
                        double corr_t0 = 0.0, double corr_t1 = -1.0);
};

// Per-segment update coefficients for one (params, drive) pair:
//   alpha_q <- e0/e1 * alpha_q + d0/d1 + m0/m1 * dW
// with dW the shared complex Wiener increment of the step.
struct TrajectoryRun {
  struct SegmentCoeffs {
    std::complex<double> e0, e1;  // exp(-gamma_q h)
    std::complex<double> m0, m1;  // exp(-gamma_q h/2) sqrt(kappa)
    std::complex<double> d0, d1;  // sqrt(kappa) F (1 - e_q) / gamma_q
    std::complex<double> two_i_chi;
    double h = 0.0;
    int n_steps = 0;
    int readout_index = -1;
    int corr_first = -1, corr_last = -2;
  };
  std::vector<SegmentCoeffs> segments;
  double n_th = 0.0;
  int n_readouts = 0;
  int n_corr = 0;
};

TrajectoryRun prepare_run(const ResonatorQubitParams& params,
                          const DriveSpec& drive, const TimeGrid& grid);

// Shared thermal noise stream: one complex Gaussian increment per step with
// total variance n_th * h, fed identically to both trajectories.
class GaussianNoiseStream {
 public:
  GaussianNoiseStream(Xoshiro256pp rng, double n_th) : rng_(rng), n_th_(n_th) {}
  std::complex<double> increment(double h) {
    if (n_th_ == 0.0) return {};
    const auto [g1, g2] = rng_.normal_pair();
    const double sd = std::sqrt(0.5 * n_th_ * h);
    return {sd * g1, sd * g2};
  }

 private:
  Xoshiro256pp rng_;
  double n_th_;
};

// One realization. on_readout(readout_index, exponent) fires at readout
// boundaries; on_corr(alpha_0 * conj(alpha_1)) fires at sampled steps, in
// grid order.
template <class Noise, class OnReadout, class OnCorr>
inline void integrate_pair_path(const TrajectoryRun& run, Noise& noise,
                                OnReadout&& on_readout, OnCorr&& on_corr) {
  std::complex<double> a0{}, a1{}, phi{};
  for (const auto& c : run.segments) {
    std::complex<double> f_prev = c.two_i_chi * a0 * std::conj(a1);
    for (int k = 0; k < c.n_steps; ++k) {
      const std::complex<double> w = noise.increment(c.h);
      a0 = c.e0 * a0 + c.d0 + c.m0 * w;
      a1 = c.e1 * a1 + c.d1 + c.m1 * w;
      const std::complex<double> f = c.two_i_chi * a0 * std::conj(a1);
      phi += (0.5 * c.h) * (f_prev + f);
      f_prev = f;
      if (k >= c.corr_first && k <= c.corr_last) on_corr(a0 * std::conj(a1));
    }
    if (c.readout_index >= 0) on_readout(c.readout_index, phi);
  }
}

// Accumulated exponent over the whole grid (single realization).
template <class Noise>
std::complex<double> integrate_pair(const ResonatorQubitParams& params,
                                    const DriveSpec& drive, const TimeGrid& grid,
                                    Noise& noise) {
  const TrajectoryRun run = prepare_run(params, drive, grid);
  std::complex<double> out{};
  integrate_pair_path(
      run, noise,
      [&](int, std::complex<double> phi) { out = phi; },
      [](std::complex<double>) {});
  return out;
}

// Ensemble statistics. Per-readout complex mean of e^Phi plus per-block
// means (for resampling); correlator window statistics when requested.
struct EnsembleTrace {
  std::vector<double> times;
  std::vector<std::complex<double>> mean;  // <e^Phi>
  std::vector<double> coherence;           // |mean|
  std::vector<double> std_err;             // delta-method error of |mean|
  std::vector<double> phase;               // arg(mean)

  std::int64_t ensemble_size = 0;
  int n_blocks = 0;
  std::vector<std::complex<double>> block_mean;  // [b * n_readouts + j]
  std::vector<std::int64_t> block_count;

  std::vector<double> corr_times;
  std::vector<std::complex<double>> corr_mean;
  std::vector<double> corr_sem_re, corr_sem_im;
};

EnsembleTrace run_ensemble(const ResonatorQubitParams& params,
                           const DriveSpec& drive,
                           const std::vector<double>& pulse_times,
                           const std::vector<double>& readout_times,
                           double total_time, const TrajectoryConfig& config);

// C(N dt) for the CPMG schedule at every N in n_list (ascending). Thermal
// drives average config.ensemble_size realizations; drives without noise run
// one deterministic realization.
CoherenceTrace coherence_curve(const ResonatorQubitParams& params,
                               const DriveSpec& drive,
                               const CpmgSchedule& schedule,
                               const std::vector<int>& n_list,
                               const TrajectoryConfig& config);

struct RateEstimate {
  double gamma = 0.0;
  double sigma = 0.0;
  double intercept = 0.0;  // ln C at t = 0 from the fit
  int n_used = 0;
  int n_excluded = 0;
};

// Weighted linear least squares on ln C over points with t >= t_min;
// nonpositive-coherence points are dropped. Weighted by (C/std_err)^2 when
// errors are present, unweighted otherwise.
RateEstimate extract_rate(const CoherenceTrace& trace, double t_min);

struct TrajectoryRateResult {
  RateEstimate rate;
  CoherenceTrace trace;
  EnsembleTrace ensemble;
};

// Full pipeline: ensemble trace then exponential fit. The trace points share
// realizations, so the returned sigma comes from a block jackknife over the
// ensemble rather than the (correlated) per-point fit errors.
TrajectoryRateResult rate_from_trajectory(const ResonatorQubitParams& params,
                                          const DriveSpec& drive,
                                          const CpmgSchedule& schedule,
                                          const std::vector<int>& n_list,
                                          const TrajectoryConfig& config,
                                          double t_min = -1.0);

}  // namespace shotnoise
