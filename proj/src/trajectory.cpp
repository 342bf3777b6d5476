#include "shotnoise/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shotnoise/reduce.hpp"

namespace shotnoise {

namespace {

using cplx = std::complex<double>;

struct Event {
  double t;
  bool pulse = false;
  int readout_index = -1;
};

}  // namespace

TimeGrid TimeGrid::build(const std::vector<double>& pulse_times,
                         const std::vector<double>& readout_times,
                         double total_time, double target_step,
                         double corr_t0, double corr_t1) {
  if (!(total_time > 0.0)) throw ConfigError("TimeGrid: total_time must be positive");
  if (!(target_step > 0.0)) throw ConfigError("TimeGrid: target_step must be positive");

  const double eps = 1e-12 * total_time;
  std::vector<Event> events;
  double prev = 0.0;
  for (double t : pulse_times) {
    if (t <= prev + eps || t >= total_time - eps)
      throw ConfigError("TimeGrid: pulse times must be strictly increasing inside (0, total_time)");
    prev = t;
    events.push_back({t, true, -1});
  }
  for (std::size_t j = 0; j < readout_times.size(); ++j) {
    const double t = readout_times[j];
    if (!(t > 0.0) || t > total_time + eps)
      throw ConfigError("TimeGrid: readout times must lie in (0, total_time]");
    events.push_back({t, false, static_cast<int>(j)});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  // merge coincident events (a readout can sit on a pulse boundary)
  std::vector<Event> merged;
  for (const auto& e : events) {
    if (!merged.empty() && std::abs(e.t - merged.back().t) < eps) {
      merged.back().pulse |= e.pulse;
      if (e.readout_index >= 0) {
        if (merged.back().readout_index >= 0)
          throw ConfigError("TimeGrid: duplicate readout times");
        merged.back().readout_index = e.readout_index;
      }
    } else {
      merged.push_back(e);
    }
  }
  if (merged.empty() || std::abs(merged.back().t - total_time) > eps)
    merged.push_back({total_time, false, -1});

  TimeGrid grid;
  grid.total_time = total_time;
  grid.readout_times = readout_times;
  const bool want_corr = corr_t1 > corr_t0;
  double t0 = 0.0;
  double sign = 1.0;
  for (const auto& e : merged) {
    const double len = e.t - t0;
    if (len <= eps) {
      if (e.pulse) sign = -sign;
      t0 = e.t;
      continue;
    }
    Segment seg;
    seg.t0 = t0;
    seg.n_steps = std::max(1, static_cast<int>(std::ceil(len / target_step - 1e-9)));
    seg.h = len / seg.n_steps;
    seg.chi_sign = sign;
    seg.readout_index = e.readout_index;
    if (want_corr) {
      for (int k = 0; k < seg.n_steps; ++k) {
        const double ts = t0 + (k + 1) * seg.h;
        if (ts >= corr_t0 - eps && ts <= corr_t1 + eps) {
          if (seg.corr_first < 0) seg.corr_first = k;
          seg.corr_last = k;
          grid.corr_times.push_back(ts);
        }
      }
    }
    grid.segments.push_back(seg);
    if (e.pulse) sign = -sign;
    t0 = e.t;
  }
  return grid;
}

TrajectoryRun prepare_run(const ResonatorQubitParams& params,
                          const DriveSpec& drive, const TimeGrid& grid) {
  params.validate();
  drive.validate();
  const double sqrt_kappa = std::sqrt(params.kappa);
  const cplx f = drive.kind == DriveKind::coherent ? drive.f_dc : cplx{};

  TrajectoryRun run;
  run.n_th = drive.kind == DriveKind::thermal ? drive.n_th : 0.0;
  run.n_readouts = static_cast<int>(grid.readout_times.size());
  run.n_corr = static_cast<int>(grid.corr_times.size());
  run.segments.reserve(grid.segments.size());
  for (const auto& seg : grid.segments) {
    const double chi_s = seg.chi_sign * params.chi;
    const cplx g0{0.5 * params.kappa, -(params.delta_omega_d + chi_s)};
    const cplx g1{0.5 * params.kappa, -(params.delta_omega_d - chi_s)};
    TrajectoryRun::SegmentCoeffs c;
    c.h = seg.h;
    c.n_steps = seg.n_steps;
    c.readout_index = seg.readout_index;
    c.corr_first = seg.corr_first;
    c.corr_last = seg.corr_last;
    c.e0 = std::exp(-g0 * seg.h);
    c.e1 = std::exp(-g1 * seg.h);
    c.m0 = std::exp(-g0 * (0.5 * seg.h)) * sqrt_kappa;
    c.m1 = std::exp(-g1 * (0.5 * seg.h)) * sqrt_kappa;
    c.d0 = sqrt_kappa * f * (1.0 - c.e0) / g0;
    c.d1 = sqrt_kappa * f * (1.0 - c.e1) / g1;
    c.two_i_chi = cplx{0.0, 2.0 * chi_s};
    run.segments.push_back(c);
  }
  return run;
}

namespace {

double default_step(const ResonatorQubitParams& params, double dt) {
  return std::min(dt, 1.0 / params.kappa) / 40.0;
}

void validate_step(double step, const ResonatorQubitParams& params, double dt) {
  if (step > std::min(dt, 1.0 / params.kappa) / 20.0 + 1e-18)
    throw ConfigError("TrajectoryConfig: time_step must be <= min(dt, 1/kappa)/20");
}

struct Moments {
  cplx mean;
  double var_re, var_im, cov;  // of the mean
};

Moments complex_mean_moments(std::span<const cplx> z) {
  const double m = static_cast<double>(z.size());
  Moments out;
  out.mean = pairwise_mean(z);
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& v : z) {
    const double dx = v.real() - out.mean.real();
    const double dy = v.imag() - out.mean.imag();
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double denom = m > 1 ? m * (m - 1) : 1;
  out.var_re = sxx / denom;
  out.var_im = syy / denom;
  out.cov = sxy / denom;
  return out;
}

double modulus_std_err(const Moments& mo) {
  const double r = std::abs(mo.mean);
  if (r == 0.0) return std::sqrt(std::max(mo.var_re, mo.var_im));
  const double nx = mo.mean.real() / r;
  const double ny = mo.mean.imag() / r;
  const double v = nx * nx * mo.var_re + ny * ny * mo.var_im + 2.0 * nx * ny * mo.cov;
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace

EnsembleTrace run_ensemble(const ResonatorQubitParams& params,
                           const DriveSpec& drive,
                           const std::vector<double>& pulse_times,
                           const std::vector<double>& readout_times,
                           double total_time, const TrajectoryConfig& config) {
  params.validate();
  drive.validate();
  if (readout_times.empty()) throw ConfigError("run_ensemble: no readout times");
  if (config.ensemble_size < 1) throw ConfigError("run_ensemble: ensemble_size must be >= 1");

  double min_gap = total_time;
  double prev = 0.0;
  for (double t : pulse_times) {
    min_gap = std::min(min_gap, t - prev);
    prev = t;
  }
  min_gap = std::min(min_gap, total_time - prev);
  double step = config.time_step;
  if (step <= 0.0) {
    step = default_step(params, min_gap);
  } else {
    validate_step(step, params, min_gap);
  }

  const bool stochastic = drive.kind == DriveKind::thermal && drive.n_th > 0.0;
  const std::int64_t m = stochastic ? config.ensemble_size : 1;

  const TimeGrid grid = TimeGrid::build(
      pulse_times, readout_times, total_time, step,
      config.record_correlator ? config.correlator_t0 : 0.0,
      config.record_correlator ? config.correlator_t1 : -1.0);
  const TrajectoryRun run = prepare_run(params, drive, grid);

  const int n_read = run.n_readouts;
  const int n_corr = run.n_corr;
  const std::int64_t bs = std::max<std::int64_t>(1, config.block_size);
  const std::int64_t n_blocks = (m + bs - 1) / bs;

  std::vector<cplx> expbuf(static_cast<std::size_t>(m) * n_read);
  // per-block correlator accumulators: sum, sum re^2, sum im^2
  std::vector<cplx> corr_sum(static_cast<std::size_t>(n_blocks) * n_corr);
  std::vector<double> corr_re2(static_cast<std::size_t>(n_blocks) * n_corr, 0.0);
  std::vector<double> corr_im2(static_cast<std::size_t>(n_blocks) * n_corr, 0.0);

  const bool parallel = config.execution == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    const std::int64_t r_begin = b * bs;
    const std::int64_t r_end = std::min(m, r_begin + bs);
    cplx* csum = corr_sum.data() + b * n_corr;
    double* cre2 = corr_re2.data() + b * n_corr;
    double* cim2 = corr_im2.data() + b * n_corr;
    for (std::int64_t r = r_begin; r < r_end; ++r) {
      GaussianNoiseStream noise(Xoshiro256pp::for_stream(config.seed, static_cast<std::uint64_t>(r)),
                                run.n_th);
      cplx* row = expbuf.data() + r * n_read;
      int ci = 0;
      integrate_pair_path(
          run, noise,
          [&](int j, cplx phi) { row[j] = std::exp(phi); },
          [&](cplx a01) {
            csum[ci] += a01;
            cre2[ci] += a01.real() * a01.real();
            cim2[ci] += a01.imag() * a01.imag();
            ++ci;
          });
    }
  }

  EnsembleTrace out;
  out.times = grid.readout_times;
  out.ensemble_size = m;
  out.n_blocks = static_cast<int>(n_blocks);
  out.mean.resize(n_read);
  out.coherence.resize(n_read);
  out.std_err.resize(n_read);
  out.phase.resize(n_read);
  out.block_mean.resize(static_cast<std::size_t>(n_blocks) * n_read);
  out.block_count.resize(n_blocks);

  std::vector<cplx> col(m);
  for (int j = 0; j < n_read; ++j) {
    for (std::int64_t r = 0; r < m; ++r) col[r] = expbuf[r * n_read + j];
    const Moments mo = complex_mean_moments(col);
    out.mean[j] = mo.mean;
    out.coherence[j] = std::abs(mo.mean);
    out.std_err[j] = stochastic ? modulus_std_err(mo) : 0.0;
    out.phase[j] = std::arg(mo.mean);
    for (std::int64_t b = 0; b < n_blocks; ++b) {
      const std::int64_t r_begin = b * bs;
      const std::int64_t r_end = std::min(m, r_begin + bs);
      out.block_count[b] = r_end - r_begin;
      out.block_mean[b * n_read + j] = pairwise_mean(
          std::span<const cplx>(col.data() + r_begin, col.data() + r_end));
    }
  }

  if (n_corr > 0) {
    out.corr_times = grid.corr_times;
    out.corr_mean.resize(n_corr);
    out.corr_sem_re.resize(n_corr);
    out.corr_sem_im.resize(n_corr);
    const double md = static_cast<double>(m);
    for (int i = 0; i < n_corr; ++i) {
      cplx s{};
      double re2 = 0, im2 = 0;
      for (std::int64_t b = 0; b < n_blocks; ++b) {
        s += corr_sum[b * n_corr + i];
        re2 += corr_re2[b * n_corr + i];
        im2 += corr_im2[b * n_corr + i];
      }
      const cplx mean = s / md;
      out.corr_mean[i] = mean;
      if (m > 1) {
        out.corr_sem_re[i] = std::sqrt(std::max(
            (re2 - md * mean.real() * mean.real()) / (md - 1) / md, 0.0));
        out.corr_sem_im[i] = std::sqrt(std::max(
            (im2 - md * mean.imag() * mean.imag()) / (md - 1) / md, 0.0));
      }
    }
  }
  return out;
}

namespace {

EnsembleTrace ensemble_for_schedule(const ResonatorQubitParams& params,
                                    const DriveSpec& drive,
                                    const CpmgSchedule& schedule,
                                    const std::vector<int>& n_list,
                                    const TrajectoryConfig& config) {
  schedule.validate();
  if (schedule.pulse_duration != 0.0)
    throw ConfigError("coherence_curve: trajectory route supports instantaneous pulses only");
  if (n_list.empty()) throw ConfigError("coherence_curve: n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw ConfigError("coherence_curve: n_list must be ascending positive");
  }
  CpmgSchedule full = schedule;
  full.n_pulses = n_list.back();
  std::vector<double> readouts(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) readouts[i] = n_list[i] * schedule.dt;
  return run_ensemble(params, drive, full.pulse_times(), readouts,
                      full.total_time(), config);
}

CoherenceTrace trace_from_ensemble(const EnsembleTrace& ens,
                                   const ResonatorQubitParams& params,
                                   const CpmgSchedule& schedule,
                                   std::uint64_t seed) {
  CoherenceTrace trace;
  trace.route = TraceRoute::trajectory;
  trace.seed = seed;
  trace.params = params;
  trace.schedule = schedule;
  trace.points.resize(ens.times.size());
  for (std::size_t i = 0; i < ens.times.size(); ++i)
    trace.points[i] = {ens.times[i], ens.coherence[i], ens.std_err[i]};
  trace.validate();
  return trace;
}

}  // namespace

CoherenceTrace coherence_curve(const ResonatorQubitParams& params,
                               const DriveSpec& drive,
                               const CpmgSchedule& schedule,
                               const std::vector<int>& n_list,
                               const TrajectoryConfig& config) {
  const EnsembleTrace ens = ensemble_for_schedule(params, drive, schedule, n_list, config);
  return trace_from_ensemble(ens, params, schedule, config.seed);
}

namespace {

struct WlsFit {
  double slope = 0, slope_sigma = 0, intercept = 0;
  int n_used = 0, n_excluded = 0;
};

// weighted straight-line fit of ln C vs t
WlsFit fit_log_linear(const std::vector<TracePoint>& pts, double t_min) {
  WlsFit fit;
  std::vector<double> t, y, w;
  bool have_err = true;
  for (const auto& p : pts) {
    if (p.t < t_min) continue;
    if (!(p.coherence > 0.0)) {
      ++fit.n_excluded;
      continue;
    }
    t.push_back(p.t);
    y.push_back(std::log(p.coherence));
    if (p.std_err > 0.0) {
      const double se_log = p.std_err / p.coherence;
      w.push_back(1.0 / (se_log * se_log));
    } else {
      have_err = false;
      w.push_back(1.0);
    }
  }
  fit.n_used = static_cast<int>(t.size());
  if (fit.n_used < 3) return fit;
  if (!have_err) std::fill(w.begin(), w.end(), 1.0);

  double sw = 0, st = 0, sy = 0;
  for (int i = 0; i < fit.n_used; ++i) {
    sw += w[i];
    st += w[i] * t[i];
    sy += w[i] * y[i];
  }
  const double tb = st / sw, yb = sy / sw;
  double stt = 0, sty = 0;
  for (int i = 0; i < fit.n_used; ++i) {
    stt += w[i] * (t[i] - tb) * (t[i] - tb);
    sty += w[i] * (t[i] - tb) * (y[i] - yb);
  }
  const double slope = sty / stt;
  fit.slope = slope;
  fit.intercept = yb - slope * tb;
  if (have_err) {
    fit.slope_sigma = std::sqrt(1.0 / stt);
  } else {
    double rss = 0;
    for (int i = 0; i < fit.n_used; ++i) {
      const double r = y[i] - (fit.intercept + slope * t[i]);
      rss += r * r;
    }
    fit.slope_sigma = fit.n_used > 2 ? std::sqrt(rss / (fit.n_used - 2) / stt) : 0.0;
  }
  return fit;
}

}  // namespace

RateEstimate extract_rate(const CoherenceTrace& trace, double t_min) {
  const WlsFit fit = fit_log_linear(trace.points, t_min);
  if (fit.n_excluded > 0)
    std::cerr << "extract_rate: excluded " << fit.n_excluded
              << " nonpositive-coherence point(s)\n";
  if (fit.n_used < 3)
    throw ConfigError("extract_rate: fewer than 3 usable points above t_min");
  RateEstimate est;
  est.gamma = -fit.slope;
  est.sigma = fit.slope_sigma;
  est.intercept = fit.intercept;
  est.n_used = fit.n_used;
  est.n_excluded = fit.n_excluded;
  return est;
}

TrajectoryRateResult rate_from_trajectory(const ResonatorQubitParams& params,
                                          const DriveSpec& drive,
                                          const CpmgSchedule& schedule,
                                          const std::vector<int>& n_list,
                                          const TrajectoryConfig& config,
                                          double t_min) {
  if (t_min < 0.0) t_min = 4.0 / params.kappa;
  TrajectoryRateResult out;
  out.ensemble = ensemble_for_schedule(params, drive, schedule, n_list, config);
  out.trace = trace_from_ensemble(out.ensemble, params, schedule, config.seed);
  out.rate = extract_rate(out.trace, t_min);

  std::vector<double> readouts = out.ensemble.times;
  const int nb = out.ensemble.n_blocks;
  const int nr = static_cast<int>(readouts.size());
  if (nb >= 8 && out.ensemble.ensemble_size > 1) {
    // leave-one-block-out rates with the central fit's weights
    std::vector<cplx> total(nr, cplx{});
    for (int b = 0; b < nb; ++b)
      for (int j = 0; j < nr; ++j)
        total[j] += out.ensemble.block_mean[b * nr + j] *
                    static_cast<double>(out.ensemble.block_count[b]);
    const double m_all = static_cast<double>(out.ensemble.ensemble_size);
    std::vector<double> rates;
    rates.reserve(nb);
    for (int b = 0; b < nb; ++b) {
      const double mb = static_cast<double>(out.ensemble.block_count[b]);
      std::vector<TracePoint> pts(nr);
      bool ok = true;
      for (int j = 0; j < nr; ++j) {
        const cplx zm = (total[j] - out.ensemble.block_mean[b * nr + j] * mb) / (m_all - mb);
        const double c = std::abs(zm);
        if (!(c > 0.0)) ok = false;
        pts[j] = {readouts[j], c, out.trace.points[j].std_err};
      }
      if (!ok) continue;
      const WlsFit f = fit_log_linear(pts, t_min);
      if (f.n_used >= 3) rates.push_back(-f.slope);
    }
    if (rates.size() >= 8) {
      double mean = 0;
      for (double g : rates) mean += g;
      mean /= static_cast<double>(rates.size());
      double ss = 0;
      for (double g : rates) ss += (g - mean) * (g - mean);
      const double nB = static_cast<double>(rates.size());
      out.rate.sigma = std::sqrt((nB - 1.0) / nB * ss);
    }
  }
  return out;
}

}  // namespace shotnoise
