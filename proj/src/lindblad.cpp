#include "shotnoise/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "shotnoise/units.hpp"

namespace shotnoise {

namespace {
using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};
}  // namespace

void FockConfig::validate() const {
  if (n_fock < 2) throw ConfigError("FockConfig: n_fock must be >= 2");
  if (integrator_step < 0.0 || thermalization_time < 0.0)
    throw ConfigError("FockConfig: step and thermalization_time must be nonnegative");
}

double SystemState::trace_error() const { return std::abs(rho.trace() - 1.0); }

double SystemState::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double SystemState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SystemState::top_fock_population() const {
  const int nf = n_fock;
  return std::real(rho(nf - 1, nf - 1)) + std::real(rho(2 * nf - 1, 2 * nf - 1));
}

LindbladModel::LindbladModel(const ResonatorQubitParams& params,
                             const DriveSpec& drive, const FockConfig& fock)
    : params_(params), drive_(drive), fock_(fock) {
  params_.validate();
  drive_.validate();
  fock_.validate();
  const int nf = fock_.n_fock;
  dim_ = 2 * nf;
  n_th_ = drive_.kind == DriveKind::thermal ? drive_.n_th : 0.0;

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nf, nf);
  for (int m = 1; m < nf; ++m) a(m - 1, m) = std::sqrt(double(m));
  const Eigen::MatrixXcd nhat = a.adjoint() * a;

  a_ = Eigen::MatrixXcd::Zero(dim_, dim_);
  a_.topLeftCorner(nf, nf) = a;
  a_.bottomRightCorner(nf, nf) = a;
  ad_ = a_.adjoint();
  ada_ = ad_ * a_;
  aad_ = a_ * ad_;

  // H = -(chi sigma_z + delta) n + i sqrt(kappa) (F a^dag - F* a)
  h0_ = Eigen::MatrixXcd::Zero(dim_, dim_);
  h0_.topLeftCorner(nf, nf) = -(params_.chi + params_.delta_omega_d) * nhat;
  h0_.bottomRightCorner(nf, nf) = (params_.chi - params_.delta_omega_d) * nhat;
  if (drive_.kind == DriveKind::coherent) {
    const double sk = std::sqrt(params_.kappa);
    h0_ += I * sk * (drive_.f_dc * ad_ - std::conj(drive_.f_dc) * a_);
  }

  sx_ = Eigen::MatrixXcd::Zero(dim_, dim_);
  sx_.topRightCorner(nf, nf) = Eigen::MatrixXcd::Identity(nf, nf);
  sx_.bottomLeftCorner(nf, nf) = Eigen::MatrixXcd::Identity(nf, nf);

  double h = std::min(1.0 / params_.kappa,
                      params_.chi != 0.0
                          ? units::two_pi / std::abs(2.0 * params_.chi)
                          : 1.0 / params_.kappa);
  if (params_.delta_omega_d != 0.0)
    h = std::min(h, units::two_pi / std::abs(params_.delta_omega_d));
  h_free_ = h / 20.0;
  if (fock_.integrator_step > 0.0) h_free_ = std::min(h_free_, fock_.integrator_step);

  w1_.resize(dim_, dim_);
  w2_.resize(dim_, dim_);
  k1_.resize(dim_, dim_);
  k2_.resize(dim_, dim_);
  k3_.resize(dim_, dim_);
  k4_.resize(dim_, dim_);
}

SystemState LindbladModel::vacuum_state() const {
  SystemState s;
  s.n_fock = fock_.n_fock;
  s.rho = Eigen::MatrixXcd::Zero(dim_, dim_);
  s.rho(0, 0) = 1.0;
  return s;
}

void LindbladModel::rhs(const Eigen::MatrixXcd& rho, double g,
                        Eigen::MatrixXcd& out) const {
  out.noalias() = -I * (h0_ * rho - rho * h0_);
  if (g != 0.0) out.noalias() += (-I * g) * (sx_ * rho - rho * sx_);
  const double down = params_.kappa * (n_th_ + 1.0);
  w1_.noalias() = a_ * rho;
  out.noalias() += down * (w1_ * ad_);
  w2_.noalias() = ada_ * rho;
  out.noalias() -= (0.5 * down) * w2_;
  w2_.noalias() = rho * ada_;
  out.noalias() -= (0.5 * down) * w2_;
  if (n_th_ > 0.0) {
    const double up = params_.kappa * n_th_;
    w1_.noalias() = ad_ * rho;
    out.noalias() += up * (w1_ * a_);
    w2_.noalias() = aad_ * rho;
    out.noalias() -= (0.5 * up) * w2_;
    w2_.noalias() = rho * aad_;
    out.noalias() -= (0.5 * up) * w2_;
  }
}

void LindbladModel::rk4(SystemState& state, double duration, double h_target,
                        const std::function<double(double)>& envelope) const {
  if (duration <= 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(duration / h_target - 1e-9)));
  const double h = duration / n;
  auto g = [&](double t) { return envelope ? envelope(t) : 0.0; };
  Eigen::MatrixXcd& rho = state.rho;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    rhs(rho, g(t), k1_);
    w1_ = rho + (0.5 * h) * k1_;
    rhs(w1_, g(t + 0.5 * h), k2_);
    w1_ = rho + (0.5 * h) * k2_;
    rhs(w1_, g(t + 0.5 * h), k3_);
    w1_ = rho + h * k3_;
    rhs(w1_, g(t + h), k4_);
    rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    t += h;
  }
}

void LindbladModel::thermalize(SystemState& state) const {
  const double t_th = fock_.thermalization_time > 0.0
                          ? fock_.thermalization_time
                          : 100.0 / params_.kappa;
  rk4(state, t_th, h_free_, nullptr);
}

void LindbladModel::evolve_free(SystemState& state, double duration) const {
  rk4(state, duration, h_free_, nullptr);
}

void LindbladModel::evolve_pulse(SystemState& state, double tau) const {
  const double g_max = std::numbers::pi / tau;
  const double h = std::min({h_free_, tau / 20.0, units::two_pi / g_max / 20.0});
  auto g = [tau](double t) {
    // pi[1 + cos(2 pi (t - tau/2)/tau)] / (2 tau) on (0, tau)
    return std::numbers::pi *
           (1.0 + std::cos(units::two_pi * (t - 0.5 * tau) / tau)) / (2.0 * tau);
  };
  rk4(state, tau, h, g);
}

void LindbladModel::evolve_envelope(
    SystemState& state, double duration,
    const std::function<double(double)>& envelope) const {
  if (!envelope) {
    evolve_free(state, duration);
    return;
  }
  double g_max = 0.0;
  for (int i = 0; i <= 1000; ++i)
    g_max = std::max(g_max, std::abs(envelope(duration * i / 1000.0)));
  double h = std::min(h_free_, duration / 20.0);
  if (g_max > 0.0) h = std::min(h, units::two_pi / g_max / 20.0);
  rk4(state, duration, h, envelope);
}

void LindbladModel::apply_pi_half(SystemState& state) const {
  const int nf = fock_.n_fock;
  const double c = std::numbers::sqrt2 / 2.0;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_, dim_);
  u.topLeftCorner(nf, nf).diagonal().setConstant(c);
  u.bottomRightCorner(nf, nf).diagonal().setConstant(c);
  u.topRightCorner(nf, nf).diagonal().setConstant(-c);
  u.bottomLeftCorner(nf, nf).diagonal().setConstant(c);
  state.rho = u * state.rho * u.adjoint();
}

void LindbladModel::apply_pi_instantaneous(SystemState& state) const {
  state.rho = sx_ * state.rho * sx_;
}

double LindbladModel::coherence(const SystemState& state) const {
  const int nf = fock_.n_fock;
  return 2.0 * std::abs(state.rho.topRightCorner(nf, nf).trace());
}

double LindbladModel::coherence_phase_scan(const SystemState& state,
                                           int n_phases) const {
  const int nf = fock_.n_fock;
  // population difference after a pi/2-pulse about the axis at angle phi,
  // fitted as A cos(phi) + B sin(phi); the visibility is hypot(A, B)
  double sc = 0.0, ss = 0.0;
  for (int k = 0; k < n_phases; ++k) {
    const double phi = units::two_pi * k / n_phases;
    const double c = std::cos(std::numbers::pi / 4.0);
    const double s = std::sin(std::numbers::pi / 4.0);
    // exp(-i pi/4 sigma_phi), sigma_phi = cos(phi) sx + sin(phi) sy
    Eigen::Matrix2cd uq;
    uq << c, -I * s * std::exp(-I * phi), -I * s * std::exp(I * phi), c;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_, dim_);
    u.topLeftCorner(nf, nf).diagonal().setConstant(uq(0, 0));
    u.topRightCorner(nf, nf).diagonal().setConstant(uq(0, 1));
    u.bottomLeftCorner(nf, nf).diagonal().setConstant(uq(1, 0));
    u.bottomRightCorner(nf, nf).diagonal().setConstant(uq(1, 1));
    const Eigen::MatrixXcd r = u * state.rho * u.adjoint();
    const double sig =
        std::real(r.topLeftCorner(nf, nf).trace() - r.bottomRightCorner(nf, nf).trace());
    sc += sig * std::cos(phi);
    ss += sig * std::sin(phi);
  }
  const double norm = 2.0 / n_phases;
  return std::hypot(norm * sc, norm * ss);
}

void LindbladModel::check_leak(const SystemState& state) const {
  const double leak = state.top_fock_population();
  if (leak > fock_.leak_threshold)
    throw TruncationError(
        "Fock truncation leak " + std::to_string(leak) +
            " exceeds threshold; increase n_fock",
        leak);
}

SystemState evolve(const SystemState& state, const ResonatorQubitParams& params,
                   const DriveSpec& drive, const FockConfig& fock,
                   const std::function<double(double)>& pulse_envelope,
                   double duration) {
  LindbladModel model(params, drive, fock);
  SystemState out = state;
  if (out.n_fock != fock.n_fock || out.rho.rows() != 2 * fock.n_fock)
    throw ConfigError("evolve: state dimension does not match FockConfig");
  model.evolve_envelope(out, duration, pulse_envelope);
  return out;
}

CoherenceTrace cpmg_experiment(const ResonatorQubitParams& params,
                               const DriveSpec& drive,
                               const CpmgSchedule& schedule,
                               const FockConfig& fock,
                               const std::vector<int>& n_list) {
  schedule.validate();
  if (n_list.empty()) throw ConfigError("cpmg_experiment: n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw ConfigError("cpmg_experiment: n_list must be ascending positive");

  LindbladModel model(params, drive, fock);
  SystemState state = model.vacuum_state();
  model.thermalize(state);
  model.apply_pi_half(state);

  const bool finite = schedule.shape == PulseShape::raised_cosine &&
                      schedule.pulse_duration > 0.0;
  const double tau = schedule.pulse_duration;
  const double half_free = finite ? 0.5 * (schedule.dt - tau) : 0.5 * schedule.dt;

  CoherenceTrace trace;
  trace.route = TraceRoute::lindblad;
  trace.params = params;
  trace.schedule = schedule;

  const int n_max = n_list.back();
  std::size_t next = 0;
  for (int n = 1; n <= n_max; ++n) {
    model.evolve_free(state, half_free);
    if (finite)
      model.evolve_pulse(state, tau);
    else
      model.apply_pi_instantaneous(state);
    model.evolve_free(state, half_free);
    if (next < n_list.size() && n_list[next] == n) {
      model.check_leak(state);
      trace.points.push_back({n * schedule.dt, model.coherence(state), 0.0});
      ++next;
    }
  }
  trace.validate();
  return trace;
}

std::vector<int> default_n_list(const ResonatorQubitParams& params, double dt,
                                int count) {
  const double x = params.kappa * dt;
  int n_lo = std::max(1, static_cast<int>(std::ceil(4.0 / x)));
  int n_hi = std::max(n_lo + count - 1, static_cast<int>(std::ceil(12.0 / x)));
  std::vector<int> out;
  int prev = 0;
  for (int i = 0; i < count; ++i) {
    int n = n_lo + static_cast<int>(std::round(double(i) * (n_hi - n_lo) / (count - 1)));
    if (n <= prev) n = prev + 1;
    out.push_back(n);
    prev = n;
  }
  return out;
}

LindbladRateResult rate_from_lindblad(const ResonatorQubitParams& params,
                                      const DriveSpec& drive,
                                      const CpmgSchedule& schedule,
                                      const FockConfig& fock,
                                      std::vector<int> n_list, double t_min) {
  if (n_list.empty()) n_list = default_n_list(params, schedule.dt);
  LindbladRateResult out;
  out.trace = cpmg_experiment(params, drive, schedule, fock, n_list);
  if (t_min < 0.0) {
    t_min = 4.0 / params.kappa;
    // keep at least 3 points when the whole trace sits above/below t_min
    if (out.trace.points.front().t >= t_min) t_min = 0.0;
  }
  out.rate = extract_rate(out.trace, t_min);
  return out;
}

}  // namespace shotnoise
