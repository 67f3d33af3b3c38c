#include "qudit/decay_fit.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <array>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "qudit/nutation.hpp"

namespace qudit {

const char* to_string(EchoKind kind) { return kind == EchoKind::two_pulse ? "two-pulse" : "three-pulse"; }

EchoKind parse_echo_kind(const std::string& text) {
  if (text == "two-pulse" || text == "2p") return EchoKind::two_pulse;
  if (text == "three-pulse" || text == "3p") return EchoKind::three_pulse;
  throw ValidationError("unknown trace kind '" + text + "' (expected two-pulse or three-pulse)");
}

void DecayTrace::validate() const {
  const std::string where = source.empty() ? "trace" : source;
  if (times_us.size() != amplitude.size()) throw ValidationError(where + ": time and amplitude columns differ in length");
  if (times_us.size() < kMinTracePoints) {
    throw ValidationError(where + ": needs at least " + std::to_string(kMinTracePoints) + " points");
  }
  for (std::size_t i = 0; i < times_us.size(); ++i) {
    if (!std::isfinite(times_us[i]) || !std::isfinite(amplitude[i])) {
      throw ValidationError(where + ": non-finite value at point " + std::to_string(i + 1));
    }
    if (i > 0 && !(times_us[i] > times_us[i - 1])) {
      throw ValidationError(where + ": times not strictly ascending at point " + std::to_string(i + 1));
    }
  }
  if (!(field_mt >= 0.0) || !std::isfinite(field_mt)) throw ValidationError(where + ": field must be non-negative");
}

const char* DecayParams::name(int i) {
  static constexpr std::array<const char*, kCount> names{"y0", "a", "t_decay_us", "k", "lambda_per_us", "nu_MHz", "phi"};
  return names.at(static_cast<std::size_t>(i));
}

double& DecayParams::operator[](int i) {
  switch (i) {
    case 0: return y0;
    case 1: return a;
    case 2: return t_decay_us;
    case 3: return k;
    case 4: return lambda_per_us;
    case 5: return nu_mhz;
    case 6: return phi;
  }
  throw std::out_of_range("DecayParams index");
}

double DecayParams::operator[](int i) const { return const_cast<DecayParams&>(*this)[i]; }

bool DecayFit::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

// Parameter blocks: envelope (y0, a, t_decay) and modulation (k, lambda, nu, phi).
template <class T>
T model(const T* env, const T* mod, double rate, double t) {
  using std::cos;
  using std::exp;
  const T decay = exp(-rate * t / env[2]);
  const T modulation = T(1.0) + mod[0] * exp(-mod[1] * t) * cos(2.0 * std::numbers::pi * mod[2] * t + mod[3]);
  return env[0] + env[1] * decay * modulation;
}

double decay_rate(EchoKind kind) { return kind == EchoKind::two_pulse ? 2.0 : 1.0; }

struct PointResidual {
  double t;
  double y;
  double rate;

  template <class T>
  bool operator()(const T* env, const T* mod, T* r) const {
    r[0] = model(env, mod, rate, t) - T(y);
    return true;
  }
};

struct Bounds {
  double nyquist_mhz;
};

DecayParams clamp_to_bounds(DecayParams p, const Bounds& b) {
  p.t_decay_us = std::clamp(p.t_decay_us, kMinDecayTimeUs, kMaxDecayTimeUs);
  p.k = std::clamp(p.k, 0.0, kMaxModulationDepth);
  p.lambda_per_us = std::clamp(p.lambda_per_us, 0.0, kMaxModulationDampingPerUs);
  p.nu_mhz = std::clamp(p.nu_mhz, 0.0, b.nyquist_mhz);
  return p;
}

struct Run {
  DecayParams params;
  double cost = 0.0;  // 0.5 * sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::string report;
  Eigen::MatrixXd jacobian;  // n x 7 at the solution
};

Run run_lm(const DecayTrace& trace, const DecayParams& start, const Bounds& bounds, bool modulated,
           const FitOptions& options) {
  const DecayParams p0 = clamp_to_bounds(start, bounds);
  std::array<double, 3> env{p0.y0, p0.a, p0.t_decay_us};
  std::array<double, 4> mod{modulated ? p0.k : 0.0, p0.lambda_per_us, p0.nu_mhz, p0.phi};

  ceres::Problem problem;
  const double rate = decay_rate(trace.kind);
  for (std::size_t i = 0; i < trace.times_us.size(); ++i) {
    problem.AddResidualBlock(new ceres::AutoDiffCostFunction<PointResidual, 1, 3, 4>(
                                 new PointResidual{trace.times_us[i], trace.amplitude[i], rate}),
                             nullptr, env.data(), mod.data());
  }
  problem.SetParameterLowerBound(env.data(), 2, kMinDecayTimeUs);
  problem.SetParameterUpperBound(env.data(), 2, kMaxDecayTimeUs);
  problem.SetParameterLowerBound(mod.data(), 0, 0.0);
  problem.SetParameterUpperBound(mod.data(), 0, kMaxModulationDepth);
  problem.SetParameterLowerBound(mod.data(), 1, 0.0);
  problem.SetParameterUpperBound(mod.data(), 1, kMaxModulationDampingPerUs);
  problem.SetParameterLowerBound(mod.data(), 2, 0.0);
  problem.SetParameterUpperBound(mod.data(), 2, bounds.nyquist_mhz);
  if (!modulated) problem.SetParameterBlockConstant(mod.data());

  ceres::Solver::Options opts;
  opts.trust_region_strategy_type = ceres::LEVENBERG_MARQUARDT;
  opts.linear_solver_type = ceres::DENSE_QR;
  opts.max_num_iterations = options.max_iterations;
  opts.function_tolerance = 1e-15;
  opts.parameter_tolerance = 1e-14;
  opts.gradient_tolerance = 1e-20;
  opts.num_threads = 1;
  opts.logging_type = ceres::SILENT;
  ceres::Solver::Summary summary;
  ceres::Solve(opts, &problem, &summary);

  Run run;
  run.params = DecayParams{env[0], env[1], env[2], mod[0], mod[1], mod[2], mod[3]};
  run.cost = summary.final_cost;
  run.iterations = static_cast<int>(summary.iterations.size());
  run.converged = summary.termination_type == ceres::CONVERGENCE;
  run.report = summary.BriefReport();

  // Jacobian with respect to all seven parameters at the solution.
  problem.SetParameterBlockVariable(mod.data());
  ceres::CRSMatrix crs;
  ceres::Problem::EvaluateOptions eval;
  eval.parameter_blocks = {env.data(), mod.data()};
  problem.Evaluate(eval, nullptr, nullptr, nullptr, &crs);
  run.jacobian = Eigen::MatrixXd::Zero(crs.num_rows, crs.num_cols);
  for (int r = 0; r < crs.num_rows; ++r) {
    for (int j = crs.rows[static_cast<std::size_t>(r)]; j < crs.rows[static_cast<std::size_t>(r) + 1]; ++j) {
      run.jacobian(r, crs.cols[static_cast<std::size_t>(j)]) = crs.values[static_cast<std::size_t>(j)];
    }
  }
  return run;
}

double mean_of(const std::vector<double>& v, std::size_t first, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = first; i < first + count; ++i) s += v[i];
  return s / static_cast<double>(count);
}

// Start point of the pure exponential: baseline from the tail, amplitude from
// the head, decay time from a log-linear fit of the smoothed envelope.
DecayParams envelope_start(const DecayTrace& trace) {
  const auto& t = trace.times_us;
  const auto& y = trace.amplitude;
  const std::size_t n = t.size();
  DecayParams p;
  const std::size_t tail = std::max<std::size_t>(4, n / 10);
  const std::size_t head = std::max<std::size_t>(2, n / 20);
  p.y0 = mean_of(y, n - tail, tail);
  p.a = mean_of(y, 0, head) - p.y0;
  if (p.a == 0.0) p.a = 1e-12;
  const double sign = p.a > 0.0 ? 1.0 : -1.0;

  const std::size_t half = std::max<std::size_t>(1, n / 32);
  std::vector<double> xs;
  std::vector<double> ls;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    const double env = sign * (mean_of(y, lo, hi - lo + 1) - p.y0);
    if (env > 0.1 * std::abs(p.a)) {
      xs.push_back(t[i]);
      ls.push_back(std::log(env));
    }
  }
  const double span = t.back() - t.front();
  p.t_decay_us = span;
  if (xs.size() >= 3) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / static_cast<double>(ls.size());
    double sxx = 0.0;
    double sxl = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxl += (xs[i] - mx) * (ls[i] - ml);
    }
    const double slope = sxx > 0.0 ? sxl / sxx : 0.0;
    if (slope < 0.0) p.t_decay_us = -decay_rate(trace.kind) / slope;
  }
  p.k = 0.0;
  p.lambda_per_us = 1.0 / (5.0 * span);
  return p;
}

// Frequencies of the strongest local maxima of the residual spectrum.
std::vector<double> residual_frequencies(const DecayTrace& trace, const DecayParams& base, std::size_t count) {
  const auto& t = trace.times_us;
  const std::size_t n = t.size();
  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  const double rate = decay_rate(trace.kind);
  std::vector<double> r(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // Linear resampling onto a uniform grid.
    const double ti = t.front() + dt * static_cast<double>(i);
    while (j + 2 < n && t[j + 1] < ti) ++j;
    const double w = std::clamp((ti - t[j]) / (t[j + 1] - t[j]), 0.0, 1.0);
    const double yi = (1.0 - w) * trace.amplitude[j] + w * trace.amplitude[j + 1];
    const double fit = base.y0 + base.a * std::exp(-rate * ti / base.t_decay_us);
    r[i] = (yi - fit) * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  for (auto& v : r) v -= mean;
  const std::size_t padded = 8 * n;
  const std::vector<double> mag = real_dft_magnitude(r, padded);
  std::vector<std::pair<double, std::size_t>> maxima;
  for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]) maxima.emplace_back(mag[i], i);
  }
  std::sort(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> freqs;
  for (std::size_t i = 0; i < std::min(count, maxima.size()); ++i) {
    freqs.push_back(static_cast<double>(maxima[i].second) / (static_cast<double>(padded) * dt));
  }
  return freqs;
}

// Depth and phase for a given frequency by linear least squares against the
// fitted envelope.
DecayParams modulation_start(const DecayTrace& trace, DecayParams p, double nu) {
  const auto& t = trace.times_us;
  const double rate = decay_rate(trace.kind);
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd basis(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    const double env = p.a * std::exp(-rate * ti / p.t_decay_us) * std::exp(-p.lambda_per_us * ti);
    basis(i, 0) = env * std::cos(2.0 * std::numbers::pi * nu * ti);
    basis(i, 1) = env * std::sin(2.0 * std::numbers::pi * nu * ti);
    rhs(i) = trace.amplitude[static_cast<std::size_t>(i)] - p.y0 - p.a * std::exp(-rate * ti / p.t_decay_us);
  }
  const Eigen::Vector2d c = basis.colPivHouseholderQr().solve(rhs);
  p.nu_mhz = nu;
  p.k = std::hypot(c(0), c(1));
  p.phi = std::atan2(-c(1), c(0));
  return p;
}

double wrap_phase(double phi) {
  const double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi, two_pi);
  if (phi <= -std::numbers::pi) phi += two_pi;
  if (phi > std::numbers::pi) phi -= two_pi;
  return phi;
}

double nyquist_of(const DecayTrace& trace) {
  std::vector<double> dts;
  for (std::size_t i = 1; i < trace.times_us.size(); ++i) dts.push_back(trace.times_us[i] - trace.times_us[i - 1]);
  std::nth_element(dts.begin(), dts.begin() + static_cast<long>(dts.size() / 2), dts.end());
  return 0.5 / dts[dts.size() / 2];
}

// Standard errors from s^2 (J^T J)^+ over the columns in `active`, with
// column scaling so that the pseudo-inverse cut-off is scale free.
DecayParams standard_errors(const Run& run, std::size_t n_points, const std::vector<int>& active) {
  DecayParams err{};
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd j(run.jacobian.rows(), m);
  for (Eigen::Index c = 0; c < m; ++c) j.col(c) = run.jacobian.col(active[static_cast<std::size_t>(c)]);
  Eigen::VectorXd scale(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const double norm = j.col(c).norm();
    scale(c) = norm > 0.0 ? 1.0 / norm : 0.0;
  }
  const Eigen::MatrixXd js = j * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(js.transpose() * js);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double cut = 1e-12 * std::max(ev.maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  }
  const Eigen::MatrixXd pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  const double dof = std::max<double>(1.0, static_cast<double>(n_points) - static_cast<double>(m));
  const double s2 = 2.0 * run.cost / dof;
  for (Eigen::Index c = 0; c < m; ++c) {
    err[active[static_cast<std::size_t>(c)]] = std::sqrt(std::max(0.0, s2 * pinv(c, c))) * scale(c);
  }
  return err;
}

DecayFit finish(const Run& run, const DecayTrace& trace, const Bounds& bounds, bool modulation_identified) {
  DecayFit fit;
  fit.params = run.params;
  fit.params.phi = wrap_phase(fit.params.phi);
  fit.residual_norm = std::sqrt(2.0 * run.cost);
  fit.iterations = run.iterations;
  const std::size_t n = trace.times_us.size();
  if (modulation_identified) {
    fit.errors = standard_errors(run, n, {0, 1, 2, 3, 4, 5, 6});
  } else {
    fit.params.k = 0.0;
    fit.params.nu_mhz = 0.0;
    fit.params.phi = 0.0;
    fit.errors = standard_errors(run, n, {0, 1, 2});
    // Parameters the data cannot constrain get their bound half-range.
    fit.errors.k = 0.5 * kMaxModulationDepth;
    fit.errors.lambda_per_us = 0.5 * kMaxModulationDampingPerUs;
    fit.errors.nu_mhz = 0.5 * bounds.nyquist_mhz;
    fit.errors.phi = std::numbers::pi;
    fit.flags.emplace_back("modulation_unidentified");
  }
  const double t = fit.params.t_decay_us;
  if (t <= kMinDecayTimeUs * (1.0 + 1e-9) || t >= kMaxDecayTimeUs * (1.0 - 1e-9)) fit.flags.emplace_back("t_decay_at_bound");
  if (modulation_identified) {
    if (fit.params.k >= kMaxModulationDepth * (1.0 - 1e-9)) fit.flags.emplace_back("k_at_bound");
    if (fit.params.nu_mhz >= bounds.nyquist_mhz * (1.0 - 1e-9)) fit.flags.emplace_back("nu_at_bound");
    if (fit.params.lambda_per_us >= kMaxModulationDampingPerUs * (1.0 - 1e-9)) fit.flags.emplace_back("lambda_at_bound");
  }
  return fit;
}

// Whether four extra modulation parameters reduce the residual by more than
// chance (F test at 95%).
bool modulation_significant(double cost_plain, double cost_full, std::size_t n_points, double scale) {
  if (cost_plain <= 1e-24 * scale) return false;
  if (cost_full <= 0.0) return true;
  const double dof = static_cast<double>(n_points) - DecayParams::kCount;
  if (dof < 1.0) return false;
  const double f = ((cost_plain - cost_full) / 4.0) / (cost_full / dof);
  // The frequency was picked from up to n/2 independent Fourier frequencies,
  // so the 5% level is shared among them.
  const double alpha = 0.05 / std::max(1.0, 0.5 * static_cast<double>(n_points));
  const boost::math::fisher_f_distribution<double> dist(4.0, dof);
  return f > boost::math::quantile(dist, 1.0 - alpha);
}

}  // namespace

double decay_model(const DecayParams& p, EchoKind kind, double t_us) {
  const std::array<double, 3> env{p.y0, p.a, p.t_decay_us};
  const std::array<double, 4> mod{p.k, p.lambda_per_us, p.nu_mhz, p.phi};
  return model(env.data(), mod.data(), decay_rate(kind), t_us);
}

DecayFit fit_decay(const DecayTrace& trace, const std::optional<DecayParams>& init, const FitOptions& options) {
  trace.validate();
  if (options.max_iterations < 1) throw ValidationError("max_iterations must be positive");
  const Bounds bounds{nyquist_of(trace)};
  const std::size_t n = trace.times_us.size();
  double scale = 0.0;
  for (double y : trace.amplitude) scale += y * y;

  std::vector<Run> runs;
  const Run plain = run_lm(trace, init ? *init : envelope_start(trace), bounds, false, options);
  if (init) {
    runs.push_back(run_lm(trace, *init, bounds, true, options));
  } else {
    DecayParams base = plain.params;
    if (!plain.converged) base = envelope_start(trace);
    for (double nu : residual_frequencies(trace, base, 3)) {
      runs.push_back(run_lm(trace, modulation_start(trace, base, nu), bounds, true, options));
      DecayParams zero_phase = modulation_start(trace, base, nu);
      zero_phase.phi = 0.0;
      runs.push_back(run_lm(trace, zero_phase, bounds, true, options));
    }
  }

  const Run* best = nullptr;
  for (const auto& r : runs) {
    if (r.converged && (best == nullptr || r.cost < best->cost)) best = &r;
  }
  const bool plain_ok = plain.converged;
  if (best == nullptr && !plain_ok) {
    const Run* fallback = &plain;
    for (const auto& r : runs) {
      if (r.cost < fallback->cost) fallback = &r;
    }
    DecayFit partial = finish(*fallback, trace, bounds, true);
    throw FitError("decay fit did not converge" + (trace.source.empty() ? std::string() : " for " + trace.source),
                   partial, fallback->report);
  }
  if (best == nullptr) return finish(plain, trace, bounds, false);
  if (plain_ok && !modulation_significant(plain.cost, best->cost, n, scale)) return finish(plain, trace, bounds, false);
  return finish(*best, trace, bounds, true);
}

std::vector<SweepRow> field_sweep_summary(const std::vector<std::pair<double, DecayFit>>& fits) {
  if (fits.size() < 2) throw ValidationError("field sweep summary needs at least two fields");
  std::vector<SweepRow> rows;
  rows.reserve(fits.size());
  for (const auto& [field, f] : fits) {
    rows.push_back({field, f.params.t_decay_us, f.errors.t_decay_us, f.params.a, f.errors.a, f.params.nu_mhz,
                    f.errors.nu_mhz});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.field_mt < b.field_mt; });
  return rows;
}

}  // namespace qudit
