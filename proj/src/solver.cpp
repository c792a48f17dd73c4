#include "riklr/solver.hpp"

#include "riklr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace riklr {

double SolverConfig::gamma_at(int k) const {
  if (gamma_schedule.empty()) return gamma;
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(k), gamma_schedule.size() - 1);
  return gamma_schedule[idx];
}

void SolverConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(gamma)) throw input_error("solver: gamma must be positive");
  for (double g : gamma_schedule) {
    if (!positive(g)) throw input_error("solver: every gamma_k must be positive");
  }
  if (!positive(epsilon_outer)) throw input_error("solver: epsilon_outer must be positive");
  if (!positive(epsilon_inner)) throw input_error("solver: epsilon_inner must be positive");
  if (max_outer < 1) throw input_error("solver: max_outer must be at least 1");
  if (max_inner < 1) throw input_error("solver: max_inner must be at least 1");
  if (alpha0.size() != 0 && !alpha0.allFinite()) throw input_error("solver: non-finite alpha0");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

double SolveTrace::min_descent_slack() const {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) slack = std::min(slack, s.descent_slack());
  return slack;
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
  const auto old_precision = os.precision(17);
  os << "k,f,f_decrease,step_norm,gamma,residual,inner_iterations,inner_converged\n";
  os << 0 << ',' << trace.f_initial << ",,,,,,\n";
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& s = trace.steps[k];
    os << k + 1 << ',' << s.f << ',' << s.f_decrease << ',' << s.step_norm << ',' << s.gamma << ','
       << s.residual << ',' << s.inner_iterations << ',' << (s.inner_converged ? 1 : 0) << '\n';
  }
  os.precision(old_precision);
}

double smooth_lipschitz_bound(double k_spectral_norm, Eigen::Index n, double lambda, double mu_1,
                              double tau, double gamma, double loss_weight) {
  const double loss_part =
      loss_weight * k_spectral_norm * k_spectral_norm / (4.0 * static_cast<double>(n));
  return loss_part + lambda * (std::max(mu_1, 0.0) + tau) + 1.0 / gamma;
}

double smooth_lipschitz_bound(const DcObjective& obj, double gamma) {
  const auto& d = obj.decomp();
  return smooth_lipschitz_bound(d.spectral_norm(), d.size(), obj.lambda(), d.mu_max(), d.tau,
                                gamma, obj.loss_weight());
}

namespace {

// Smooth part of the subproblem evaluated from cached products K a and K+ a.
struct Subproblem {
  const DcObjective& obj;
  const Eigen::VectorXd& omega;
  const Eigen::VectorXd& center;
  double inv_gamma;

  double smooth_value(const Eigen::VectorXd& a, const Eigen::VectorXd& ka,
                      const Eigen::VectorXd& pa) const {
    const Eigen::VectorXd diff = a - center;
    return obj.loss_from_scores(ka) + 0.5 * obj.lambda() * a.dot(pa) - omega.dot(diff) +
           0.5 * inv_gamma * diff.squaredNorm();
  }

  double value(const Eigen::VectorXd& a, const Eigen::VectorXd& ka,
               const Eigen::VectorXd& pa) const {
    return smooth_value(a, ka, pa) + obj.lambda1() * a.lpNorm<1>();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& a, const Eigen::VectorXd& ka,
                       const Eigen::VectorXd& pa) const {
    return obj.loss_grad_from_scores(ka) + obj.lambda() * pa - omega + inv_gamma * (a - center);
  }
};

double fixed_point_residual(const Eigen::VectorXd& a, const Eigen::VectorXd& grad, double step,
                            double lambda1) {
  return (a - soft_threshold(a - step * grad, step * lambda1)).lpNorm<Eigen::Infinity>();
}

}  // namespace

InnerResult inner_solve(const DcObjective& obj, const Eigen::VectorXd& omega,
                        const Eigen::VectorXd& alpha_k, double gamma, const SolverConfig& cfg) {
  const Eigen::Index n = obj.size();
  if (omega.size() != n || alpha_k.size() != n) {
    throw input_error("inner_solve: vector length does not match the objective");
  }
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw input_error("inner_solve: gamma must be positive");

  const auto& K = obj.decomp().K;
  const auto& Kp = obj.decomp().Kplus;
  const Subproblem sub{obj, omega, alpha_k, 1.0 / gamma};
  const double step = 1.0 / smooth_lipschitz_bound(obj, gamma);
  const double shrink = step * obj.lambda1();

  Eigen::VectorXd x = alpha_k;
  Eigen::VectorXd kx = K * x;
  Eigen::VectorXd px = Kp * x;
  double fx = sub.value(x, kx, px);
  Eigen::VectorXd gx = sub.grad(x, kx, px);

  InnerResult out;
  double residual = fixed_point_residual(x, gx, step, obj.lambda1());
  if (residual <= cfg.epsilon_inner) {
    out.alpha = std::move(x);
    out.objective = fx;
    out.residual = residual;
    out.converged = true;
    return out;
  }

  Eigen::VectorXd y = x, ky = kx, py = px, gy = gx;
  Eigen::VectorXd x_prev, kx_prev, px_prev;
  double theta = 1.0;
  int it = 0;
  bool converged = false;
  while (it < cfg.max_inner) {
    ++it;
    Eigen::VectorXd z = soft_threshold(y - step * gy, shrink);
    Eigen::VectorXd kz = K * z;
    Eigen::VectorXd pz = Kp * z;
    double fz = sub.value(z, kz, pz);
    if (!std::isfinite(fz)) throw numerical_error("inner_solve: non-finite objective");

    if (fz > fx) {
      // Momentum overshot: restart with a plain proximal step from x.
      theta = 1.0;
      z = soft_threshold(x - step * gx, shrink);
      kz = K * z;
      pz = Kp * z;
      fz = sub.value(z, kz, pz);
      if (!(fz <= fx)) break;  // no representable descent left
    }

    x_prev = std::move(x);
    kx_prev = std::move(kx);
    px_prev = std::move(px);
    x = std::move(z);
    kx = std::move(kz);
    px = std::move(pz);
    fx = fz;
    gx = sub.grad(x, kx, px);
    residual = fixed_point_residual(x, gx, step, obj.lambda1());
    if (residual <= cfg.epsilon_inner) {
      converged = true;
      break;
    }

    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = (theta - 1.0) / theta_next;
    theta = theta_next;
    y = x + beta * (x - x_prev);
    ky = kx + beta * (kx - kx_prev);
    py = px + beta * (px - px_prev);
    gy = sub.grad(y, ky, py);
  }

  if (!x.allFinite()) throw numerical_error("inner_solve: non-finite iterate");
  out.alpha = std::move(x);
  out.objective = fx;
  out.residual = residual;
  out.iterations = it;
  out.converged = converged;
  return out;
}

double stationarity_residual(const DcObjective& obj, const Eigen::VectorXd& alpha, double gamma) {
  const Eigen::VectorXd grad = obj.smooth_grad_g(alpha) - obj.grad_h(alpha);
  const double step = 1.0 / smooth_lipschitz_bound(obj, gamma);
  return fixed_point_residual(alpha, grad, step, obj.lambda1());
}

FitResult pla_fit(const DcObjective& obj, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = obj.size();
  if (cfg.alpha0.size() != 0 && cfg.alpha0.size() != n) {
    throw input_error("pla_fit: alpha0 has the wrong length");
  }

  FitResult result;
  Eigen::VectorXd alpha = cfg.alpha0.size() == 0 ? Eigen::VectorXd::Zero(n) : cfg.alpha0;
  double f = obj.f_value(alpha);
  if (!std::isfinite(f)) throw numerical_error("pla_fit: non-finite initial objective");
  auto& trace = result.trace;
  trace.f_initial = f;
  if (cfg.keep_iterates) trace.iterates.push_back(alpha);
  trace.status = SolveStatus::max_iterations;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const double gamma = cfg.gamma_at(k);
    const Eigen::VectorXd omega = obj.grad_h(alpha);
    InnerResult inner = inner_solve(obj, omega, alpha, gamma, cfg);

    const double f_next = obj.f_value(inner.alpha);
    if (!std::isfinite(f_next)) throw numerical_error("pla_fit: non-finite objective");

    OuterStep s;
    s.f = f_next;
    s.f_decrease = f - f_next;
    s.step_norm = (inner.alpha - alpha).norm();
    s.gamma = gamma;
    s.residual = stationarity_residual(obj, inner.alpha, gamma);
    s.inner_iterations = inner.iterations;
    s.inner_converged = inner.converged;
    if (!inner.converged) ++trace.inner_failures;
    trace.steps.push_back(s);

    const bool repeated = (inner.alpha.array() == alpha.array()).all();
    alpha = std::move(inner.alpha);
    f = f_next;
    if (cfg.keep_iterates) trace.iterates.push_back(alpha);

    if (repeated || std::max(s.step_norm, std::abs(s.f_decrease)) < cfg.epsilon_outer) {
      trace.status = SolveStatus::converged;
      break;
    }
  }
  result.alpha = std::move(alpha);
  return result;
}

const char* to_string(RateEstimate::Status status) {
  switch (status) {
    case RateEstimate::Status::ok: return "ok";
    case RateEstimate::Status::insufficient_data: return "insufficient_data";
    case RateEstimate::Status::degenerate: return "degenerate";
  }
  return "unknown";
}

RateEstimate fit_geometric_rate(std::span<const double> distances) {
  RateEstimate est;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    if (distances[k] > 0.0 && std::isfinite(distances[k])) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(distances[k]));
    }
  }
  est.points = static_cast<int>(xs.size());
  if (distances.size() >= 4 && xs.empty()) {
    est.status = RateEstimate::Status::degenerate;
    return est;
  }
  if (xs.size() < 4) {
    est.status = RateEstimate::Status::insufficient_data;
    return est;
  }
  const auto count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ss_res += r * r;
  }
  est.ratio = std::exp(slope);
  est.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  est.status = RateEstimate::Status::ok;
  return est;
}

RateEstimate rate_monitor(const SolveTrace& trace, const Eigen::VectorXd& alpha_star,
                          double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw input_error("rate_monitor: tail_fraction must lie in (0, 1]");
  }
  std::vector<double> distances;
  if (!trace.iterates.empty()) {
    for (const auto& a : trace.iterates) distances.push_back((a - alpha_star).norm());
  } else {
    // ||a_k - a_K|| is bounded by the sum of the remaining step norms.
    distances.assign(trace.steps.size() + 1, 0.0);
    for (std::size_t k = trace.steps.size(); k-- > 0;) {
      distances[k] = distances[k + 1] + trace.steps[k].step_norm;
    }
  }
  const auto total = distances.size();
  const auto tail = std::min<std::size_t>(
      total, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(total))));
  return fit_geometric_rate(std::span<const double>(distances).subspan(total - tail));
}

}  // namespace riklr
