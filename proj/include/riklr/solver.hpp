#pragma once

#include "riklr/objective.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace riklr {

struct SolverConfig {
  /// Proximal step gamma_k. A non-empty schedule overrides `gamma`; past its
  /// end the last entry repeats.
  double gamma = 1.0;
  std::vector<double> gamma_schedule;
  /// Outer stop: max(||a_{k+1} - a_k||, |f_k - f_{k+1}|) < epsilon_outer.
  double epsilon_outer = 1e-4;
  int max_outer = 500;
  /// Inner stop: proximal fixed-point residual (sup norm) <= epsilon_inner.
  double epsilon_inner = 1e-8;
  int max_inner = 5000;
  /// Starting point; empty means the zero vector.
  Eigen::VectorXd alpha0;
  /// Record every outer iterate in the trace (needed for rate_monitor).
  bool keep_iterates = false;

  double gamma_at(int k) const;
  void validate() const;
};

enum class SolveStatus { converged, max_iterations };

const char* to_string(SolveStatus status);

/// One outer iteration k -> k+1.
struct OuterStep {
  double f = 0.0;           // f(a_{k+1})
  double f_decrease = 0.0;  // f(a_k) - f(a_{k+1})
  double step_norm = 0.0;   // ||a_{k+1} - a_k||
  double gamma = 0.0;
  double residual = 0.0;    // stationarity_residual(a_{k+1})
  int inner_iterations = 0;
  bool inner_converged = true;

  /// f_decrease - ||a_{k+1} - a_k||^2 / (2 gamma); non-negative for an exact descent step.
  double descent_slack() const { return f_decrease - step_norm * step_norm / (2.0 * gamma); }
};

struct SolveTrace {
  double f_initial = 0.0;
  std::vector<OuterStep> steps;
  /// a_0, a_1, ... when SolverConfig::keep_iterates is set.
  std::vector<Eigen::VectorXd> iterates;
  SolveStatus status = SolveStatus::max_iterations;
  int inner_failures = 0;

  int outer_iterations() const { return static_cast<int>(steps.size()); }
  double final_objective() const { return steps.empty() ? f_initial : steps.back().f; }
  double final_residual() const { return steps.empty() ? 0.0 : steps.back().residual; }
  /// Smallest descent_slack over all steps (+inf for an empty trace).
  double min_descent_slack() const;
};

/// CSV with one row per outer iteration.
void write_trace_csv(std::ostream& os, const SolveTrace& trace);

/// L = w ||K||^2 / (4n) + lambda (max(mu_1, 0) + tau) + 1/gamma, an upper bound
/// on the Lipschitz constant of the smooth part of the linearized subproblem.
double smooth_lipschitz_bound(double k_spectral_norm, Eigen::Index n, double lambda, double mu_1,
                              double tau, double gamma, double loss_weight = 1.0);
double smooth_lipschitz_bound(const DcObjective& obj, double gamma);

struct InnerResult {
  Eigen::VectorXd alpha;
  double objective = 0.0;  // subproblem value at alpha
  double residual = 0.0;   // fixed-point residual at alpha
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the strongly convex subproblem
///
///   loss(a) + (lambda/2) ||B a||^2 + lambda1 ||a||_1 - omega^T (a - a_k) + ||a - a_k||^2 / (2 gamma)
///
/// by accelerated proximal gradient with step 1/L and a momentum restart
/// whenever the objective would increase, started at a_k. Accepted iterates
/// never increase the subproblem value.
InnerResult inner_solve(const DcObjective& obj, const Eigen::VectorXd& omega,
                        const Eigen::VectorXd& alpha_k, double gamma, const SolverConfig& cfg);

/// ||a - S_{t lambda1}(a - t (grad loss + lambda K+ a - lambda K- a))||_inf with
/// t = 1 / smooth_lipschitz_bound(obj, gamma). Zero exactly at critical points of f.
double stationarity_residual(const DcObjective& obj, const Eigen::VectorXd& alpha,
                             double gamma = 1.0);

struct FitResult {
  Eigen::VectorXd alpha;
  SolveTrace trace;
};

/// Proximal linearized DC iteration: omega_k = lambda K- a_k, then a_{k+1} = inner_solve.
/// Stops on the combined step/objective criterion, on an exactly repeated
/// iterate, or after max_outer iterations (status max_iterations, no throw).
FitResult pla_fit(const DcObjective& obj, const SolverConfig& cfg);

struct RateEstimate {
  enum class Status { ok, insufficient_data, degenerate };
  Status status = Status::insufficient_data;
  double ratio = 0.0;      // exp(slope) of log distance vs iteration
  double r_squared = 0.0;
  int points = 0;
};

const char* to_string(RateEstimate::Status status);

/// Least-squares fit of log d_k = a + k log m over the given distances;
/// zero distances are skipped.
RateEstimate fit_geometric_rate(std::span<const double> distances);

/// Estimates the local linear rate from the last `tail_fraction` of the run
/// using ||a_k - alpha_star||. Falls back to tail sums of step norms when the
/// trace holds no iterates.
RateEstimate rate_monitor(const SolveTrace& trace, const Eigen::VectorXd& alpha_star,
                          double tail_fraction = 0.5);

}  // namespace riklr
