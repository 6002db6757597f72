#pragma once

// Exterior exponential-penalty formulation of the chamber pressure bounds.
//
//   f(P)     = (P1 - P1set)^2 + (P2 - P2set)^2
//   g_i(P)   = (P_i - c_i)^2 - eps_i^2                (feasible iff g_i <= 0)
//   alpha(P) = sum_i (exp(max(0, eta_i g_i)) - 1)^2  with eta = (mu, sigma)
//   L(P)     = f + gamma * alpha
//
// Pressures are in kPa.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace altstand::penalty {

struct PenaltyProblem {
  double p1_set = 65.0;
  double p2_set = 130.0;
  double c1 = 65.0;  // constraint centres, default = setpoints
  double c2 = 130.0;
  double eps1 = 5.0;
  double eps2 = 3.0;
  double gamma = 0.5;
  double mu = 0.001;
  double sigma = 0.01;
  double lr = 0.2;
  double omega = 2.0;
  double xi = 1e-6;
  double gamma_max = 1e8;
  std::size_t max_iters = 100000;
  double tol = 1e-10;  // iterate-change convergence threshold

  void validate() const;
  /// Sets setpoints and constraint centres together.
  void center_on(double p1, double p2);
};

/// Exponent arguments are clamped here so that alpha and its gradient stay
/// finite; clamping raises `saturated`.
inline constexpr double kMaxExponent = 300.0;

struct PenaltyValue {
  double value = 0.0;
  bool saturated = false;
};

double objective(double p1, double p2, const PenaltyProblem& prob);
std::array<double, 2> constraint_values(double p1, double p2, const PenaltyProblem& prob);
PenaltyValue penalty_alpha(double p1, double p2, const PenaltyProblem& prob);
/// Uses prob.gamma; rejects gamma <= 0.
PenaltyValue augmented_objective(double p1, double p2, const PenaltyProblem& prob);
std::array<double, 2> grad_L(double p1, double p2, const PenaltyProblem& prob);

struct TraceRow {
  std::size_t iter = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  double f = 0.0;
  double alpha = 0.0;
  double L = 0.0;
  double gamma = 0.0;
};

enum class SolveStatus { kConverged, kMaxIters, kPenaltyBelowXi };
std::string to_string(SolveStatus s);

struct SolveTrace {
  std::vector<TraceRow> iterates;
  SolveStatus status = SolveStatus::kMaxIters;

  const TraceRow& final() const { return iterates.back(); }
};

/// Raised when L increases for kDivergenceWindow consecutive iterations at a
/// fixed penalty factor, or when an iterate stops being finite.
class SolverDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
inline constexpr std::size_t kDivergenceWindow = 50;

/// Sequential penalty solve. For each penalty factor gamma_k the state is
/// moved by componentwise gradient steps P <- P - lr_k grad L until the step
/// falls below tol; then gamma_{k+1} = min(omega gamma_k, gamma_max).
/// lr_k = lr * min(1, gamma_0 / gamma_k) so the step stays below the
/// Lipschitz bound of grad L, which grows linearly with gamma.
///
/// Stops on: an outer iterate that no longer moves (converged), an inactive
/// penalty after an inner solve (converged), 0 < gamma_k alpha < xi
/// (penalty_below_xi), or max_iters total gradient steps.
SolveTrace solve_offline(const PenaltyProblem& prob, std::array<double, 2> start);

struct CoordinatorSchedule {
  std::size_t n_grow = 50;    // violating ticks per gamma growth
  std::size_t m_reset = 200;  // consecutive feasible ticks before reset
  double gamma_max = 1e4;
};

struct CoordinatorState {
  double gamma = 0.5;
  double gamma0 = 0.5;
  std::size_t violating_ticks = 0;
  std::size_t feasible_ticks = 0;

  static CoordinatorState start(double gamma0) { return {gamma0, gamma0, 0, 0}; }
};

struct CoordinatorOutput {
  std::array<double, 2> gradient{};
  double L = 0.0;
  CoordinatorState state{};
};

/// Per-tick coordination: gradient of L at the observer estimates with the
/// current gamma, followed by the gamma schedule update.
CoordinatorOutput coordinator_tick(double z11, double z21, const PenaltyProblem& prob,
                                   const CoordinatorState& state,
                                   const CoordinatorSchedule& schedule);

}  // namespace altstand::penalty
