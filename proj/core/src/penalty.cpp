#include "altstand/penalty.hpp"

#include <algorithm>
#include <cmath>

#include "altstand/errors.hpp"

namespace altstand::penalty {

namespace {

struct Exponent {
  double m = 0.0;
  bool saturated = false;
};

Exponent clamped_exponent(double eta, double g) {
  const double raw = std::max(0.0, eta * g);
  if (raw > kMaxExponent) return {kMaxExponent, true};
  return {raw, false};
}

}  // namespace

void PenaltyProblem::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("penalty factor gamma must be > 0");
  if (!(mu > 0.0 && sigma > 0.0)) throw ConfigError("penalty weights mu, sigma must be > 0");
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw ConfigError("allowable deviations eps must be > 0");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(omega >= 1.0)) throw ConfigError("penalty growth factor omega must be >= 1");
  if (!(xi > 0.0)) throw ConfigError("termination threshold xi must be > 0");
  if (!(gamma_max >= gamma)) throw ConfigError("gamma_max must be >= gamma");
  if (!(tol > 0.0)) throw ConfigError("convergence tolerance must be > 0");
  if (max_iters == 0) throw ConfigError("max_iters must be > 0");
}

void PenaltyProblem::center_on(double p1, double p2) {
  p1_set = c1 = p1;
  p2_set = c2 = p2;
}

double objective(double p1, double p2, const PenaltyProblem& prob) {
  const double d1 = p1 - prob.p1_set;
  const double d2 = p2 - prob.p2_set;
  return d1 * d1 + d2 * d2;
}

std::array<double, 2> constraint_values(double p1, double p2, const PenaltyProblem& prob) {
  const double d1 = p1 - prob.c1;
  const double d2 = p2 - prob.c2;
  return {d1 * d1 - prob.eps1 * prob.eps1, d2 * d2 - prob.eps2 * prob.eps2};
}

PenaltyValue penalty_alpha(double p1, double p2, const PenaltyProblem& prob) {
  const auto g = constraint_values(p1, p2, prob);
  const Exponent e1 = clamped_exponent(prob.mu, g[0]);
  const Exponent e2 = clamped_exponent(prob.sigma, g[1]);
  const double t1 = std::expm1(e1.m);
  const double t2 = std::expm1(e2.m);
  return {t1 * t1 + t2 * t2, e1.saturated || e2.saturated};
}

PenaltyValue augmented_objective(double p1, double p2, const PenaltyProblem& prob) {
  if (!(prob.gamma > 0.0)) throw ConfigError("penalty factor gamma must be > 0");
  const auto a = penalty_alpha(p1, p2, prob);
  return {objective(p1, p2, prob) + prob.gamma * a.value, a.saturated};
}

std::array<double, 2> grad_L(double p1, double p2, const PenaltyProblem& prob) {
  const auto g = constraint_values(p1, p2, prob);
  const std::array<double, 2> p{p1, p2};
  const std::array<double, 2> set{prob.p1_set, prob.p2_set};
  const std::array<double, 2> centre{prob.c1, prob.c2};
  const std::array<double, 2> eta{prob.mu, prob.sigma};
  std::array<double, 2> out{};
  for (std::size_t i = 0; i < 2; ++i) {
    out[i] = 2.0 * (p[i] - set[i]);
    // The penalty is C1 at g = 0 since expm1(0) = 0; only g > 0 contributes.
    if (g[i] > 0.0) {
      const double m = clamped_exponent(eta[i], g[i]).m;
      out[i] += prob.gamma * 2.0 * std::expm1(m) * std::exp(m) * eta[i] * 2.0 * (p[i] - centre[i]);
    }
  }
  return out;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIters:
      return "max_iters";
    case SolveStatus::kPenaltyBelowXi:
      return "penalty_below_xi";
  }
  return "unknown";
}

SolveTrace solve_offline(const PenaltyProblem& prob, std::array<double, 2> start) {
  prob.validate();
  SolveTrace trace;
  PenaltyProblem at = prob;
  std::size_t total = 0;

  auto record = [&](const std::array<double, 2>& p) {
    const double f = objective(p[0], p[1], at);
    const double a = penalty_alpha(p[0], p[1], at).value;
    trace.iterates.push_back({total, p[0], p[1], f, a, f + at.gamma * a, at.gamma});
    return f + at.gamma * a;
  };

  std::array<double, 2> p = start;
  record(p);
  std::array<double, 2> outer_prev = p;
  for (std::size_t outer = 0;; ++outer) {
    const double lr = prob.lr * std::min(1.0, prob.gamma / at.gamma);
    double L_prev = trace.iterates.back().L;
    std::size_t rising = 0;
    for (;;) {
      if (total >= prob.max_iters) {
        trace.status = SolveStatus::kMaxIters;
        return trace;
      }
      const auto g = grad_L(p[0], p[1], at);
      const std::array<double, 2> next{p[0] - lr * g[0], p[1] - lr * g[1]};
      ++total;
      const double L = record(next);
      if (!std::isfinite(L) || !std::isfinite(next[0]) || !std::isfinite(next[1])) {
        throw SolverDivergence("iterate became non-finite at gamma=" + std::to_string(at.gamma) +
                               "; learning rate too large for the penalty curvature");
      }
      rising = L > L_prev ? rising + 1 : 0;
      if (rising >= kDivergenceWindow) {
        throw SolverDivergence("augmented objective increased for " +
                               std::to_string(kDivergenceWindow) +
                               " consecutive iterations at gamma=" + std::to_string(at.gamma) +
                               "; learning rate too large");
      }
      const double step = std::hypot(next[0] - p[0], next[1] - p[1]);
      p = next;
      L_prev = L;
      if (step < prob.tol) break;
    }

    const double a = penalty_alpha(p[0], p[1], at).value;
    if (a == 0.0) {
      trace.status = SolveStatus::kConverged;
      return trace;
    }
    if (at.gamma * a < prob.xi) {
      trace.status = SolveStatus::kPenaltyBelowXi;
      return trace;
    }
    if (outer > 0 && std::hypot(p[0] - outer_prev[0], p[1] - outer_prev[1]) < prob.tol) {
      trace.status = SolveStatus::kConverged;
      return trace;
    }
    if (at.gamma >= prob.gamma_max) {
      trace.status = SolveStatus::kConverged;
      return trace;
    }
    outer_prev = p;
    at.gamma = std::min(prob.omega * at.gamma, prob.gamma_max);
  }
}

CoordinatorOutput coordinator_tick(double z11, double z21, const PenaltyProblem& prob,
                                   const CoordinatorState& state,
                                   const CoordinatorSchedule& schedule) {
  PenaltyProblem at = prob;
  at.gamma = state.gamma;

  CoordinatorOutput out;
  out.gradient = grad_L(z11, z21, at);
  out.L = augmented_objective(z11, z21, at).value;

  CoordinatorState next = state;
  const auto g = constraint_values(z11, z21, at);
  if (g[0] > 0.0 || g[1] > 0.0) {
    next.feasible_ticks = 0;
    ++next.violating_ticks;
    if (schedule.n_grow > 0 && next.violating_ticks % schedule.n_grow == 0) {
      next.gamma = std::min(next.gamma * prob.omega, schedule.gamma_max);
    }
  } else {
    next.violating_ticks = 0;
    ++next.feasible_ticks;
    if (next.feasible_ticks >= schedule.m_reset) next.gamma = next.gamma0;
  }
  out.state = next;
  return out;
}

}  // namespace altstand::penalty
