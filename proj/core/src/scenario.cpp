#include "altstand/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "altstand/errors.hpp"

namespace altstand::scenario {

PiecewiseLinearProfile::PiecewiseLinearProfile(std::vector<Breakpoint> points)
    : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].t) || !std::isfinite(points_[i].value)) {
      throw ConfigError("profile breakpoints must be finite");
    }
    if (i > 0 && !(points_[i].t > points_[i - 1].t)) {
      throw ConfigError("profile breakpoint times must be strictly increasing");
    }
  }
}

double PiecewiseLinearProfile::operator()(double t) const {
  if (points_.empty()) throw ConfigError("cannot evaluate an empty profile");
  if (t <= points_.front().t) return points_.front().value;
  if (t >= points_.back().t) return points_.back().value;
  const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double x, const Breakpoint& b) { return x < b.t; });
  const auto lo = hi - 1;
  if (t == lo->t) return lo->value;
  const double w = (t - lo->t) / (hi->t - lo->t);
  return lo->value + w * (hi->value - lo->value);
}

double PiecewiseLinearProfile::max_abs_slope() const {
  double m = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double s = (points_[i].value - points_[i - 1].value) / (points_[i].t - points_[i - 1].t);
    m = std::max(m, std::abs(s));
  }
  return m;
}

double profile_eval(const PiecewiseLinearProfile& profile, double t) { return profile(t); }

std::string to_string(NoiseModel m) {
  return m == NoiseModel::kUniform ? "uniform" : "truncated-gaussian";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "truncated-gaussian") return NoiseModel::kTruncatedGaussian;
  if (s == "uniform") return NoiseModel::kUniform;
  throw ConfigError("unknown noise model '" + s + "' (expected truncated-gaussian or uniform)");
}

void NoiseConfig::validate() const {
  if (!(temp_bound >= 0.0 && press_bound >= 0.0)) throw ConfigError("noise bounds must be >= 0");
}

double apply_noise(double true_value, double bound, Rng& rng, NoiseModel model) {
  if (!(bound >= 0.0)) throw DomainError("noise bound must be >= 0");
  if (bound == 0.0) return true_value;
  if (model == NoiseModel::kUniform) {
    std::uniform_real_distribution<double> u(-bound, bound);
    return true_value + u(rng);
  }
  std::normal_distribution<double> n(0.0, bound / 3.0);
  return true_value + std::clamp(n(rng), -bound, bound);
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ConfigError("scenario duration must be > 0");
  if (!(dt > 0.0)) throw ConfigError("scenario dt must be > 0");
  if (p1_set.empty() || p2_set.empty() || mdot_out.empty()) {
    throw ConfigError("scenario profiles must not be empty");
  }
  for (const auto& b : mdot_out.points()) {
    if (b.value < 0.0) throw ConfigError("engine extraction profile must be >= 0");
  }
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw ConfigError("constraint bounds must be > 0");
  noise.validate();
}

namespace {

PiecewiseLinearProfile tracking_program() {
  return PiecewiseLinearProfile({{0.0, 65.0},
                                 {125.0, 65.0},
                                 {150.0, 70.0},
                                 {155.0, 70.0},
                                 {165.0, 75.0},
                                 {220.0, 75.0},
                                 {250.0, 65.0},
                                 {300.0, 65.0}});
}

// Phase 2 replaces the engine-model flow with a smooth 370 -> 280 kg/s drift.
PiecewiseLinearProfile extraction_program(double ramp) {
  return PiecewiseLinearProfile({{0.0, 780.0},
                                 {60.0, 370.0},
                                 {100.0, 370.0},
                                 {250.0, 280.0},
                                 {265.0, 280.0},
                                 {265.0 + ramp, 550.0},
                                 {280.0, 550.0},
                                 {280.0 + ramp, 280.0},
                                 {300.0, 280.0}});
}

Scenario base(const std::string& name, double ramp) {
  Scenario s;
  s.name = name;
  s.duration = 300.0;
  s.dt = 0.01;
  s.mdot_out = extraction_program(ramp);
  s.eps1 = 5.0;
  s.eps2 = 3.0;
  return s;
}

}  // namespace

Scenario paper_scenario() {
  Scenario s = base("paper", 5.0);
  s.p1_set = tracking_program();
  s.p2_set = PiecewiseLinearProfile({{0.0, 130.0}, {300.0, 130.0}});
  return s;
}

Scenario paper_steep_scenario() {
  Scenario s = base("paper-steep", 1.5);
  s.p1_set = tracking_program();
  s.p2_set = PiecewiseLinearProfile({{0.0, 130.0}, {300.0, 130.0}});
  return s;
}

Scenario physical_scenario() {
  Scenario s = base("physical", 5.0);
  s.p1_set = PiecewiseLinearProfile({{0.0, 130.0}, {300.0, 130.0}});
  s.p2_set = tracking_program();
  return s;
}

Scenario physical_steep_scenario() {
  Scenario s = physical_scenario();
  s.name = "physical-steep";
  s.mdot_out = extraction_program(1.5);
  return s;
}

Scenario scenario_preset(const std::string& name) {
  if (name == "paper") return paper_scenario();
  if (name == "paper-steep") return paper_steep_scenario();
  if (name == "physical") return physical_scenario();
  if (name == "physical-steep") return physical_steep_scenario();
  throw ConfigError("unknown scenario preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"paper", "paper-steep", "physical", "physical-steep"};
}

}  // namespace altstand::scenario
