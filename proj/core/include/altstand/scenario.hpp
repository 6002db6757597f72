#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace altstand::scenario {

struct Breakpoint {
  double t = 0.0;
  double value = 0.0;
};

/// Piecewise-linear function of time, clamped to its end values.
class PiecewiseLinearProfile {
 public:
  PiecewiseLinearProfile() = default;
  explicit PiecewiseLinearProfile(std::vector<Breakpoint> points);

  double operator()(double t) const;
  const std::vector<Breakpoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  /// Largest |slope| over all segments.
  double max_abs_slope() const;

 private:
  std::vector<Breakpoint> points_;
};

double profile_eval(const PiecewiseLinearProfile& profile, double t);

enum class NoiseModel { kTruncatedGaussian, kUniform };
std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

struct NoiseConfig {
  double temp_bound = 0.1;   // K
  double press_bound = 2.0;  // kPa
  std::uint64_t seed = 1;
  NoiseModel model = NoiseModel::kTruncatedGaussian;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Adds bounded noise: truncated Gaussian uses sigma = bound / 3 and a hard
/// clip to [-bound, bound]; uniform draws from [-bound, bound]. A zero bound
/// returns the true value without consuming the generator.
double apply_noise(double true_value, double bound, Rng& rng,
                   NoiseModel model = NoiseModel::kTruncatedGaussian);

struct Scenario {
  std::string name = "custom";
  double duration = 300.0;  // s
  double dt = 0.01;         // s
  PiecewiseLinearProfile p1_set;    // kPa
  PiecewiseLinearProfile p2_set;    // kPa
  PiecewiseLinearProfile mdot_out;  // kg/s
  NoiseConfig noise{};
  double eps1 = 5.0;  // kPa
  double eps2 = 3.0;  // kPa

  void validate() const;
};

/// Three-phase test program: V1 tracks 65 -> 70 -> 75 -> 65 kPa, V2 holds
/// 130 kPa.
Scenario paper_scenario();
/// Same, with 1.5 s extraction ramps (peak rate 180 kg/s^2).
Scenario paper_steep_scenario();
/// Pressure-consistent ordering: upstream V1 holds 130 kPa, the engine-inlet
/// chamber V2 tracks the 65 -> 75 -> 65 kPa program.
Scenario physical_scenario();
Scenario physical_steep_scenario();

/// "paper", "paper-steep", "physical", "physical-steep".
Scenario scenario_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace altstand::scenario
