#pragma once

#include <optional>
#include <string>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/lti/rational_tf.hpp"

namespace buckdr::sim {

enum class Mode { Switched, Averaged };

const char* mode_name(Mode m);
/// "switched" or "averaged"; throws Validation otherwise.
Mode parse_mode(const std::string& name);

/// Extra output current on top of the resistive load: zero until step_time,
/// then a ramp at step_slope up to step_amplitude.
struct LoadProfile {
  double step_amplitude = 8.0;
  double step_slope = 1e6;
  double step_time = 3e-3;

  double at(double t) const;
  void validate() const;
};

struct SimConfig {
  Mode mode = Mode::Averaged;
  double t_end = 4e-3;
  int steps_per_period = 200;  // switched mode
  double dt = 0.0;             // averaged mode; 0 picks T_sw / 50
  double V_ref = 5.0;
  double soft_start = 2e-3;    // reference ramp time
  double Gf = 1.0;
  int record_stride = 1;       // integration steps per recorded sample

  /// Throws Validation; needs the switching period to check the event window.
  void validate(double T_sw, const LoadProfile& load) const;
};

/// Uniformly sampled signals; d is the comparator state over the step that
/// starts at each sample (always 1 where v_c_tot >= v_saw).
struct SimTrace {
  std::vector<double> t, v_o, v_c_tot, v_inj, v_saw, v_SW, i_L, i_out_hat, i_out_true;
  std::vector<int> d;
  double event_time = 0.0;

  std::size_t size() const { return t.size(); }
};

/// Post-event window only. Percentages are of the voltage target.
struct Metrics {
  double undershoot_pct = 0.0;
  double overshoot_pct = 0.0;
  double settling_time = 0.0;       // after the event, last sample outside +-2 %
  double saturation_fraction = 0.0; // v_c_tot outside [0, V_pk]
  double steady_state_error = 0.0;  // |mean v_o over the final period - target|
};

/// Full loop from a zero initial state: power stage on `plant`, controller K
/// and the scheme's blocks integrated by fixed-step RK4. Switched mode runs the
/// trailing-edge comparator against a sawtooth of height V_in/k_FF and splits
/// the step at each crossing. Averaged mode uses v_SW = V_in sat(v_c_tot/V_pk).
/// Throws NumericalBlowup when a state leaves +-1e9, Validation on bad config.
SimTrace simulate(const buck::BuckParams& plant, const lti::RationalTF& K, const dr::DRScheme& scheme,
                  const SimConfig& cfg, const LoadProfile& load);

/// `period` is the switching period used for the steady-state average.
Metrics metrics(const SimTrace& trace, double V_o_target, double V_pk, double period);

}  // namespace buckdr::sim
