#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "buckdr/lti/rational_tf.hpp"
#include "buckdr/lti/state_space.hpp"

namespace buckdr::buck {

/// Component values and operating point of a synchronous Buck converter (SI units).
struct BuckParams {
  double C = 0.249e-3;
  double L = 8.2e-6;
  double R_C = 0.115e-3;
  double R_i = 7e-3;
  double R_on = 6.5e-3;
  double R_L = 4.623333333333333;
  double f_sw = 5e5;
  double k_FF = 30.0;
  double V_in = 20.0;
  double V_in_max = 20.0;
  double V_o_target = 5.0;
  double I_max = 10.0;

  double omega_sw() const;
  /// Sawtooth amplitude under input-voltage feedforward.
  double V_pk() const { return V_in / k_FF; }
  double R_i_prime() const { return R_i + R_on; }

  /// Throws InvalidParameter on nonpositive components or V_o_target >= V_in > V_in_max.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  static Interval around(double nominal, double rel) { return {nominal * (1.0 - rel), nominal * (1.0 + rel)}; }
};

struct UncertaintyBox {
  Interval C, L, R_C, R_i, R_on, R_L;

  /// Throws InvalidParameter unless lo <= nominal <= hi for every entry.
  void validate(const BuckParams& nominal) const;
};

struct CcmInterval {
  double lo = 0.0;
  double hi = 0.0;
  double nominal = 0.0;
};

/// Load-resistance range keeping the converter in continuous conduction for
/// every inductance in the box. Throws InvalidRatio if V_o_target >= V_in_max.
CcmInterval ccm_load_interval(const BuckParams& p, const UncertaintyBox& box);

/// Table values with R_L at the midpoint of the CCM interval.
BuckParams nominal_params();
/// Percentage box around `nominal` (C 10%, L 20%, R_C, R_i, R_on 15%) with R_L spanning the CCM interval.
UncertaintyBox default_box(const BuckParams& nominal);

/// [v_o; i_L] = P [v_SW; i_out], all entries over one shared denominator.
struct PlantMatrix {
  lti::RationalTF P11, P12, P21, P22;
  double omega_ESR = 0.0;
  double omega_PS = 0.0;
  double zeta_PS = 0.0;
  double R_i_prime = 0.0;
  std::array<double, 3> alpha{};
};

PlantMatrix build_plant(const BuckParams& p);

/// Averaged power stage with states [i_L, v_C], inputs [i_out, v_SW], outputs [v_o, i_L].
lti::StateSpace plant_state_space(const BuckParams& p);

/// Magnitude bound of the (m, n) PWM harmonic for a sinusoidal control input of amplitude R_bar.
double pwm_bound(int m, int n, double R_bar, double V_pk);

/// Allowed relative error of the (m, n) harmonic in the control voltage.
double epsilon_schedule(int m, int n);

/// Independent uniform draws of C, L, R_C, R_i, R_on, R_L (in that order) from the box;
/// the remaining fields are copied from `base`.
BuckParams sample_params(const UncertaintyBox& box, const BuckParams& base, std::mt19937_64& rng);
BuckParams sample_params(const UncertaintyBox& box, const BuckParams& base, std::uint64_t seed);

}  // namespace buckdr::buck
