#pragma once

#include <limits>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/lti/frequency.hpp"
#include "buckdr/lti/rational_tf.hpp"

namespace buckdr::design {

/// Gc0 (1 + s/wz0)(1 + s/wz1) / (s (1 + s/wp0)(1 + s/wp1)).
struct TypeIIIParams {
  double Gc0 = 0.0;
  double wz0 = 0.0;
  double wz1 = 0.0;
  double wp0 = 0.0;
  double wp1 = 0.0;

  lti::RationalTF tf() const;
};

/// Op-amp compensation network values.
struct TypeIIIComponents {
  double R1 = 0.0, R2 = 0.0, R3 = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
};

TypeIIIParams type3_from_components(const TypeIIIComponents& c);

/// Inverse of type3_from_components with R1 fixed. Throws Unrealizable when a
/// component would come out nonpositive.
TypeIIIComponents components_from_params(const TypeIIIParams& p, double R1);

/// Classic placement: both zeros at omega_PS, wp0 = omega_sw/2,
/// wp1 = min(omega_ESR, omega_sw/2), and Gc0 giving unit loop gain at
/// sqrt(omega_PS * omega_sw / 10).
TypeIIIParams traditional_type3(const buck::PlantMatrix& plant, const buck::BuckParams& p, double Gf = 1.0);

struct WeightPair {
  lti::RationalTF W1;
  /// Improper; only ever evaluated pointwise.
  lti::RationalTF W2;
  double Sp0 = 2.5;
  double Tp0 = 2.5;
  double zeta_s = 0.3;
  double zeta_t = 0.3;
  double omega_s = 0.0;
  double omega_t = 0.0;
};

WeightPair build_weights(double omega_sw);

struct MaskEntry {
  int m = 0;
  int n = 0;
  double omega = 0.0;
  double bound = 0.0;
};

struct TMask {
  std::vector<MaskEntry> entries;

  /// Tightest bound among entries at or below omega (|T| is decreasing there);
  /// +inf below the first entry.
  double bound_at(double omega) const;
};

/// |T(i (m - n/2) omega_sw)| <= eps_{m,n} / D_{m,n} for 1 <= m <= m_max,
/// 0 <= n <= min(n_max, 2m - 1).
TMask t_mask(double R_bar, double V_pk, double omega_sw, int m_max = 5, int n_max = 3);

struct MaskCheck {
  MaskEntry entry;
  double T_abs = 0.0;
  double margin = 0.0;  // bound - |T|
};

/// L = Gf * K * plant; S = 1/(1+L); T = L/(1+L).
struct LoopPoint {
  lti::cplx L, S, T;
};
LoopPoint loop_at(const lti::RationalTF& K, const lti::RationalTF& plant, double Gf, double omega);

std::vector<MaskCheck> check_mask(const lti::RationalTF& K, const lti::RationalTF& plant, double Gf, const TMask& mask);

/// Closed-loop poles of 1 + Gf K plant from a balanced state-space realization.
bool loop_stable(const lti::RationalTF& K, const lti::RationalTF& plant, double Gf, double margin = 1.0);

/// max over the grid of sqrt(|W1 S|^2 + |W2 T|^2); +inf for unstable loops or
/// loops without integral action.
double mixed_sensitivity_objective(const lti::RationalTF& K, const lti::RationalTF& plant, double Gf,
                                   const WeightPair& w, const lti::FrequencyGrid& grid);

/// G (s + omega_PS)^2 / (s (s + p1)(s + p2)).
struct StructuredController {
  double G = 0.0;
  double omega_PS = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double gamma = std::numeric_limits<double>::infinity();
  bool at_ceiling = false;

  lti::RationalTF tf() const;
  TypeIIIParams as_type3() const;
};

struct TuneOptions {
  double p1_ratio = 0.5;  // p1 = p1_ratio * omega_sw
  double p2_ratio = 1.0;
  double Gf = 1.0;
  double lo_factor = 1e-3;
  double hi_factor = 1e6;
  int points_per_decade = 20;
  double rel_tol = 0.01;
  double stability_margin = 1.0;
};

/// Loop-gain scale placing the low-frequency crossover near omega_PS.
double baseline_gain(const buck::PlantMatrix& plant, double k_FF, double p1, double p2);

/// Largest G in [lo, hi] * baseline keeping the nominal loop stable and every
/// mask entry satisfied. Throws Infeasible if no candidate qualifies.
StructuredController tune_structured(const buck::PlantMatrix& plant, double k_FF, double omega_sw,
                                     const WeightPair& w, const TMask& mask, const lti::FrequencyGrid& grid,
                                     const TuneOptions& opt = {});

struct DesignOptions {
  double R_bar_ratio = 0.1;  // R_bar = R_bar_ratio * V_pk
  int m_max = 5;
  int n_max = 3;
  TuneOptions tune;
};

/// Weights, mask and tuned controller for one parameter set.
struct Design {
  WeightPair weights;
  TMask mask;
  StructuredController controller;
};

Design design_controller(const buck::BuckParams& p, const lti::FrequencyGrid& grid, const DesignOptions& opt = {});

}  // namespace buckdr::design
