#pragma once

#include <array>
#include <string>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/lti/state_space.hpp"

namespace buckdr::dr {

enum class Kind { None, DOB, UIO, LEC };
enum class Channel { v_o, i_L, v_SW };

const char* kind_name(Kind k);
/// Case-insensitive; throws Validation on unknown names.
Kind parse_kind(const std::string& name);

/// Estimator (one transfer function per input channel) plus compensator
/// turning the estimate into the injected control voltage.
struct DRScheme {
  Kind kind = Kind::None;
  std::vector<Channel> inputs;
  std::vector<lti::RationalTF> estimator;
  lti::RationalTF compensator;
  double p_H = 0.0;

  /// Realizations used for loop assembly; inputs ordered as `inputs`.
  lti::StateSpace estimator_ss;
  lti::StateSpace compensator_ss;
};

DRScheme no_scheme();

/// P21/P11 in closed form: (C (R_L + R_C) s + 1) / (R_L (1 + C R_C s)).
lti::RationalTF g1(const buck::BuckParams& p);
/// P12/P11 in closed form: -(s L + R_i + R_on).
lti::RationalTF g2(const buck::BuckParams& p);
/// (s L + R_i + R_on) / (k_FF (1 + s/p_H)).
lti::RationalTF lec_compensator(const buck::BuckParams& p, double p_H);
/// Realization of lec_compensator with an exactly represented DC gain.
lti::StateSpace lec_compensator_ss(const buck::BuckParams& p, double p_H);

/// Estimator [G_DOB, -Q] on (v_o, v_SW) with Q = p_H/(s + p_H); compensator -1/k_FF.
DRScheme build_dob(const buck::PlantMatrix& plant, double k_FF, double p_H);
lti::RationalTF dob_inverse_model(const buck::PlantMatrix& plant, double p_H);

/// Estimator [-G1, 1] on (v_o, i_L) with the LEC compensator.
DRScheme build_lec(const buck::BuckParams& p, double p_H);

/// Observer on the power stage augmented with a constant output-current state.
struct UIORealization {
  Eigen::MatrixXd A_a, B_a, C_a, C_o;
  Eigen::MatrixXd F;     // 3 x 2
  Eigen::MatrixXd A_cl;  // A_a - F C_a
  std::array<double, 3> lambda{};
  lti::StateSpace full;     // inputs (v_SW, v_o, i_L), output i_out estimate
  lti::StateSpace reduced;  // unobservable mode removed
};

struct UIODesign {
  UIORealization realization;
  DRScheme scheme;
};

/// Gain F with eig(A - F C) = lambda by eigenvector assignment on the dual
/// system. Two equal values get a two-dimensional eigenspace; three equal
/// values throw TooManyCoincident.
Eigen::MatrixXd place_observer_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                    const std::array<double, 3>& lambda);

UIODesign build_uio(const buck::BuckParams& p, const std::array<double, 3>& lambda, double p_H);

inline constexpr std::array<double, 3> kDefaultUioLambda{-1e6, -1e6, -0.95e6};

DRScheme build_scheme(Kind kind, const buck::BuckParams& nominal, double p_H,
                      const std::array<double, 3>& uio_lambda = kDefaultUioLambda);

}  // namespace buckdr::dr
