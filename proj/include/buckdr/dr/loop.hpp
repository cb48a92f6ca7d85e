#pragma once

#include <array>
#include <optional>

#include "buckdr/buck/model.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/lti/state_space.hpp"

namespace buckdr::dr {

/// Signals exposed by a LoopModel, in row order.
enum LoopOutput { kVo = 0, kIL, kVc, kIhat, kVinj, kVcTot, kLoopOutputs };
/// External inputs of a LoopModel, in column order.
enum LoopInput { kVsw = 0, kRef, kIout, kLoopInputs };

/// Plant, optional voltage controller and DR scheme wired together with the
/// half-bridge output v_SW left open. Without a controller the kRef input is
/// the control voltage v_c itself.
struct LoopModel {
  Eigen::MatrixXd A, B;  // x' = A x + B u
  Eigen::MatrixXd C, D;  // y = C x + D u, rows as LoopOutput
  int plant_states = 2;

  static LoopModel build(const buck::BuckParams& plant, const std::optional<lti::RationalTF>& K, double Gf,
                         const DRScheme& scheme);

  int states() const { return static_cast<int>(A.rows()); }
  /// Whether v_c_tot responds instantaneously to v_SW (forbids comparator simulation).
  bool vsw_feedthrough() const { return D(kVcTot, kVsw) != 0.0; }

  lti::StateSpace open() const { return {A, B, C, D}; }
  /// v_SW = k_FF v_c_tot closed; inputs (kRef, kIout), all outputs. Throws IllPosed.
  lti::StateSpace averaged(double k_FF) const;
};

/// (v_c, i_out) -> v_o of the averaged inner loop.
lti::StateSpace assemble_inner_loop(const buck::BuckParams& plant, const DRScheme& scheme, double k_FF);

/// (v_o/v_c, v_o/i_out) of the averaged inner loop at s, closed pointwise
/// from the block responses. More accurate than the assembled realization
/// when the scheme cancels the plant dynamics. Throws IllPosed.
std::array<lti::cplx, 2> inner_loop_response(const buck::BuckParams& plant, const DRScheme& scheme, double k_FF,
                                              lti::cplx s);

/// Largest real part among the averaged closed-loop eigenvalues.
double max_real_eig(const lti::StateSpace& sys);

}  // namespace buckdr::dr
