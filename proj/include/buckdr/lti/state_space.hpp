#pragma once

#include <Eigen/Dense>
#include <vector>

#include "buckdr/lti/frequency.hpp"
#include "buckdr/lti/rational_tf.hpp"

namespace buckdr::lti {

/// x' = A x + B u,  y = C x + D u.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  StateSpace() = default;
  StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d);

  /// Memoryless gain D (p x m) with no states.
  static StateSpace static_gain(const Eigen::MatrixXd& d);

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionMismatch unless A is square and B, C, D agree with it.
  void validate() const;

  /// C (sI - A)^{-1} B + D.
  Eigen::MatrixXcd response(cplx s) const;
  cplx response(cplx s, int in, int out) const;

  Eigen::VectorXcd eigenvalues() const;
  bool is_stable(double margin = 0.0) const;
};

/// Controllable canonical realization; throws ImproperTF when deg num > deg den.
StateSpace tf_to_ss(const RationalTF& g);

/// Scalar transfer function from input `in` to output `out` (normalized).
RationalTF ss_to_tf(const StateSpace& sys, int in = 0, int out = 0);

/// Diagonal similarity (powers of two) that balances row and column norms of A.
StateSpace balanced(const StateSpace& sys);

/// tf_to_ss followed by balancing; the realization used for loop assembly.
StateSpace realize(const RationalTF& g);

/// `second` driven by the outputs of `first`.
StateSpace series(const StateSpace& first, const StateSpace& second);

/// Block-diagonal stacking: inputs and outputs of a then b.
StateSpace append(const StateSpace& a, const StateSpace& b);

/// Outputs mapped through M (y -> M y).
StateSpace premultiply(const Eigen::MatrixXd& m, const StateSpace& sys);
/// Inputs mapped through N (u = N v).
StateSpace postmultiply(const StateSpace& sys, const Eigen::MatrixXd& n);

/// Lower linear fractional transformation. The plant's last n_u inputs are
/// driven by the controller, whose inputs are the plant's last n_y outputs.
/// Throws IllPosed when I - D_K D_22 is singular.
StateSpace lower_lft(const StateSpace& plant, const StateSpace& controller);

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

/// Numerical rank with each row normalized first (rows of an observability
/// matrix differ by powers of the eigenvalue scale).
int row_scaled_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

/// Removes the unobservable subspace by an orthogonal staircase transformation.
StateSpace observable_part(const StateSpace& sys, double rel_tol = 1e-9);

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> y;
};

/// Unit-step response from zero state using the exact zero-order-hold
/// discretization of (A, B) over dt. Samples at t = 0, dt, 2dt, ...
TimeSeries step_response(const StateSpace& sys, double t_end, double dt, int in = 0, int out = 0);

FrequencyResponse frequency_response(const StateSpace& sys, const FrequencyGrid& grid, int in = 0,
                                     int out = 0);

}  // namespace buckdr::lti
