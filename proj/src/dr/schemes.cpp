#include "buckdr/dr/schemes.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cctype>
#include <cmath>

#include "buckdr/error.hpp"

namespace buckdr::dr {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using lti::Polynomial;
using lti::RationalTF;
using lti::StateSpace;

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::None: return "none";
    case Kind::DOB: return "dob";
    case Kind::UIO: return "uio";
    case Kind::LEC: return "lec";
  }
  return "none";
}

Kind parse_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "none") return Kind::None;
  if (s == "dob") return Kind::DOB;
  if (s == "uio") return Kind::UIO;
  if (s == "lec") return Kind::LEC;
  throw Error(Errc::Validation, "unknown scheme '" + name + "'");
}

namespace {

/// Sum of SISO realizations, one per input channel.
StateSpace summed(const std::vector<StateSpace>& parts) {
  StateSpace acc = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) acc = lti::append(acc, parts[k]);
  return lti::premultiply(MatrixXd::Ones(1, static_cast<Eigen::Index>(parts.size())), acc);
}

void realize_scheme(DRScheme& s) {
  std::vector<StateSpace> parts;
  for (const auto& g : s.estimator) parts.push_back(lti::realize(g));
  s.estimator_ss = summed(parts);
  s.compensator_ss = lti::realize(s.compensator);
}

}  // namespace

DRScheme no_scheme() {
  DRScheme s;
  s.compensator = RationalTF::gain(0.0);
  return s;
}

RationalTF g1(const buck::BuckParams& p) {
  return {Polynomial{1.0, p.C * (p.R_L + p.R_C)}, Polynomial{p.R_L, p.R_L * p.C * p.R_C}};
}

RationalTF g2(const buck::BuckParams& p) { return {Polynomial{-p.R_i_prime(), -p.L}, Polynomial{1.0}}; }

RationalTF lec_compensator(const buck::BuckParams& p, double p_H) {
  if (!(p_H > 0.0)) throw Error(Errc::InvalidParameter, "p_H must be positive");
  return {Polynomial{p.R_i_prime(), p.L}, Polynomial{p.k_FF, p.k_FF / p_H}};
}

RationalTF dob_inverse_model(const buck::PlantMatrix& plant, double p_H) {
  const Polynomial zero{1.0, 1.0 / plant.omega_PS};
  return {zero * zero, Polynomial{1.0, 1.0 / plant.omega_ESR} * Polynomial{1.0, 1.0 / p_H}};
}

StateSpace lec_compensator_ss(const buck::BuckParams& p, double p_H) {
  // R_i'/k_FF * p_H/(s+p_H) + L p_H/k_FF * s/(s+p_H) on two copies of the
  // same pole. The high-pass output is w (u - x) with exactly opposite
  // weights, so the DC gain is never formed as a difference of rounded terms.
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2), d(1, 1);
  const double w_low = p.R_i_prime() / p.k_FF;
  const double w_high = p.L * p_H / p.k_FF;
  a << -p_H, 0.0, 0.0, -p_H;
  b << p_H, p_H;
  c << w_low, -w_high;
  d << w_high;
  return {a, b, c, d};
}

DRScheme build_dob(const buck::PlantMatrix& plant, double k_FF, double p_H) {
  if (!(p_H > 0.0)) throw Error(Errc::InvalidParameter, "p_H must be positive");
  DRScheme s;
  s.kind = Kind::DOB;
  s.p_H = p_H;
  s.inputs = {Channel::v_o, Channel::v_SW};
  s.estimator = {dob_inverse_model(plant, p_H), RationalTF(Polynomial{-p_H}, Polynomial{p_H, 1.0})};
  s.compensator = RationalTF::gain(-1.0 / k_FF);
  realize_scheme(s);
  return s;
}

DRScheme build_lec(const buck::BuckParams& p, double p_H) {
  DRScheme s;
  s.kind = Kind::LEC;
  s.p_H = p_H;
  s.inputs = {Channel::v_o, Channel::i_L};
  s.estimator = {-g1(p), RationalTF::gain(1.0)};
  s.compensator = lec_compensator(p, p_H);
  // -G1 split like the compensator: -(1/R_L) a/(s+a) - (R_L+R_C)/(R_L R_C) s/(s+a), a = 1/(C R_C).
  const double a = 1.0 / (p.C * p.R_C);
  const double w_low = 1.0 / p.R_L;
  const double w_high = (p.R_L + p.R_C) / (p.R_L * p.R_C);
  MatrixXd ea(2, 2), eb(2, 2), ec(1, 2), ed(1, 2);
  ea << -a, 0.0, 0.0, -a;
  eb << a, 0.0, a, 0.0;
  ec << -w_low, w_high;
  ed << -w_high, 1.0;
  s.estimator_ss = StateSpace(ea, eb, ec, ed);
  s.compensator_ss = lec_compensator_ss(p, p_H);
  return s;
}

MatrixXd place_observer_gain(const MatrixXd& A, const MatrixXd& C, const std::array<double, 3>& lambda) {
  if (A.rows() != 3 || A.cols() != 3 || C.rows() != 2 || C.cols() != 3)
    throw Error(Errc::DimensionMismatch, "observer placement expects a 3-state, 2-output system");
  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  const bool e01 = same(lambda[0], lambda[1]), e12 = same(lambda[1], lambda[2]), e02 = same(lambda[0], lambda[2]);
  if (e01 && e12) throw Error(Errc::TooManyCoincident, "at most two observer eigenvalues may coincide");

  // First two indices get the unit output directions, the third is chosen
  // to be as independent as possible from their span.
  std::array<int, 3> order{0, 1, 2};
  if (e12) order = {1, 2, 0};
  else if (e02) order = {0, 2, 1};

  const MatrixXd At = A.transpose();
  const MatrixXd Ct = C.transpose();
  auto directions = [&](double lam) {
    MatrixXd m = At - lam * MatrixXd::Identity(3, 3);
    Eigen::FullPivLU<MatrixXd> lu(m);
    if (!lu.isInvertible() || lu.rcond() < 1e-14)
      throw Error(Errc::PlacementFailed, "requested eigenvalue coincides with an open-loop mode");
    return MatrixXd(lu.solve(Ct));  // 3 x 2
  };

  MatrixXd W(3, 3), G(2, 3);
  const MatrixXd m0 = directions(lambda[order[0]]);
  const MatrixXd m1 = directions(lambda[order[1]]);
  const MatrixXd m2 = directions(lambda[order[2]]);
  G.col(order[0]) = Eigen::Vector2d(1.0, 0.0);
  G.col(order[1]) = Eigen::Vector2d(0.0, 1.0);
  W.col(order[0]) = m0.col(0);
  W.col(order[1]) = m1.col(1);

  Vector3d normal = Vector3d(W.col(order[0])).cross(Vector3d(W.col(order[1])));
  if (normal.norm() == 0.0) throw Error(Errc::PlacementFailed, "eigenvector directions are dependent");
  normal.normalize();
  Eigen::Vector2d g = m2.transpose() * normal;
  if (g.norm() == 0.0) throw Error(Errc::PlacementFailed, "no admissible direction for the remaining eigenvalue");
  g.normalize();
  G.col(order[2]) = g;
  W.col(order[2]) = m2 * g;

  // Column-normalize W so the conditioning test is scale-free.
  for (int k = 0; k < 3; ++k) {
    const double nrm = W.col(k).norm();
    W.col(k) /= nrm;
    G.col(k) /= nrm;
  }
  Eigen::FullPivLU<MatrixXd> lu(W);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) throw Error(Errc::PlacementFailed, "eigenvector matrix is singular");
  const MatrixXd Ft = G * lu.inverse();  // 2 x 3
  return Ft.transpose();
}

UIODesign build_uio(const buck::BuckParams& p, const std::array<double, 3>& lambda, double p_H) {
  for (double l : lambda)
    if (!(l < 0.0)) throw Error(Errc::InvalidParameter, "observer eigenvalues must be negative");
  const StateSpace plant = buck::plant_state_space(p);
  UIORealization r;
  r.lambda = lambda;
  r.A_a = MatrixXd::Zero(3, 3);
  r.A_a.topLeftCorner(2, 2) = plant.A;
  r.A_a.topRightCorner(2, 1) = plant.B.col(0);
  r.B_a = MatrixXd::Zero(3, 1);
  r.B_a.topRows(2) = plant.B.col(1);
  r.C_a.resize(2, 3);
  r.C_a << plant.C, plant.D.col(0);
  r.C_o = MatrixXd::Zero(1, 3);
  r.C_o(0, 2) = 1.0;

  r.F = place_observer_gain(r.A_a, r.C_a, lambda);
  r.A_cl = r.A_a - r.F * r.C_a;
  MatrixXd b(3, 3);
  b << r.B_a, r.F;
  r.full = StateSpace(r.A_cl, b, r.C_o, MatrixXd::Zero(1, 3));
  r.reduced = lti::observable_part(r.full);

  DRScheme s;
  s.kind = Kind::UIO;
  s.p_H = p_H;
  s.inputs = {Channel::v_SW, Channel::v_o, Channel::i_L};
  for (int k = 0; k < 3; ++k) s.estimator.push_back(lti::ss_to_tf(r.reduced, k, 0));
  s.compensator = lec_compensator(p, p_H);
  s.estimator_ss = r.reduced;
  s.compensator_ss = lec_compensator_ss(p, p_H);
  return {r, s};
}

DRScheme build_scheme(Kind kind, const buck::BuckParams& nominal, double p_H, const std::array<double, 3>& uio_lambda) {
  switch (kind) {
    case Kind::None: return no_scheme();
    case Kind::DOB: return build_dob(buck::build_plant(nominal), nominal.k_FF, p_H);
    case Kind::LEC: return build_lec(nominal, p_H);
    case Kind::UIO: return build_uio(nominal, uio_lambda, p_H).scheme;
  }
  return no_scheme();
}

}  // namespace buckdr::dr
