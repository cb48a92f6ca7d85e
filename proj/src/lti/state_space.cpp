#include "buckdr/lti/state_space.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>
#include <unsupported/Eigen/MatrixFunctions>

#include "buckdr/error.hpp"

namespace buckdr::lti {

using Eigen::MatrixXd;
using quad = boost::multiprecision::float128;

extern "C" void dgebal_(const char* job, const int* n, double* a, const int* lda, int* ilo, int* ihi, double* scale,
                        int* info);

StateSpace::StateSpace(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  validate();
}

StateSpace StateSpace::static_gain(const MatrixXd& d) {
  return {MatrixXd(0, 0), MatrixXd(0, d.cols()), MatrixXd(d.rows(), 0), d};
}

void StateSpace::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() || D.cols() != B.cols())
    throw Error(Errc::DimensionMismatch, "inconsistent state-space dimensions");
}

namespace {

// Extended precision keeps loops with large internal cancellation accurate
// (the compensated output can be 1e5 times smaller than individual states).
using cplxl = std::complex<long double>;
using MatrixXcl = Eigen::Matrix<cplxl, Eigen::Dynamic, Eigen::Dynamic>;

MatrixXcl resolvent_solve(const MatrixXd& a, cplx s, const MatrixXd& b) {
  MatrixXcl m = -a.cast<long double>().cast<cplxl>();
  m.diagonal().array() += cplxl(s.real(), s.imag());
  return m.partialPivLu().solve(b.cast<long double>().cast<cplxl>());
}

}  // namespace

Eigen::MatrixXcd StateSpace::response(cplx s) const {
  if (states() == 0) return D.cast<cplx>();
  const MatrixXcl y = C.cast<long double>().cast<cplxl>() * resolvent_solve(A, s, B) +
                      D.cast<long double>().cast<cplxl>();
  Eigen::MatrixXcd out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) out(i, j) = cplx(double(y(i, j).real()), double(y(i, j).imag()));
  return out;
}

cplx StateSpace::response(cplx s, int in, int out) const {
  if (states() == 0) return D(out, in);
  const MatrixXcl x = resolvent_solve(A, s, B.col(in));
  cplxl y = static_cast<long double>(D(out, in));
  for (Eigen::Index k = 0; k < x.rows(); ++k) y += static_cast<long double>(C(out, k)) * x(k, 0);
  return {double(y.real()), double(y.imag())};
}

Eigen::VectorXcd StateSpace::eigenvalues() const {
  if (states() == 0) return {};
  // Closed loops here have eigenvalue condition numbers near 1e17, past what a
  // double solve resolves. LAPACK permutes and scales, then the QR iteration
  // runs in quad precision.
  MatrixXd bal = A;
  int n = static_cast<int>(A.rows()), ilo = 0, ihi = 0, info = 0;
  std::vector<double> scale(static_cast<std::size_t>(n));
  dgebal_("B", &n, bal.data(), &n, &ilo, &ihi, scale.data(), &info);
  if (info != 0) throw Error(Errc::InvalidParameter, "dgebal rejected its arguments");
  const Eigen::Matrix<quad, Eigen::Dynamic, Eigen::Dynamic> aq = bal.cast<quad>();
  Eigen::EigenSolver<Eigen::Matrix<quad, Eigen::Dynamic, Eigen::Dynamic>> es(aq, false);
  Eigen::VectorXcd out(A.rows());
  for (Eigen::Index k = 0; k < out.size(); ++k)
    out[k] = cplx(static_cast<double>(es.eigenvalues()[k].real()), static_cast<double>(es.eigenvalues()[k].imag()));
  return out;
}

bool StateSpace::is_stable(double margin) const {
  const Eigen::VectorXcd ev = eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (!(ev[k].real() < -margin)) return false;
  return true;
}

StateSpace tf_to_ss(const RationalTF& g) {
  if (!g.is_proper()) throw Error(Errc::ImproperTF, "numerator degree exceeds denominator degree");
  const Polynomial den = g.den().scaled(1.0 / g.den().leading());
  const Polynomial num = g.num().scaled(1.0 / g.den().leading());
  const int n = den.degree();
  const double d = num[static_cast<std::size_t>(n)];
  if (n == 0) return StateSpace::static_gain(MatrixXd::Constant(1, 1, d));
  const Polynomial rem = num - den.scaled(d);
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) a(n - 1, j) = -den[static_cast<std::size_t>(j)];
  MatrixXd b = MatrixXd::Zero(n, 1);
  b(n - 1, 0) = 1.0;
  MatrixXd c(1, n);
  for (int j = 0; j < n; ++j) c(0, j) = rem[static_cast<std::size_t>(j)];
  return {a, b, c, MatrixXd::Constant(1, 1, d)};
}

namespace {

Polynomial char_poly(const MatrixXd& a) {
  if (a.rows() == 0) return Polynomial::constant(1.0);
  Eigen::EigenSolver<MatrixXd> es(a, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return Polynomial::from_roots(roots);
}

}  // namespace

RationalTF ss_to_tf(const StateSpace& sys, int in, int out) {
  const double d = sys.D(out, in);
  if (sys.states() == 0) return RationalTF::gain(d);
  const StateSpace bal = balanced(sys);
  const MatrixXd b = bal.B.col(in);
  const MatrixXd c = bal.C.row(out);
  const Polynomial den = char_poly(bal.A);
  // c (sI - A)^{-1} b = det(sI - A + b c) - det(sI - A) over det(sI - A).
  const Polynomial shifted = char_poly(bal.A - b * c);
  std::vector<double> diff = (shifted - den).coefficients();
  diff.resize(static_cast<std::size_t>(den.degree()), 0.0);
  const Polynomial num = Polynomial(diff) + den.scaled(d);
  return RationalTF(num, den).normalized();
}

StateSpace balanced(const StateSpace& sys) {
  const int n = sys.states();
  if (n == 0) return sys;
  MatrixXd a = sys.A;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      const double col = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
      const double row = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
      if (col == 0.0 || row == 0.0) continue;
      double f = 1.0;
      double c = col;
      const double r = row;
      while (c < r / 2.0) {
        c *= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        f /= 2.0;
      }
      // Bounded so a decoupled state (zero column, e.g. an integrator) cannot drift to underflow.
      const double next = scale(i) * f;
      if ((c + r / f) < 0.95 * (col + row) && next >= 0x1.0p-40 && next <= 0x1.0p40) {
        converged = false;
        scale(i) *= f;
        a.col(i) *= f;
        a.row(i) /= f;
      }
    }
  }
  StateSpace out = sys;
  out.A = a;
  out.B = scale.cwiseInverse().asDiagonal() * sys.B;
  out.C = sys.C * scale.asDiagonal();
  return out;
}

StateSpace realize(const RationalTF& g) { return balanced(tf_to_ss(g)); }

StateSpace series(const StateSpace& first, const StateSpace& second) {
  if (first.outputs() != second.inputs()) throw Error(Errc::DimensionMismatch, "series dimension mismatch");
  const int n1 = first.states();
  const int n2 = second.states();
  MatrixXd a = MatrixXd::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = first.A;
  a.bottomLeftCorner(n2, n1) = second.B * first.C;
  a.bottomRightCorner(n2, n2) = second.A;
  MatrixXd b(n1 + n2, first.inputs());
  b << first.B, second.B * first.D;
  MatrixXd c(second.outputs(), n1 + n2);
  c << second.D * first.C, second.C;
  return {a, b, c, second.D * first.D};
}

StateSpace append(const StateSpace& x, const StateSpace& y) {
  const int n1 = x.states(), n2 = y.states();
  const int m1 = x.inputs(), m2 = y.inputs();
  const int p1 = x.outputs(), p2 = y.outputs();
  MatrixXd a = MatrixXd::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = x.A;
  a.bottomRightCorner(n2, n2) = y.A;
  MatrixXd b = MatrixXd::Zero(n1 + n2, m1 + m2);
  b.topLeftCorner(n1, m1) = x.B;
  b.bottomRightCorner(n2, m2) = y.B;
  MatrixXd c = MatrixXd::Zero(p1 + p2, n1 + n2);
  c.topLeftCorner(p1, n1) = x.C;
  c.bottomRightCorner(p2, n2) = y.C;
  MatrixXd d = MatrixXd::Zero(p1 + p2, m1 + m2);
  d.topLeftCorner(p1, m1) = x.D;
  d.bottomRightCorner(p2, m2) = y.D;
  return {a, b, c, d};
}

StateSpace premultiply(const MatrixXd& m, const StateSpace& sys) {
  if (m.cols() != sys.outputs()) throw Error(Errc::DimensionMismatch, "premultiply dimension mismatch");
  return {sys.A, sys.B, m * sys.C, m * sys.D};
}

StateSpace postmultiply(const StateSpace& sys, const MatrixXd& n) {
  if (n.rows() != sys.inputs()) throw Error(Errc::DimensionMismatch, "postmultiply dimension mismatch");
  return {sys.A, sys.B * n, sys.C, sys.D * n};
}

StateSpace lower_lft(const StateSpace& plant, const StateSpace& k) {
  const int nu = k.outputs();
  const int ny = k.inputs();
  const int nw = plant.inputs() - nu;
  const int nz = plant.outputs() - ny;
  if (nw < 0 || nz < 0) throw Error(Errc::DimensionMismatch, "controller larger than plant channels");
  const int np = plant.states();
  const int nk = k.states();

  const MatrixXd b1 = plant.B.leftCols(nw), b2 = plant.B.rightCols(nu);
  const MatrixXd c1 = plant.C.topRows(nz), c2 = plant.C.bottomRows(ny);
  const MatrixXd d11 = plant.D.topLeftCorner(nz, nw), d12 = plant.D.topRightCorner(nz, nu);
  const MatrixXd d21 = plant.D.bottomLeftCorner(ny, nw), d22 = plant.D.bottomRightCorner(ny, nu);

  const MatrixXd m = MatrixXd::Identity(nu, nu) - k.D * d22;
  Eigen::FullPivLU<MatrixXd> lu(m);
  if (nu > 0 && (!lu.isInvertible() || lu.rcond() < 1e-12)) throw Error(Errc::IllPosed, "I - D_K D_22 is singular");
  const MatrixXd e = nu > 0 ? MatrixXd(lu.inverse()) : MatrixXd(0, 0);

  // u = ux x + uk xk + uw w
  const MatrixXd ux = e * k.D * c2;
  const MatrixXd uk = e * k.C;
  const MatrixXd uw = e * k.D * d21;
  // y = yx x + yk xk + yw w
  const MatrixXd yx = c2 + d22 * ux;
  const MatrixXd yk = d22 * uk;
  const MatrixXd yw = d21 + d22 * uw;

  MatrixXd a(np + nk, np + nk);
  a << plant.A + b2 * ux, b2 * uk, k.B * yx, k.A + k.B * yk;
  MatrixXd b(np + nk, nw);
  b << b1 + b2 * uw, k.B * yw;
  MatrixXd c(nz, np + nk);
  c << c1 + d12 * ux, d12 * uk;
  return {a, b, c, d11 + d12 * uw};
}

MatrixXd observability_matrix(const MatrixXd& a, const MatrixXd& c) {
  const auto n = a.rows();
  const auto p = c.rows();
  MatrixXd o(p * n, n);
  MatrixXd blk = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    o.middleRows(k * p, p) = blk;
    blk = blk * a;
  }
  return o;
}

namespace {

MatrixXd row_normalized(const MatrixXd& m) {
  MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double nrm = out.row(i).norm();
    if (nrm > 0.0) out.row(i) /= nrm;
  }
  return out;
}

int rank_from_singular(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rel_tol * sv(0)) ++r;
  return r;
}

}  // namespace

int row_scaled_rank(const MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<MatrixXd> svd(row_normalized(m));
  return rank_from_singular(svd.singularValues(), rel_tol);
}

// Orthogonal staircase on the dual pair (A', C'); avoids forming powers of A.
StateSpace observable_part(const StateSpace& sys, double rel_tol) {
  const int n = sys.states();
  if (n == 0) return sys;
  MatrixXd at = sys.A.transpose();
  MatrixXd q = MatrixXd::Identity(n, n);
  const double tol = rel_tol * std::max({at.norm(), sys.C.norm(), 1e-300});
  MatrixXd feed = sys.C.transpose();
  int done = 0;
  while (done < n) {
    Eigen::JacobiSVD<MatrixXd> svd(feed, Eigen::ComputeFullU);
    int r = 0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
      if (svd.singularValues()(k) > tol) ++r;
    if (r == 0) break;
    MatrixXd t = MatrixXd::Identity(n, n);
    t.bottomRightCorner(n - done, n - done) = svd.matrixU();
    at = t.transpose() * at * t;
    q = q * t;
    feed = at.block(done + r, done, n - done - r, r);
    done += r;
  }
  if (done == n) return sys;
  const MatrixXd o = q.leftCols(done);
  return {o.transpose() * sys.A * o, o.transpose() * sys.B, sys.C * o, sys.D};
}

TimeSeries step_response(const StateSpace& sys, double t_end, double dt, int in, int out) {
  if (!(dt > 0.0) || !(t_end >= dt)) throw Error(Errc::InvalidParameter, "step response needs dt > 0 and t_end >= dt");
  const int n = sys.states();
  const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  TimeSeries ts;
  ts.t.reserve(steps + 1);
  ts.y.reserve(steps + 1);
  const double d = sys.D(out, in);
  if (n == 0) {
    for (std::size_t k = 0; k <= steps; ++k) {
      ts.t.push_back(static_cast<double>(k) * dt);
      ts.y.push_back(d);
    }
    return ts;
  }
  MatrixXd aug = MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = sys.A * dt;
  aug.topRightCorner(n, 1) = sys.B.col(in) * dt;
  const MatrixXd phi = aug.exp();
  const MatrixXd ad = phi.topLeftCorner(n, n);
  const Eigen::VectorXd bd = phi.topRightCorner(n, 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k <= steps; ++k) {
    ts.t.push_back(static_cast<double>(k) * dt);
    ts.y.push_back(sys.C.row(out).dot(x) + d);
    x = ad * x + bd;
  }
  return ts;
}

FrequencyResponse frequency_response(const StateSpace& sys, const FrequencyGrid& grid, int in, int out) {
  FrequencyResponse r{grid, {}};
  r.values.reserve(grid.size());
  for (double w : grid.omegas()) r.values.push_back(sys.response(cplx(0.0, w), in, out));
  return r;
}

}  // namespace buckdr::lti
