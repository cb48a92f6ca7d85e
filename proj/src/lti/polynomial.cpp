#include "buckdr/lti/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "buckdr/error.hpp"

namespace buckdr::lti {

Polynomial::Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

void Polynomial::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

Polynomial Polynomial::from_roots(std::span<const cplx> roots, double leading) {
  std::vector<cplx> c{cplx(leading, 0.0)};
  for (const cplx& r : roots) {
    std::vector<cplx> next(c.size() + 1, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  std::vector<double> real(c.size());
  std::transform(c.begin(), c.end(), real.begin(), [](cplx v) { return v.real(); });
  return Polynomial(std::move(real));
}

Polynomial Polynomial::monomial(int k, double c) {
  std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
  v.back() = c;
  return Polynomial(std::move(v));
}

cplx Polynomial::operator()(cplx s) const {
  cplx acc(0.0, 0.0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::abs_scale(double abs_s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * abs_s + std::abs(*it);
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() == 1) return constant(0.0);
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::scaled(double k) const {
  std::vector<double> c(coeffs_);
  for (double& v : c) v *= k;
  return Polynomial(std::move(c));
}

int Polynomial::zero_root_multiplicity() const {
  if (is_zero()) return 0;
  int m = 0;
  while (coeffs_[static_cast<std::size_t>(m)] == 0.0) ++m;
  return m;
}

double Polynomial::root_scale() const {
  const int m = zero_root_multiplicity();
  const int n = degree() - m;
  if (n <= 0) return 1.0;
  return std::pow(std::abs(coeffs_[static_cast<std::size_t>(m)] / leading()), 1.0 / n);
}

Polynomial Polynomial::trimmed_relative(double rel_tol) const {
  if (is_zero()) return *this;
  const double sigma = root_scale();
  std::vector<double> mags(coeffs_.size());
  double pk = 1.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k, pk *= sigma) mags[k] = std::abs(coeffs_[k]) * pk;
  const double peak = *std::max_element(mags.begin(), mags.end());
  std::vector<double> c(coeffs_);
  while (c.size() > 1 && mags[c.size() - 1] < rel_tol * peak) c.pop_back();
  return Polynomial(std::move(c));
}

void sort_roots(std::vector<cplx>& roots) {
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

std::vector<cplx> Polynomial::roots() const {
  if (is_zero()) throw Error(Errc::InvalidParameter, "roots of the zero polynomial are undefined");
  const int m = zero_root_multiplicity();
  std::vector<cplx> out(static_cast<std::size_t>(m), cplx(0.0, 0.0));
  const int n = degree() - m;
  if (n == 0) return out;

  const double* c = coeffs_.data() + m;
  // Work in z = s / sigma so that the monic coefficients are O(1).
  const double sigma = std::pow(std::abs(c[0] / c[n]), 1.0 / n);
  std::vector<double> b(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) b[k] = c[k] * std::pow(sigma, k - n) / c[n];

  std::vector<cplx> z;
  if (n == 1) {
    z.push_back(-b[0]);
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -b[i];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw Error(Errc::InvalidParameter, "companion eigenvalues did not converge");
    for (int i = 0; i < n; ++i) z.push_back(es.eigenvalues()[i]);

    // Newton polish on the scaled polynomial, keeping only improving steps.
    Polynomial scaled_poly(b);
    Polynomial dp = scaled_poly.derivative();
    for (cplx& root : z) {
      for (int it = 0; it < 3; ++it) {
        const cplx f = scaled_poly(root);
        const cplx df = dp(root);
        if (std::abs(df) == 0.0) break;
        const cplx cand = root - f / df;
        if (std::abs(scaled_poly(cand)) < std::abs(f)) root = cand; else break;
      }
      if (std::abs(root.imag()) <= 1e-14 * std::abs(root)) root = cplx(root.real(), 0.0);
    }
  }
  for (const cplx& r : z) out.push_back(r * sigma);
  sort_roots(out);
  return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k] - b[k];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw Error(Errc::DegenerateDenominator, "division by the zero polynomial");
  std::vector<double> r(a.coefficients());
  const int nb = b.degree();
  const int na = a.degree();
  if (na < nb) return {Polynomial::constant(0.0), a};
  std::vector<double> q(static_cast<std::size_t>(na - nb) + 1, 0.0);
  for (int k = na - nb; k >= 0; --k) {
    const double f = r[static_cast<std::size_t>(k + nb)] / b.leading();
    q[static_cast<std::size_t>(k)] = f;
    for (int j = 0; j <= nb; ++j) r[static_cast<std::size_t>(k + j)] -= f * b[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(k + nb)] = 0.0;
  }
  r.resize(static_cast<std::size_t>(std::max(nb, 1)));
  return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

}  // namespace buckdr::lti
