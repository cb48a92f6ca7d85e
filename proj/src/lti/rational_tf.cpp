#include "buckdr/lti/rational_tf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "buckdr/error.hpp"

namespace buckdr::lti {

RationalTF::RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(Errc::DegenerateDenominator, "denominator is identically zero");
}

cplx RationalTF::evaluate(cplx s) const {
  const cplx d = den_(s);
  const double scale = den_.abs_scale(std::abs(s));
  if (std::abs(d) <= 64.0 * std::numeric_limits<double>::epsilon() * scale)
    throw Error(Errc::PoleHit, "denominator vanishes at the evaluation point");
  return num_(s) / d;
}

namespace {

Polynomial drop_low(const Polynomial& p, int k) {
  if (k == 0) return p;
  const auto& c = p.coefficients();
  return Polynomial(std::vector<double>(c.begin() + k, c.end()));
}

}  // namespace

std::pair<Polynomial, Polynomial> cancel_common_roots(const Polynomial& num, const Polynomial& den, double tol) {
  if (num.is_zero()) return {num, Polynomial::constant(1.0)};
  // Exact roots at the origin cancel structurally.
  const int z = std::min(num.zero_root_multiplicity(), den.zero_root_multiplicity());
  Polynomial n = drop_low(num, z);
  Polynomial d = drop_low(den, z);
  if (n.degree() == 0 || d.degree() == 0) return {n, d};

  std::vector<cplx> rn = n.roots();
  std::vector<cplx> rd = d.roots();
  std::vector<bool> used_d(rd.size(), false);
  std::vector<cplx> keep_n;
  bool cancelled = false;
  for (const cplx& r : rn) {
    std::size_t best = rd.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rd.size(); ++j) {
      if (used_d[j]) continue;
      const double dist = std::abs(r - rd[j]);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best < rd.size() && best_dist < tol * (1.0 + std::abs(rd[best]))) {
      used_d[best] = true;
      cancelled = true;
    } else {
      keep_n.push_back(r);
    }
  }
  if (!cancelled) return {n, d};
  std::vector<cplx> keep_d;
  for (std::size_t j = 0; j < rd.size(); ++j)
    if (!used_d[j]) keep_d.push_back(rd[j]);
  return {Polynomial::from_roots(keep_n, n.leading()), Polynomial::from_roots(keep_d, d.leading())};
}

RationalTF RationalTF::normalized() const {
  if (num_.is_zero()) return {Polynomial::constant(0.0), Polynomial::constant(1.0)};
  auto [n, d] = cancel_common_roots(num_, den_);
  const double lead = d.leading();
  return {n.scaled(1.0 / lead), d.scaled(1.0 / lead)};
}

PolesZeros RationalTF::poles_zeros() const {
  const RationalTF g = normalized();
  PolesZeros pz;
  pz.poles = g.den_.roots();
  if (!g.num_.is_zero()) pz.zeros = g.num_.roots();
  return pz;
}

bool RationalTF::is_stable(double margin) const {
  const auto poles = poles_zeros().poles;
  return std::all_of(poles.begin(), poles.end(), [margin](cplx p) { return p.real() < -margin; });
}

namespace {

bool same_poly(const Polynomial& a, const Polynomial& b) { return a.coefficients() == b.coefficients(); }

}  // namespace

RationalTF operator*(const RationalTF& a, const RationalTF& b) { return {a.num_ * b.num_, a.den_ * b.den_}; }

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
  if (same_poly(a.den_, b.den_)) return {a.num_ + b.num_, a.den_};
  return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) { return a + (-b); }

RationalTF connect(Connection op, const RationalTF& a, const RationalTF& b) {
  switch (op) {
    case Connection::Series: return (a * b).normalized();
    case Connection::Parallel: return (a + b).normalized();
    case Connection::Feedback: {
      const Polynomial den = a.den() * b.den() + a.num() * b.num();
      const Polynomial scale_ref = a.den() * b.den();
      double ref = 0.0;
      for (double c : scale_ref.coefficients()) ref = std::max(ref, std::abs(c));
      double mag = 0.0;
      for (double c : den.coefficients()) mag = std::max(mag, std::abs(c));
      if (den.is_zero() || mag <= 1e-14 * ref)
        throw Error(Errc::AlgebraicLoop, "1 + a*b is identically zero");
      return RationalTF(a.num() * b.den(), den).normalized();
    }
  }
  throw Error(Errc::InvalidParameter, "unknown connection");
}

}  // namespace buckdr::lti
