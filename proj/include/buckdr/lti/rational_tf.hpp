#pragma once

#include <vector>

#include "buckdr/lti/polynomial.hpp"

namespace buckdr::lti {

/// Relative root distance below which a numerator and denominator root are
/// treated as an exact cancellation: |r_num - r_den| < tol * (1 + |r_den|).
inline constexpr double kCancellationTol = 1e-7;

struct PolesZeros {
  std::vector<cplx> poles;
  std::vector<cplx> zeros;
};

/// Scalar transfer function num(s)/den(s).
class RationalTF {
 public:
  RationalTF() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
  RationalTF(Polynomial num, Polynomial den);

  static RationalTF gain(double k) { return {Polynomial::constant(k), Polynomial::constant(1.0)}; }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  /// num(s)/den(s); throws PoleHit when den(s) is at rounding level.
  cplx evaluate(cplx s) const;
  /// Same as evaluate() without the pole guard (returns inf/nan at a pole).
  cplx operator()(cplx s) const { return num_(s) / den_(s); }
  cplx at_omega(double omega) const { return (*this)(cplx(0.0, omega)); }

  bool is_proper() const { return num_.degree() <= den_.degree(); }
  bool is_strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }
  bool is_zero() const { return num_.is_zero(); }

  /// Cancels common roots under kCancellationTol and makes the denominator monic.
  RationalTF normalized() const;

  /// Poles and zeros of the normalized function.
  PolesZeros poles_zeros() const;

  /// True when every pole has Re(p) < -margin.
  bool is_stable(double margin = 0.0) const;

  RationalTF operator-() const { return {-num_, den_}; }
  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator-(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator*(double k, const RationalTF& g) { return {g.num_.scaled(k), g.den_}; }

 private:
  Polynomial num_;
  Polynomial den_;
};

enum class Connection { Series, Parallel, Feedback };

/// series = a*b, parallel = a+b, feedback = a/(1+a*b); results are normalized.
RationalTF connect(Connection op, const RationalTF& a, const RationalTF& b);
inline RationalTF series(const RationalTF& a, const RationalTF& b) { return connect(Connection::Series, a, b); }
inline RationalTF parallel(const RationalTF& a, const RationalTF& b) { return connect(Connection::Parallel, a, b); }
inline RationalTF feedback(const RationalTF& a, const RationalTF& b) { return connect(Connection::Feedback, a, b); }

/// Removes root pairs closer than tol*(1+|r_den|); rebuilds only if something cancelled.
std::pair<Polynomial, Polynomial> cancel_common_roots(const Polynomial& num, const Polynomial& den,
                                                      double tol = kCancellationTol);

}  // namespace buckdr::lti
