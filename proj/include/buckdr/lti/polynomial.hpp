#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace buckdr::lti {

using cplx = std::complex<double>;

/// Real polynomial in s, coefficients stored in ascending powers.
///
/// Trailing (highest-power) zero coefficients are trimmed on construction so
/// that the leading coefficient is nonzero; the zero polynomial is stored as {0}.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> ascending);
  explicit Polynomial(std::vector<double> ascending);

  /// leading * prod(s - r). Complex roots must come in conjugate pairs.
  static Polynomial from_roots(std::span<const cplx> roots, double leading = 1.0);
  static Polynomial constant(double c) { return Polynomial(std::vector<double>{c}); }
  /// The monomial s^k.
  static Polynomial monomial(int k, double c = 1.0);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
  double leading() const { return coeffs_.back(); }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  cplx operator()(cplx s) const;
  double operator()(double s) const;
  /// Sum of |c_k| |s|^k, the natural magnitude scale for rounding-error bounds.
  double abs_scale(double abs_s) const;

  Polynomial derivative() const;
  Polynomial scaled(double k) const;
  /// Number of exact roots at s = 0.
  int zero_root_multiplicity() const;

  /// Roots with multiplicity, sorted by real part then imaginary part.
  std::vector<cplx> roots() const;

  /// Geometric-mean root magnitude |c_0/c_n|^(1/n) ignoring exact zero roots.
  double root_scale() const;

  /// Drops leading coefficients that are negligible relative to the rest once
  /// s is measured in units of root_scale().
  Polynomial trimmed_relative(double rel_tol) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double k, const Polynomial& p) { return p.scaled(k); }
  Polynomial operator-() const { return scaled(-1.0); }

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Polynomial long division: a = q*b + r with deg r < deg b.
std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b);

/// Sorts by real part then imaginary part.
void sort_roots(std::vector<cplx>& roots);

}  // namespace buckdr::lti
