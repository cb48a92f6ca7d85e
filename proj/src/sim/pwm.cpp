#include "buckdr/sim/pwm.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "buckdr/buck/model.hpp"
#include "buckdr/error.hpp"

namespace buckdr::sim {

namespace {

using cplx = std::complex<double>;
using cplxl = std::complex<long double>;
constexpr double kPi = std::numbers::pi;

void check_hypotheses(const PwmTone& tone, const PwmCarrier& carrier) {
  if (!(carrier.V_pk > 0.0) || !(carrier.omega_sw > 0.0))
    throw Error(Errc::InvalidParameter, "carrier needs positive V_pk and omega_sw");
  if (!(tone.R1 >= 0.0)) throw Error(Errc::HypothesisViolated, "R1 must be nonnegative");
  if (!(tone.R0 - tone.R1 > 0.0)) throw Error(Errc::HypothesisViolated, "R0 - R1 must be positive");
  if (!(tone.R0 + tone.R1 < carrier.V_pk)) throw Error(Errc::HypothesisViolated, "R0 + R1 must stay below V_pk");
  if (tone.R1 > 0.0) {
    if (!(tone.omega_1 > 0.0 && tone.omega_1 < carrier.omega_sw))
      throw Error(Errc::HypothesisViolated, "omega_1 must lie in (0, omega_sw)");
    // One crossing per period needs the tone slope below the sawtooth slope.
    const double ramp = carrier.V_pk * carrier.omega_sw / (2.0 * kPi);
    if (!(tone.R1 * tone.omega_1 < ramp))
      throw Error(Errc::HypothesisViolated, "tone slope reaches the sawtooth slope");
  }
}

struct Ratio {
  std::int64_t num = 0, den = 1;
};

/// omega_1 / omega_sw as num/den by continued fractions.
Ratio beat_ratio(double r) {
  constexpr std::int64_t kMaxDen = 10000;
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = r;
  for (int it = 0; it < 64; ++it) {
    const auto a = static_cast<std::int64_t>(std::floor(x));
    const std::int64_t h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > kMaxDen) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - r) <= 1e-12 * r) return {h1, k1};
    const double frac = x - static_cast<double>(a);
    if (frac <= 0.0) break;
    x = 1.0 / frac;
  }
  throw Error(Errc::InvalidParameter, "omega_1 / omega_sw must be a ratio with denominator up to 10000");
}

double bessel_j(int n, double x) {
  const double j = std::cyl_bessel_j(static_cast<double>(std::abs(n)), x);
  return (n < 0 && (-n) % 2 == 1) ? -j : j;
}

/// Fourier coefficient of the pulse train at omega, over whole periods.
cplx coefficient(const std::vector<double>& falls, double T, double omega) {
  const long double W = static_cast<long double>(falls.size()) * T;
  if (omega == 0.0) {
    long double on = 0.0L;
    for (std::size_t k = 0; k < falls.size(); ++k) on += falls[k] - static_cast<long double>(k) * T;
    return {static_cast<double>(on / W), 0.0};
  }
  cplxl sum = 0.0L;
  const long double w = omega;
  for (std::size_t k = 0; k < falls.size(); ++k) {
    const long double rise = static_cast<long double>(k) * T;
    sum += std::polar(1.0L, -w * rise) - std::polar(1.0L, -w * static_cast<long double>(falls[k]));
  }
  const cplxl c = sum / (cplxl(0.0L, w) * W);
  return {static_cast<double>(c.real()), static_cast<double>(c.imag())};
}

/// Naturally sampled trailing-edge series
///   d = M(t) + sum_m [sin(m w_s t) - sin(m w_s t - 2 pi m M(t))] / (m pi),
/// M = M0 + M1 cos(w_1 t + theta), expanded with Jacobi-Anger. Frequencies are
/// integers in units of w_s / den; returns the complex coefficient at +F.
cplx oracle_coefficient(std::int64_t F, const Ratio& ratio, double M0, double M1, double theta, int m_max) {
  const std::int64_t a = ratio.num, b = ratio.den;
  cplx c = 0.0;
  auto add = [&](std::int64_t freq, cplx q) {
    // Im(q e^{i W t}) = (q e^{iWt} - conj(q) e^{-iWt}) / 2i
    if (freq == F) c += q / cplx(0.0, 2.0);
    if (freq == -F) c -= std::conj(q) / cplx(0.0, 2.0);
  };
  if (F == 0) {
    double dc = M0;
    for (int m = 1; m <= m_max; ++m) {
      const double z = 2.0 * kPi * m * M1;
      const cplx carrier = std::polar(1.0, -2.0 * kPi * m * M0);
      if (a == 0) continue;
      if ((m * b) % a != 0) continue;
      const auto n = static_cast<int>(-(m * b) / a);
      const cplx q = -std::pow(cplx(0.0, -1.0), n) * bessel_j(n, z) * carrier * std::polar(1.0, n * theta) / (m * kPi);
      dc += q.imag();
    }
    return dc;
  }
  if (a > 0) add(a, cplx(0.0, M1) * std::polar(1.0, theta));
  for (int m = 1; m <= m_max; ++m) {
    const double z = 2.0 * kPi * m * M1;
    const cplx carrier = std::polar(1.0, -2.0 * kPi * m * M0);
    if (a == 0) {
      add(m * b, (1.0 - bessel_j(0, z) * carrier) / (m * kPi));
      continue;
    }
    for (const std::int64_t target : {F, -F}) {
      const std::int64_t rest = target - m * b;
      if (rest % a != 0) continue;
      const auto n = static_cast<int>(rest / a);
      if (std::abs(n) > 400) continue;
      cplx q;
      if (n == 0)
        q = (1.0 - bessel_j(0, z) * carrier) / (m * kPi);
      else
        q = -std::pow(cplx(0.0, -1.0), n) * bessel_j(n, z) * carrier * std::polar(1.0, n * theta) / (m * kPi);
      add(m * b + n * a, q);
    }
  }
  return c;
}

}  // namespace

std::vector<double> pwm_fall_times(const PwmTone& tone, const PwmCarrier& carrier, int periods) {
  check_hypotheses(tone, carrier);
  if (periods < 1) throw Error(Errc::InvalidParameter, "need at least one period");
  const double T = 2.0 * kPi / carrier.omega_sw;
  std::vector<double> falls(static_cast<std::size_t>(periods));
  for (int k = 0; k < periods; ++k) {
    const double t0 = k * T;
    auto f = [&](double tau) {
      return tone.R0 + tone.R1 * std::cos(tone.omega_1 * (t0 + tau) + tone.theta_1) - carrier.V_pk * tau / T;
    };
    const double fa = f(0.0), fb = f(T);
    std::uintmax_t iters = 200;
    const auto root =
        boost::math::tools::toms748_solve(f, 0.0, T, fa, fb, boost::math::tools::eps_tolerance<double>(50), iters);
    falls[static_cast<std::size_t>(k)] = t0 + 0.5 * (root.first + root.second);
  }
  return falls;
}

bool PwmSpectrumReport::dc_ok() const { return std::abs(dc - dc_expected) <= 0.01 * dc_expected; }

bool PwmSpectrumReport::fundamental_ok() const {
  if (fundamental_expected == 0.0) return fundamental < 1e-9;
  return std::abs(fundamental - fundamental_expected) <= 0.02 * fundamental_expected;
}

bool PwmSpectrumReport::bounds_ok() const {
  for (const auto& b : bins)
    if (!(b.amplitude <= b.bound + 1e-12)) return false;
  return true;
}

bool PwmSpectrumReport::oracle_ok() const {
  auto close = [](double got, double want) { return std::abs(got - want) <= 0.02 * std::max(want, 1e-9); };
  if (!close(dc, dc_oracle) || !close(fundamental, fundamental_oracle)) return false;
  for (const auto& b : bins)
    if (!close(b.amplitude, b.oracle)) return false;
  return true;
}

PwmSpectrumReport pwm_spectrum_check(const PwmTone& tone, const PwmCarrier& carrier, double t_end, int m_max,
                                     int n_max) {
  check_hypotheses(tone, carrier);
  if (m_max < 1 || n_max < 0) throw Error(Errc::InvalidParameter, "need m_max >= 1 and n_max >= 0");
  const Ratio ratio = tone.R1 > 0.0 ? beat_ratio(tone.omega_1 / carrier.omega_sw) : Ratio{0, 1};
  const double T = 2.0 * kPi / carrier.omega_sw;
  const double wanted = std::max(200.0, std::ceil(t_end / T));
  const auto beats = static_cast<std::int64_t>(std::ceil(wanted / static_cast<double>(ratio.den)));
  const auto periods = static_cast<int>(beats * ratio.den);
  const std::vector<double> falls = pwm_fall_times(tone, carrier, periods);

  const double M0 = tone.R0 / carrier.V_pk, M1 = tone.R1 / carrier.V_pk;
  const int oracle_m = m_max + 25;
  const double unit = carrier.omega_sw / static_cast<double>(ratio.den);

  PwmSpectrumReport r;
  r.periods = periods;
  r.dc = coefficient(falls, T, 0.0).real();
  r.dc_expected = M0;
  r.dc_oracle = oracle_coefficient(0, ratio, M0, M1, tone.theta_1, oracle_m).real();
  if (ratio.num > 0) {
    r.fundamental = 2.0 * std::abs(coefficient(falls, T, tone.omega_1));
    r.fundamental_oracle = 2.0 * std::abs(oracle_coefficient(ratio.num, ratio, M0, M1, tone.theta_1, oracle_m));
  }
  r.fundamental_expected = M1;

  for (int m = 1; m <= m_max; ++m) {
    for (int n = -n_max; n <= n_max; ++n) {
      if (ratio.num == 0 && n != 0) continue;
      const std::int64_t F = std::abs(m * ratio.den + n * ratio.num);
      PwmBin bin;
      bin.m = m;
      bin.n = n;
      bin.omega = static_cast<double>(F) * unit;
      bin.amplitude = 2.0 * std::abs(coefficient(falls, T, bin.omega));
      bin.oracle = 2.0 * std::abs(oracle_coefficient(F, ratio, M0, M1, tone.theta_1, oracle_m));
      bin.bound = buck::pwm_bound(m, std::abs(n), tone.R1, carrier.V_pk);
      r.bins.push_back(bin);
    }
  }
  return r;
}

}  // namespace buckdr::sim
