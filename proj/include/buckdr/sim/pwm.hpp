#pragma once

#include <vector>

namespace buckdr::sim {

/// Control voltage R0 + R1 cos(omega_1 t + theta_1) fed to the comparator.
struct PwmTone {
  double R0 = 0.0;
  double R1 = 0.0;
  double omega_1 = 0.0;
  double theta_1 = 0.0;
};

struct PwmCarrier {
  double V_pk = 1.0;
  double omega_sw = 1.0;
};

/// Falling edge of each switching period for a trailing-edge sawtooth
/// comparator: d = 1 from k T until the sawtooth meets the tone.
/// Throws HypothesisViolated unless 0 < R0 - R1, R0 + R1 < V_pk,
/// omega_1 < omega_sw and the tone is slower than the sawtooth ramp.
std::vector<double> pwm_fall_times(const PwmTone& tone, const PwmCarrier& carrier, int periods);

struct PwmBin {
  int m = 0;
  int n = 0;
  double omega = 0.0;
  double amplitude = 0.0;  // one-sided, from the simulated edges
  double oracle = 0.0;     // double Fourier series with Bessel coefficients
  double bound = 0.0;      // D_{m,n}
};

struct PwmSpectrumReport {
  int periods = 0;
  double dc = 0.0, dc_expected = 0.0, dc_oracle = 0.0;
  double fundamental = 0.0, fundamental_expected = 0.0, fundamental_oracle = 0.0;
  std::vector<PwmBin> bins;  // m = 1..m_max, n = -n_max..n_max

  bool dc_ok() const;           // within 1 %
  bool fundamental_ok() const;  // within 2 %
  bool bounds_ok() const;
  bool oracle_ok() const;       // every bin within 2 % of the oracle
  bool passed() const { return dc_ok() && fundamental_ok() && bounds_ok() && oracle_ok(); }
};

/// Spectrum of d(t) over an integer number of beat periods covering at least
/// max(200 switching periods, t_end). omega_1 / omega_sw must be a ratio of
/// integers with denominator up to 10000. Each bin is the exact Fourier
/// coefficient of the simulated pulse train, so no window leakage enters.
PwmSpectrumReport pwm_spectrum_check(const PwmTone& tone, const PwmCarrier& carrier, double t_end, int m_max = 5,
                                     int n_max = 3);

}  // namespace buckdr::sim
