#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/error.hpp"
#include "buckdr/lti/frequency.hpp"

namespace buckdr::robust {

/// Upper: never below the true envelope. Lower: sampled, may under-cover.
enum class Direction { Upper, Lower };

struct EnvelopeCurve {
  lti::FrequencyGrid grid;
  std::vector<double> values;
  Direction direction = Direction::Lower;
  int sample_budget = 0;
};

inline constexpr double kEnvelopeSafety = 1.1;

/// Relative errors of the assembled LEC loop against k_FF P11 and P12 s/(s + p_H).
struct Theorem1Error {
  double voltage = 0.0;
  double load = 0.0;
  double load_abs = 0.0;  // absolute error on the load channel
  double max() const { return std::max(voltage, load); }
};

/// `plant` is the true plant; `lec` may have been built from other values.
Theorem1Error theorem1_check(const buck::BuckParams& plant, const dr::DRScheme& lec, double k_FF,
                             const lti::FrequencyGrid& grid);

/// 1.1 * max |G1(p) - G1(nominal)| over the 8 (R_L, R_C, C) vertices plus
/// `budget` uniform interior draws. Throws InvalidParameter for budget < 8.
EnvelopeCurve lambda_envelope(const buck::UncertaintyBox& box, const buck::BuckParams& nominal,
                              const lti::FrequencyGrid& grid, int budget, std::uint64_t seed = 1);

/// Raised when the controller fails to stabilize some sampled plants.
class SampledInstabilityError : public Error {
 public:
  SampledInstabilityError(std::vector<buck::BuckParams> witnesses, const std::string& what)
      : Error(Errc::SampledInstability, what), witnesses_(std::move(witnesses)) {}
  const std::vector<buck::BuckParams>& witnesses() const { return witnesses_; }

 private:
  std::vector<buck::BuckParams> witnesses_;
};

/// 1 / (1.1 * max k_FF |P11 S|) over the box vertices plus `budget` interior
/// draws, with S the sensitivity of the bare voltage loop. k_FF is sampled
/// from `k_FF_range`; zero-width dimensions are not enumerated.
EnvelopeCurve n_lower_bound(const buck::UncertaintyBox& box, const buck::BuckParams& nominal,
                            const lti::RationalTF& K, double Gf, const buck::Interval& k_FF_range,
                            const lti::FrequencyGrid& grid, int budget, std::uint64_t seed = 2);

struct RobustReport {
  // Condition check; rhs - lhs of the p_H form, +inf where Lambda vanishes.
  double condition_margin = std::numeric_limits<double>::infinity();
  std::optional<double> first_violation;
  std::vector<double> wr_abs, lhs, rhs;
  double p_H_used = 0.0;

  // Sampled scan.
  int n_samples = 0;
  double stable_fraction = 1.0;
  std::optional<buck::BuckParams> worst_sample;
  double worst_real_eig = -std::numeric_limits<double>::infinity();

  bool condition_holds() const { return !first_violation.has_value(); }
};

/// |W_r| < N on the grid, with W_r = G2_nom Lambda / (k_FF_nom (1 + s/p_H)).
RobustReport check_condition(const EnvelopeCurve& lambda, const EnvelopeCurve& n, const buck::BuckParams& nominal,
                             double p_H);

/// Largest p_H in [lo, hi] for which the condition holds, by bisection in
/// log p_H to relative tolerance rel_tol. +inf when hi passes, 0 when lo fails.
double critical_p_H(const EnvelopeCurve& lambda, const EnvelopeCurve& n, const buck::BuckParams& nominal,
                    double lo = 1e2, double hi = 1e12, double rel_tol = 1e-3);

/// Averaged closed loop with the scheme built from nominal values on each
/// sampled plant. A sample is stable when every pole has Re < -1 rad/s.
RobustReport sampled_stability_scan(const buck::UncertaintyBox& box, const buck::BuckParams& nominal,
                                    const lti::RationalTF& K, double Gf, dr::Kind kind, double p_H, int n_samples,
                                    std::uint64_t seed);

inline constexpr double kStabilityMargin = 1.0;

/// Largest real part of the averaged closed loop's poles.
double closed_loop_abscissa(const buck::BuckParams& plant, const lti::RationalTF& K, double Gf,
                            const dr::DRScheme& scheme);

}  // namespace buckdr::robust
